"""
Test suite for the solution family registry and parameter parsing.
"""

import unittest
import sys
import os
import json
import tempfile

# Add backend to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'backend'))

from errors import ContractViolation, UnknownFamily
from family_factory import FamilyType, SolutionFamilyFactory, parse_params
from suites import run_suite


class TestParseParams(unittest.TestCase):
    """Inline and file parameter sources."""

    def test_inline_pairs(self):
        params = parse_params("m=2, mu=-1,case=real4d")
        self.assertEqual(params, {"m": 2, "mu": -1, "case": "real4d"})
        self.assertIsInstance(params["m"], int)

    def test_floats(self):
        self.assertEqual(parse_params("lam=-0.5,e=1e-3"), {"lam": -0.5, "e": 0.001})

    def test_empty(self):
        self.assertEqual(parse_params(None), {})
        self.assertEqual(parse_params("  "), {})

    def test_missing_equals(self):
        with self.assertRaises(ContractViolation):
            parse_params("m2")

    def test_json_file_with_params_key(self):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
            json.dump({"family": "black_brane", "params": {"m": 0.5}}, fh)
        try:
            self.assertEqual(parse_params(fh.name), {"m": 0.5})
        finally:
            os.unlink(fh.name)

    def test_toml_file(self):
        with tempfile.NamedTemporaryFile("w", suffix=".toml", delete=False) as fh:
            fh.write("R = 2.0\nc3 = 1.0\n")
        try:
            self.assertEqual(parse_params(fh.name), {"R": 2.0, "c3": 1.0})
        finally:
            os.unlink(fh.name)


class TestSolutionFamilyFactory(unittest.TestCase):
    """Registry lookups and check construction."""

    def setUp(self):
        self.factory = SolutionFamilyFactory()

    def test_available_families(self):
        families = self.factory.get_available_families()
        self.assertEqual({f["id"] for f in families}, {t.value for t in FamilyType})
        freedman = next(f for f in families if f["id"] == "freedman")
        self.assertEqual(freedman["perturbations"], ["H"])
        self.assertEqual(freedman["defaults"]["c3"], 1.0)

    def test_unknown_family(self):
        with self.assertRaises(UnknownFamily) as ctx:
            self.factory.build_checks("schwarzschild")
        self.assertIn("freedman", str(ctx.exception))

    def test_unknown_parameter(self):
        with self.assertRaises(ContractViolation):
            self.factory.build_checks("black_brane", {"mass": 1.0})

    def test_unsupported_perturbation(self):
        with self.assertRaises(ContractViolation):
            self.factory.build_checks("black_brane", perturb={"H": 0.1})

    def test_points_must_be_positive(self):
        with self.assertRaises(ContractViolation):
            self.factory.build_checks("freedman", points=0)

    def test_defaults_are_merged(self):
        merged = self.factory.merged_params(FamilyType.BLACK_BRANE, {"m": 2.0})
        self.assertEqual(merged, {"m": 2.0, "mu": 1})

    def test_check_ids_and_params(self):
        checks = self.factory.build_checks("freedman", {"R": 2.0}, points=1)
        self.assertEqual(
            [c.check_id for c in checks],
            ["freedman/field_equations", "freedman/flux", "freedman/causal_character"],
        )
        for check in checks:
            self.assertEqual(check.params["family"], "freedman")
            self.assertEqual(check.params["R"], 2.0)

    def test_radial_check_ids(self):
        checks = self.factory.build_checks("radial", points=1)
        self.assertEqual(
            [c.check_id for c in checks],
            ["radial/reduced_system", "radial/sugra6d", "radial/conformal_transfer", "radial/selfdual_gerbe", "radial/ode"],
        )

    def test_radial_selfdual_gerbe_passes(self):
        for mu in (1, -1):
            checks = [c for c in self.factory.build_checks("radial", {"mu": mu}, points=2)
                      if c.check_id == "radial/selfdual_gerbe"]
            entries = run_suite(checks, seed=3)
            self.assertEqual(len(entries), 1)
            self.assertTrue(entries[0].passed, entries[0].details)

    def test_black_brane_check_ids(self):
        ids = [c.check_id for c in self.factory.build_checks("black_brane", points=1)]
        self.assertIn("black_brane/omega_transport", ids)
        self.assertIn("black_brane/skew_torsion", ids)

    def test_killing_case_validation(self):
        with self.assertRaises(ContractViolation):
            self.factory.build_checks("killing_warped", {"case": "imag9d"})
        checks = self.factory.build_checks("killing_warped", {"case": "real4d", "branch": "sphere"}, points=1)
        self.assertEqual([c.check_id for c in checks], ["killing_warped/real4d"])


if __name__ == '__main__':
    unittest.main()
