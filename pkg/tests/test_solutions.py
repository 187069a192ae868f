"""
Test suite for the explicit solution families and their residual checks.
"""

import unittest
import sys
import os

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

# Add backend to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'backend'))

from errors import ContractViolation
from family_factory import SolutionFamilyFactory
from geometry import omega_transport_residual
from multivector import Signature
from radial import RadialParams
from solutions import (
    KILLING_CASES,
    SPHERE,
    FreedmanParams,
    adapted_null_form,
    black_brane_charge,
    black_brane_chart,
    black_brane_data,
    black_brane_harmonic_residual,
    brane_screen_form,
    causal_character,
    freedman_chart,
    freedman_flux,
    freedman_residual,
    killing_warped_chart,
    killing_warped_residuals,
    lift_to_six,
    radial_components,
    selfdual_gerbe_check,
)
from suites import run_suite

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def failed_checks(entries):
    return {entry.check_id: entry.details for entry in entries if not entry.passed}


class TestFreedman(unittest.TestCase):
    """Brinkmann-type Einstein-Maxwell family over a round sphere."""

    def setUp(self):
        self.params = FreedmanParams(R=1.0, c3=1.0)
        self.chart, self.F_A = freedman_chart(self.params)

    def test_parameter_contracts(self):
        with self.assertRaises(ContractViolation):
            FreedmanParams(R=0.0)
        with self.assertRaises(ContractViolation):
            FreedmanParams(mu=0)

    def test_chart_signature(self):
        self.assertEqual(self.chart.signature, Signature(3, 1))

    def test_field_equations_hold(self):
        x = np.array([0.1, -0.2, 1.2, 0.8])
        record = freedman_residual(self.params, self.chart, self.F_A, x)
        self.assertTrue(record.passed, record.residuals)

    def test_perturbed_profile_fails(self):
        chart, F_A = freedman_chart(self.params, perturb=0.1)
        record = freedman_residual(self.params, chart, F_A, np.array([0.1, -0.2, 0.7, 0.8]))
        self.assertFalse(record.passed)
        self.assertGreater(record.residuals["einstein"], 1e-3)

    def test_flux_quantization(self):
        for R, e in ((1.0, 1.0), (2.0, 0.5)):
            result = freedman_flux(FreedmanParams(R=R, e=e, c3=1.0))
            self.assertLess(result["residual"], 1e-10)

    def test_u_is_never_spacelike(self):
        points = self.chart.sample_points(30, np.random.default_rng(0))
        counts = causal_character(self.chart, points)
        self.assertEqual(counts["spacelike"], 0)
        self.assertEqual(sum(counts.values()), 30)

    @settings(max_examples=5, deadline=None)
    @given(seed=seeds)
    def test_random_family_constants(self, seed):
        rng = np.random.default_rng(seed)
        c1, c2, c3 = rng.uniform(-1.0, 1.0, size=3)
        params = FreedmanParams(
            R=rng.uniform(0.8, 1.5), c1=c1, c2=c2, c3=c3, c=rng.uniform(0.1, 1.0),
            mu=int(rng.choice([-1, 1])), e=rng.uniform(0.8, 1.5),
        )
        chart, F_A = freedman_chart(params)
        points = chart.sample_points(3, rng)
        for x in points:
            record = freedman_residual(params, chart, F_A, x)
            self.assertTrue(record.passed, (params, record.residuals))
        self.assertEqual(causal_character(chart, points)["timelike"], 3)

        bound = (c1 ** 2 + c2 ** 2 + c3 ** 2) / params.R ** 2
        spacelike = FreedmanParams(R=params.R, c1=c1, c2=c2, c3=c3, c=-(bound + 0.5), mu=params.mu, e=params.e)
        chart, _ = freedman_chart(spacelike)
        self.assertEqual(causal_character(chart, points)["spacelike"], 3)


class TestBlackBrane(unittest.TestCase):
    """Self-dual string black brane."""

    def test_mass_must_be_positive(self):
        with self.assertRaises(ContractViolation):
            black_brane_data(0.0)

    def test_harmonic_warp(self):
        for r in (0.7, 1.0, 1.8):
            self.assertLess(black_brane_harmonic_residual(1.0, r), 1e-6)

    def test_charge(self):
        result = black_brane_charge(1.5)
        self.assertAlmostEqual(result["e"], 3.0, places=8)
        self.assertLess(result["residual"], 1e-8)

    def test_lift_needs_sign(self):
        with self.assertRaises(ContractViolation):
            lift_to_six(black_brane_data(1.0), 0)

    def test_all_checks_pass(self):
        checks = SolutionFamilyFactory().build_checks("black_brane", points=2)
        entries = run_suite(checks, seed=0)
        self.assertEqual(len(entries), 9)
        self.assertEqual(failed_checks(entries), {})

    def test_screen_form_is_transported(self):
        rng = np.random.default_rng(5)
        for mu in (1, -1):
            data = black_brane_data(1.0, mu)
            chart, H = black_brane_chart(1.0, mu)
            u_field = adapted_null_form(data, chart.signature)
            omega = brane_screen_form(data, mu, chart.signature)
            wrong = brane_screen_form(data, -mu, chart.signature)
            for x in chart.sample_points(2, rng):
                record = omega_transport_residual(omega, u_field, H, chart, x)
                self.assertTrue(record.passed, (mu, record.residuals))
                self.assertFalse(omega_transport_residual(wrong, u_field, H, chart, x).passed)


class TestFamilies(unittest.TestCase):
    """Residual suites of the registered families."""

    def setUp(self):
        self.factory = SolutionFamilyFactory()

    def test_freedman_suite(self):
        entries = run_suite(self.factory.build_checks("freedman", points=3), seed=1)
        self.assertEqual(failed_checks(entries), {})
        character = next(e for e in entries if e.check_id == "freedman/causal_character")
        self.assertIn("causal_character", character.details)

    def test_freedman_suite_detects_perturbation(self):
        entries = run_suite(self.factory.build_checks("freedman", points=3, perturb={"H": 0.1}), seed=1)
        self.assertIn("freedman/field_equations", failed_checks(entries))
        self.assertEqual(entries[0].params["perturb"], {"H": 0.1})

    def test_radial_suite(self):
        entries = run_suite(self.factory.build_checks("radial", points=2), seed=2)
        self.assertEqual(failed_checks(entries), {})

    def test_radial_gerbe_components(self):
        params = RadialParams(lam=-0.5, e=1.0, c=1.0, m1=0.5, m2=1.0, rho_star=-1.0)
        rng = np.random.default_rng(7)
        for mu in (1, -1):
            components = radial_components(params, mu)
            for x in components.chart().sample_points(2, rng):
                record = selfdual_gerbe_check(components, x, mu)
                self.assertTrue(record.passed, (mu, record.residuals))
                flipped = selfdual_gerbe_check(components, x, -mu)
                self.assertGreater(flipped.residuals["condition_1"], 1e-3)


class TestKillingWarped(unittest.TestCase):
    """Warped products carrying Killing spinors."""

    def test_every_case_satisfies_its_killing_system(self):
        rng = np.random.default_rng(3)
        for case in KILLING_CASES:
            family = killing_warped_chart(case, 0.5)
            for x in family.chart.sample_points(2, rng):
                record = killing_warped_residuals(family, x)
                self.assertTrue(record.passed, f"{case}: {record.residuals}")

    def test_sphere_branch(self):
        rng = np.random.default_rng(4)
        for case in ("real4d", "imag4d_qpos"):
            family = killing_warped_chart(case, 0.5, branch=SPHERE)
            x = family.chart.sample_points(1, rng)[0]
            record = killing_warped_residuals(family, x)
            self.assertTrue(record.passed, f"{case}: {record.residuals}")

    def test_case_contracts(self):
        with self.assertRaises(ContractViolation):
            killing_warped_chart("imag5d", 0.5)
        with self.assertRaises(ContractViolation):
            killing_warped_chart("imag3d", -0.5)
        with self.assertRaises(ContractViolation):
            killing_warped_chart("imag2d", 0.5, branch=SPHERE)

    def test_imaginary_cases_carry_squares(self):
        self.assertIsNotNone(killing_warped_chart("imag3d", 0.5).alpha)
        self.assertIsNone(killing_warped_chart("real4d", 0.5).alpha)


if __name__ == '__main__':
    unittest.main()
