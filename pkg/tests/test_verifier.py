"""
Test suite for the square axioms, constrained forms and normal forms.
"""

import unittest
import sys
import os

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

# Add backend to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'backend'))

from errors import ConstraintViolation, ContractViolation
from multivector import Multivector, Signature, metric_pairing
from spinors import BILINEAR, HERMITIAN, build_rep, random_spinor, solve_admissible, square
from truncated import TruncatedMultivector
from verifier import (
    annihilator,
    check_constrained,
    check_square_axioms,
    decomposability_residual,
    hermitian_bilinear_compatibility,
    isotropic_conjugate,
    module_dimension,
    normal_form,
    spin_equivariance_residual,
)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


class TestSquareAxioms(unittest.TestCase):
    """Deciding whether a form is a square."""

    def setUp(self):
        self.sig = Signature(2, 0)
        self.rep = build_rep(self.sig)
        self.pairing = solve_admissible(self.rep, 1, HERMITIAN)

    def test_module_dimension(self):
        self.assertEqual(module_dimension(Signature(2, 0)), 2)
        self.assertEqual(module_dimension(Signature(3, 0)), 2)
        self.assertEqual(module_dimension(Signature(5, 1)), 8)

    @settings(max_examples=20, deadline=None)
    @given(seed=seeds)
    def test_plane_squares_pass(self, seed):
        rng = np.random.default_rng(seed)
        alpha = square(random_spinor(self.rep, rng), self.rep, self.pairing)
        report = check_square_axioms(alpha, HERMITIAN, s=1, rng=rng, tol=1e-9)
        self.assertEqual(report.verdict, "pass", report.residuals)
        self.assertIn("idempotency", report.residuals)
        self.assertIn("fierz", report.residuals)
        self.assertIn("reality", report.residuals)

    def test_unit_is_not_a_square(self):
        report = check_square_axioms(Multivector.scalar(self.sig, 1.0), HERMITIAN, rng=np.random.default_rng(0), tol=1e-9)
        self.assertEqual(report.verdict, "fail")
        self.assertGreater(report.residuals["idempotency"], 0.1)

    def test_zero_form_is_vanishing(self):
        report = check_square_axioms(Multivector(self.sig), HERMITIAN)
        self.assertEqual(report.verdict, "vanishing")

    def test_contracts(self):
        alpha = Multivector.scalar(self.sig, 1.0)
        with self.assertRaises(ContractViolation):
            check_square_axioms(alpha, "sesquilinear")
        with self.assertRaises(ContractViolation):
            check_square_axioms(alpha, BILINEAR)
        with self.assertRaises(ContractViolation):
            check_square_axioms(Multivector.scalar(Signature(3, 0), 1.0), HERMITIAN)
        with self.assertRaises(ContractViolation):
            check_square_axioms(TruncatedMultivector.one(Signature(3, 0), 1), HERMITIAN, mu=1)


class TestConstrained(unittest.TestCase):
    """Forms 𝔮 with 𝔮⋄α = 0."""

    def test_annihilator_is_constrained(self):
        rng = np.random.default_rng(21)
        for sig in (Signature(2, 0), Signature(3, 1)):
            rep = build_rep(sig)
            pairing = solve_admissible(rep, 1, HERMITIAN) if sig.q == 0 else solve_admissible(rep, 1, BILINEAR)
            eta = random_spinor(rep, rng)
            alpha = square(eta, rep, pairing)
            q = annihilator(rep, eta.components, rng)
            self.assertTrue(check_constrained(q, alpha, rep, eta.components))
            self.assertFalse(check_constrained(Multivector.scalar(sig, 1.0), alpha))

    def test_zero_form_is_trivially_constrained(self):
        sig = Signature(2, 0)
        self.assertTrue(check_constrained(Multivector(sig), Multivector.scalar(sig, 1.0)))


class TestNormalForms(unittest.TestCase):
    """Named components of low-dimensional squares."""

    @settings(max_examples=20, deadline=None)
    @given(seed=seeds)
    def test_euclidean_plane(self, seed):
        rng = np.random.default_rng(seed)
        rep = build_rep(Signature(2, 0))
        pairing = solve_admissible(rep, 1, HERMITIAN)
        form = normal_form(square(random_spinor(rep, rng), rep, pairing), tol=1e-10)
        self.assertTrue(form.passed, form.violations)
        self.assertEqual(set(form.components), {"r", "theta", "f"})

    def test_euclidean_plane_chiral(self):
        rng = np.random.default_rng(22)
        rep = build_rep(Signature(2, 0))
        pairing = solve_admissible(rep, 1, HERMITIAN)
        for mu in (1, -1):
            alpha = square(random_spinor(rep, rng, mu), rep, pairing)
            form = normal_form(alpha, mu=mu, tol=1e-10)
            self.assertTrue(form.passed, form.violations)
            self.assertIn("chiral:f=mu*r", form.residuals)

    @settings(max_examples=20, deadline=None)
    @given(seed=seeds)
    def test_euclidean_three_space(self, seed):
        rng = np.random.default_rng(seed)
        rep = build_rep(Signature(3, 0), 1)
        pairing = solve_admissible(rep, 1, HERMITIAN)
        form = normal_form(square(random_spinor(rep, rng), rep, pairing), tol=1e-10)
        self.assertTrue(form.passed, form.violations)

    def test_lorentzian_four_bilinear_is_null_and_self_dual(self):
        rng = np.random.default_rng(23)
        rep = build_rep(Signature(3, 1))
        for pairing in (solve_admissible(rep, 1, BILINEAR), solve_admissible(rep, -1, BILINEAR)):
            for mu in (1, -1):
                alpha = square(random_spinor(rep, rng, mu), rep, pairing)
                form = normal_form(alpha, BILINEAR, tol=1e-9)
                self.assertTrue(form.passed, form.violations)
                self.assertIn(form.mu, (1, -1))

    def test_require_raises_on_unit(self):
        form = normal_form(Multivector.scalar(Signature(2, 0), 1.0), tol=1e-10)
        self.assertFalse(form.passed)
        with self.assertRaises(ConstraintViolation) as ctx:
            form.require()
        self.assertIn("r^2=f^2+<theta,theta>", ctx.exception.violations)

    def test_unsupported_inputs(self):
        with self.assertRaises(ContractViolation):
            normal_form(Multivector.scalar(Signature(2, 1), 1.0))
        with self.assertRaises(ContractViolation):
            normal_form(Multivector.scalar(Signature(2, 0), 1.0), BILINEAR)


class TestHelpers(unittest.TestCase):
    """Decomposability, isotropic conjugates and equivariance."""

    def test_decomposability(self):
        sig = Signature(4, 0)
        e12 = Multivector.blade(sig, (0, 1))
        e34 = Multivector.blade(sig, (2, 3))
        self.assertLess(decomposability_residual(e12, 2), 1e-12)
        self.assertAlmostEqual(decomposability_residual(e12 + e34, 2), 1.0, places=10)

    def test_isotropic_conjugate(self):
        sig = Signature(3, 1)
        u = Multivector.blade(sig, (0,)) + Multivector.blade(sig, (3,))
        v = isotropic_conjugate(u)
        self.assertLess(abs(metric_pairing(u, v) - 1), 1e-12)
        self.assertLess(abs(metric_pairing(v, v)), 1e-12)
        with self.assertRaises(ContractViolation):
            isotropic_conjugate(Multivector(sig))

    def test_spin_equivariance(self):
        rng = np.random.default_rng(24)
        rep = build_rep(Signature(3, 1))
        pairing = solve_admissible(rep, 1, BILINEAR)
        for _ in range(5):
            eta = random_spinor(rep, rng).components
            self.assertLess(spin_equivariance_residual(rep, pairing, eta, rng), 1e-9)

    def test_compatibility_needs_six_dimensions(self):
        sig = Signature(3, 1)
        one = Multivector.scalar(sig, 1.0)
        with self.assertRaises(ContractViolation):
            hermitian_bilinear_compatibility(one, one)


if __name__ == '__main__':
    unittest.main()
