"""
Test suite for the exterior algebra with the geometric product.
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
from multivector import (
    Multivector,
    Signature,
    expansion_sign,
    exterior_power,
    generalized_product,
    geometric_product,
    hodge_star,
    involution,
    metric_pairing,
    random_multivector,
    transform,
    volume_form,
    volume_square_sign,
    wedge,
)

SIGNATURES = [Signature(p, q) for p, q in ((1, 0), (2, 0), (1, 1), (3, 0), (2, 1), (3, 1), (4, 0), (2, 2), (5, 1))]
seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
signatures = st.sampled_from(SIGNATURES)


def close(a: Multivector, b: Multivector, scale: float = 1.0, tol: float = 1e-12) -> bool:
    return (a - b).max_abs() <= tol * max(scale, 1.0)


class TestSignature(unittest.TestCase):
    """Signature validation."""

    def test_empty_signature_rejected(self):
        with self.assertRaises(ContractViolation):
            Signature(0, 0)

    def test_dimension_cap(self):
        with self.assertRaises(ContractViolation):
            Signature(9, 0)
        self.assertEqual(Signature(4, 4).dim, 8)

    def test_negative_counts_rejected(self):
        with self.assertRaises(ContractViolation):
            Signature(-1, 2)

    def test_eps_lists_spacelike_first(self):
        np.testing.assert_array_equal(Signature(2, 1).eps, [1, 1, -1])


class TestGeometricProduct(unittest.TestCase):
    """Closed-form products in low dimension."""

    def test_euclidean_plane(self):
        sig = Signature(2, 0)
        e1 = Multivector.blade(sig, (0,))
        e2 = Multivector.blade(sig, (1,))
        self.assertTrue(close(e1 * e1, Multivector.scalar(sig, 1.0)))
        self.assertTrue(close(e1 * e2, Multivector.blade(sig, (0, 1))))
        self.assertTrue(close(e2 * e1, Multivector.blade(sig, (0, 1), -1.0)))
        e12 = Multivector.blade(sig, (0, 1))
        self.assertTrue(close(e12 * e12, Multivector.scalar(sig, -1.0)))

    def test_timelike_direction_squares_to_minus_one(self):
        sig = Signature(1, 1)
        e2 = Multivector.blade(sig, (1,))
        self.assertTrue(close(e2 * e2, Multivector.scalar(sig, -1.0)))

    def test_blade_sign_for_unsorted_indices(self):
        sig = Signature(3, 0)
        self.assertTrue(close(Multivector.blade(sig, (2, 0)), -Multivector.blade(sig, (0, 2))))
        self.assertTrue(Multivector.blade(sig, (1, 1)).is_zero())

    def test_signature_mismatch(self):
        a = Multivector.scalar(Signature(2, 0))
        b = Multivector.scalar(Signature(1, 1))
        with self.assertRaises(ContractViolation):
            geometric_product(a, b)
        with self.assertRaises(ContractViolation):
            a + b

    def test_orientation_is_part_of_signature(self):
        a = Multivector.scalar(Signature(2, 0))
        b = Multivector.scalar(Signature(2, 0, -1))
        with self.assertRaises(ContractViolation):
            wedge(a, b)

    def test_generalized_product_range(self):
        sig = Signature(2, 0)
        a = Multivector.scalar(sig)
        with self.assertRaises(ContractViolation):
            generalized_product(a, a, 3)

    @settings(max_examples=25, deadline=None)
    @given(sig=signatures, seed=seeds)
    def test_associativity(self, sig, seed):
        rng = np.random.default_rng(seed)
        a, b, c = (random_multivector(sig, rng) for _ in range(3))
        lhs = (a * b) * c
        rhs = a * (b * c)
        self.assertTrue(close(lhs, rhs, a.max_abs() * b.max_abs() * c.max_abs(), 1e-11))

    @settings(max_examples=25, deadline=None)
    @given(sig=signatures, seed=seeds)
    def test_graded_expansion(self, sig, seed):
        rng = np.random.default_rng(seed)
        ka, kb = (int(k) for k in rng.integers(0, sig.dim + 1, size=2))
        a = random_multivector(sig, rng, grade=ka)
        b = random_multivector(sig, rng, grade=kb)
        total = Multivector(sig)
        for k in range(sig.dim + 1):
            total = total + expansion_sign(k, ka) * generalized_product(a, b, k)
        self.assertTrue(close(a * b, total, a.max_abs() * b.max_abs(), 1e-11))

    def test_generalized_product_zero_is_wedge(self):
        rng = np.random.default_rng(3)
        sig = Signature(3, 1)
        a, b = random_multivector(sig, rng), random_multivector(sig, rng)
        self.assertTrue(close(generalized_product(a, b, 0), wedge(a, b)))

    def test_full_contraction_is_metric_pairing(self):
        rng = np.random.default_rng(4)
        sig = Signature(2, 1)
        for k in range(sig.dim + 1):
            a = random_multivector(sig, rng, grade=k)
            b = random_multivector(sig, rng, grade=k)
            self.assertAlmostEqual(generalized_product(a, b, k).scalar_part, metric_pairing(a, b), places=10)

    @settings(max_examples=25, deadline=None)
    @given(sig=signatures, seed=seeds)
    def test_generalized_product_symmetry(self, sig, seed):
        rng = np.random.default_rng(seed)
        ka, kb = (int(k) for k in rng.integers(0, sig.dim + 1, size=2))
        k = int(rng.integers(0, min(ka, kb) + 1))
        a = random_multivector(sig, rng, grade=ka)
        b = random_multivector(sig, rng, grade=kb)
        sign = (-1) ** ((ka - k) * (kb - k))
        self.assertTrue(close(generalized_product(a, b, k), sign * generalized_product(b, a, k), a.max_abs() * b.max_abs()))

    @settings(max_examples=25, deadline=None)
    @given(sig=signatures, seed=seeds)
    def test_top_contraction_with_hodge_dual(self, sig, seed):
        rng = np.random.default_rng(seed)
        ka = int(rng.integers(0, sig.dim + 1))
        kb = int(rng.integers(0, sig.dim - ka + 1))
        a = random_multivector(sig, rng, grade=ka)
        b = random_multivector(sig, rng, grade=kb)
        lhs = generalized_product(a, hodge_star(b), ka)
        self.assertTrue(close(lhs, hodge_star(wedge(b, a)), a.max_abs() * b.max_abs()))


class TestHodgeAndVolume(unittest.TestCase):
    """Hodge operator and products with the volume form."""

    def test_plane_hodge(self):
        sig = Signature(2, 0)
        e1 = Multivector.blade(sig, (0,))
        e2 = Multivector.blade(sig, (1,))
        self.assertTrue(close(hodge_star(e1), e2))
        self.assertTrue(close(hodge_star(e2), -e1))
        self.assertTrue(close(hodge_star(Multivector.scalar(sig)), volume_form(sig)))

    def test_volume_products_in_plane(self):
        sig = Signature(2, 0)
        nu = volume_form(sig)
        e1 = Multivector.blade(sig, (0,))
        e2 = Multivector.blade(sig, (1,))
        self.assertTrue(close(e1 * nu, e2))
        self.assertTrue(close(nu * e1, -e2))

    @settings(max_examples=25, deadline=None)
    @given(sig=signatures, seed=seeds)
    def test_hodge_defining_identity(self, sig, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(0, sig.dim + 1))
        a = random_multivector(sig, rng, grade=k)
        b = random_multivector(sig, rng, grade=k)
        expected = metric_pairing(a, b) * volume_form(sig)
        self.assertTrue(close(wedge(a, hodge_star(b)), expected, a.max_abs() * b.max_abs()))

    @settings(max_examples=25, deadline=None)
    @given(sig=signatures, seed=seeds)
    def test_volume_identities(self, sig, seed):
        rng = np.random.default_rng(seed)
        a = random_multivector(sig, rng)
        nu = volume_form(sig)
        tau = involution(a, "reversion")
        left = involution(a, "both") if (sig.dim - 1) % 2 else tau
        self.assertTrue(close(a * nu, hodge_star(tau), a.max_abs()))
        self.assertTrue(close(nu * a, hodge_star(left), a.max_abs()))

    def test_volume_square_table(self):
        for sig in SIGNATURES:
            nu = volume_form(sig)
            self.assertAlmostEqual((nu * nu).scalar_part, volume_square_sign(sig), places=12, msg=str(sig))

    def test_orientation_flips_volume(self):
        sig = Signature(3, 0, -1)
        self.assertEqual(volume_form(sig).coeffs[-1], -1)


class TestInvolutionsAndTransforms(unittest.TestCase):
    """Grade involutions, exterior powers and serialization."""

    def test_involution_signs_by_grade(self):
        sig = Signature(4, 0)
        for k, (pi, tau) in enumerate(((1, 1), (-1, 1), (1, -1), (-1, -1), (1, 1))):
            a = Multivector(sig, np.where(np.array([bin(m).count("1") for m in range(16)]) == k, 1.0, 0.0))
            self.assertTrue(close(involution(a, "parity"), pi * a))
            self.assertTrue(close(involution(a, "reversion"), tau * a))
            self.assertTrue(close(involution(a, "both"), pi * tau * a))

    def test_unknown_involution(self):
        with self.assertRaises(ContractViolation):
            involution(Multivector.scalar(Signature(1, 0)), "mirror")

    def test_exterior_power_is_algebra_map_for_orthogonal_change(self):
        sig = Signature(3, 0)
        angle = 0.7
        rotation = np.array([[np.cos(angle), np.sin(angle), 0], [-np.sin(angle), np.cos(angle), 0], [0, 0, 1]])
        power = exterior_power(rotation, sig)
        rng = np.random.default_rng(5)
        a, b = random_multivector(sig, rng), random_multivector(sig, rng)
        lhs = transform(a * b, power)
        rhs = transform(a, power) * transform(b, power)
        self.assertTrue(close(lhs, rhs, a.max_abs() * b.max_abs()))

    def test_tensor_conversion(self):
        sig = Signature(3, 0)
        a = Multivector.blade(sig, (0, 2), 2.0)
        tensor = a.to_tensor(2)
        self.assertEqual(tensor[0, 2], 2.0)
        self.assertEqual(tensor[2, 0], -2.0)
        self.assertTrue(close(Multivector.from_tensor(sig, tensor), a))

    def test_json_preserves_signature(self):
        sig = Signature(2, 1, -1)
        a = random_multivector(sig, np.random.default_rng(6))
        b = Multivector.from_json(a.to_json())
        self.assertEqual(b.sig, sig)
        self.assertTrue(close(a, b))


if __name__ == '__main__':
    unittest.main()
