"""
Test suite for chart calculus: curvature, Hodge operators and exterior derivatives.
"""

import unittest
import sys
import os

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

# Add backend to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'backend'))

from errors import ContractViolation, DegenerateMetric
from geometry import (
    MetricChart,
    brinkmann_chart,
    brinkmann_ricci_uu,
    christoffel,
    coframe_at,
    covariant_derivative_form,
    curvature,
    einstein_divergence,
    einstein_maxwell_residual,
    exterior_derivative,
    form_pairing,
    form_square,
    function_gradient,
    hodge_field,
    kundt_chart,
    kundt_christoffel,
    kundt_ricci_transverse,
    kundt_ricci_uu,
    kundt_ricci_uv,
    laplacian,
    metric_at,
    metric_volume,
    orthonormal_coframe,
    parallel_square_residual,
    torsion_connection,
    zero_connection,
)
from multivector import Multivector, Signature, hodge_star, random_multivector, volume_form, wedge
from solutions import embed

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def sphere2():
    return MetricChart(
        name="S2",
        signature=Signature(2, 0),
        metric=lambda x: np.diag([1.0, np.sin(x[0]) ** 2]),
        domain=((0.3, 2.8), (0.0, 2 * np.pi)),
        coordinates=("theta", "phi"),
    )


def sphere3():
    def metric(x):
        s1 = np.sin(x[0]) ** 2
        return np.diag([1.0, s1, s1 * np.sin(x[1]) ** 2])

    return MetricChart(
        name="S3",
        signature=Signature(3, 0),
        metric=metric,
        domain=((0.4, 2.7), (0.4, 2.7), (0.0, 2 * np.pi)),
    )


def flat(p, q):
    eta = np.diag([1.0] * p + [-1.0] * q)
    return MetricChart(
        name=f"flat{p}{q}",
        signature=Signature(p, q),
        metric=lambda x: eta,
        domain=tuple((-1.0, 1.0) for _ in range(p + q)),
        metric_derivative=lambda x: np.zeros((p + q, p + q, p + q)),
    )


def conformal4():
    return MetricChart(
        name="conf4",
        signature=Signature(4, 0),
        metric=lambda x: np.exp(0.3 * x[0] - 0.2 * x[2] ** 2) * np.eye(4),
        domain=tuple((-1.0, 1.0) for _ in range(4)),
    )


def kundt_cases():
    """(transverse, ℋ, ℱ, x) with non-constant profile and dilaton."""
    return [
        (
            flat(4, 0),
            lambda y: 0.3 * y[0] ** 2 + 0.2 * y[1] * y[2] + 0.5,
            lambda y: 0.4 * y[0] - 0.3 * y[3] ** 2,
            np.array([0.1, -0.2, 0.3, -0.4, 0.5, 0.2]),
        ),
        (
            sphere2(),
            lambda y: 0.3 + 0.2 * np.cos(y[0]) * np.sin(y[1]),
            lambda y: 0.3 * np.sin(y[0]) - 0.1 * np.cos(y[1]),
            np.array([0.2, 0.1, 1.1, 0.7]),
        ),
        (
            conformal4(),
            lambda y: 0.4 - 0.2 * y[1] * y[3],
            lambda y: 0.2 * y[0] * y[2] + 0.1 * y[1],
            np.array([-0.1, 0.3, 0.2, -0.3, 0.4, 0.1]),
        ),
    ]


def null_pair(chart, profile, dilaton, x):
    """u = e^ℱdu and v = dv + ½ℋe^{-ℱ}du, null with ⟨u, v⟩ = 1."""
    sig = chart.signature
    F, H = dilaton(x[2:]), profile(x[2:])
    u = Multivector.blade(sig, (0,), np.exp(F))
    v = Multivector.blade(sig, (1,)) + Multivector.blade(sig, (0,), 0.5 * H * np.exp(-F))
    return u, v


class TestCharts(unittest.TestCase):
    """Chart validation and metric evaluation."""

    def test_domain_length_must_match(self):
        with self.assertRaises(ContractViolation):
            MetricChart("bad", Signature(2, 0), lambda x: np.eye(2), ((0.0, 1.0),))

    def test_empty_interval(self):
        with self.assertRaises(ContractViolation):
            MetricChart("bad", Signature(1, 0), lambda x: np.eye(1), ((1.0, 1.0),))

    def test_singular_metric(self):
        chart = MetricChart("zero", Signature(2, 0), lambda x: np.zeros((2, 2)), ((0.0, 1.0), (0.0, 1.0)))
        with self.assertRaises(DegenerateMetric):
            metric_at(chart, [0.5, 0.5])

    def test_asymmetric_metric(self):
        chart = MetricChart("skew", Signature(2, 0), lambda x: np.array([[1.0, 0.5], [0.0, 1.0]]),
                            ((0.0, 1.0), (0.0, 1.0)))
        with self.assertRaises(DegenerateMetric):
            metric_at(chart, [0.5, 0.5])

    def test_sample_points_stay_inside(self):
        chart = sphere2()
        points = chart.sample_points(50, np.random.default_rng(0))
        self.assertEqual(points.shape, (50, 2))
        self.assertTrue(all(chart.contains(x, chart.margin) for x in points))

    def test_declared_signature_is_checked(self):
        chart = MetricChart("wrong", Signature(2, 0), lambda x: np.diag([1.0, -1.0]), ((0.0, 1.0), (0.0, 1.0)))
        with self.assertRaises(DegenerateMetric):
            orthonormal_coframe(chart, [0.5, 0.5])


class TestCurvature(unittest.TestCase):
    """Curvature of round spheres and flat space."""

    @settings(max_examples=10, deadline=None)
    @given(seed=seeds)
    def test_two_sphere_scalar_curvature(self, seed):
        chart = sphere2()
        x = chart.sample_points(1, np.random.default_rng(seed))[0]
        self.assertAlmostEqual(curvature(chart, x).scalar, 2.0, places=6)

    def test_three_sphere_einstein_tensor(self):
        chart = sphere3()
        x = np.array([1.1, 1.3, 0.7])
        curv = curvature(chart, x)
        self.assertAlmostEqual(curv.scalar, 6.0, places=6)
        np.testing.assert_allclose(curv.einstein, -curv.metric, atol=1e-6)

    def test_bianchi_identity(self):
        chart = sphere3()
        self.assertLess(np.max(np.abs(einstein_divergence(chart, [1.2, 0.9, 2.0]))), 1e-5)

    def test_flat_space_is_flat(self):
        chart = flat(3, 1)
        curv = curvature(chart, np.zeros(4))
        self.assertEqual(np.max(np.abs(curv.riemann)), 0.0)

    def test_laplacian_of_first_harmonic(self):
        chart = sphere2()
        x = np.array([1.0, 0.5])
        self.assertAlmostEqual(laplacian(lambda y: np.cos(y[0]), chart, x), -2 * np.cos(1.0), places=6)

    def test_vacuum_residual_in_flat_space(self):
        chart = flat(3, 1)
        zero = lambda x: Multivector(chart.signature)
        record = einstein_maxwell_residual(chart, zero, 0.0, 1.0, np.zeros(4))
        self.assertTrue(record.passed)


class TestForms(unittest.TestCase):
    """Hodge operators, exterior derivatives and coframes."""

    @settings(max_examples=10, deadline=None)
    @given(seed=seeds)
    def test_flat_hodge_matches_algebraic(self, seed):
        rng = np.random.default_rng(seed)
        for p, q in ((3, 0), (3, 1)):
            chart = flat(p, q)
            a = random_multivector(chart.signature, rng)
            gap = (hodge_field(a, chart, np.zeros(p + q)) - hodge_star(a)).max_abs()
            self.assertLess(gap, 1e-12 * max(1.0, a.max_abs()))

    def test_exterior_derivative(self):
        chart = flat(2, 0)
        sig = chart.signature
        field = lambda x: Multivector.vector(sig, [0.0, x[0]])
        d = exterior_derivative(field, chart, np.array([0.2, -0.4]))
        self.assertLess((d - Multivector.blade(sig, (0, 1))).max_abs(), 1e-9)

    def test_exact_forms_are_closed(self):
        chart = sphere2()
        sig = chart.signature
        df = lambda x: Multivector.vector(sig, [np.cos(x[0]) * np.sin(x[1]), np.sin(x[0]) * np.cos(x[1])])
        self.assertLess(exterior_derivative(df, chart, np.array([1.0, 2.0])).max_abs(), 1e-9)

    def test_form_square_of_area_form(self):
        chart = flat(2, 0)
        F = Multivector.blade(chart.signature, (0, 1))
        np.testing.assert_allclose(form_square(F, 2, chart, np.zeros(2)).real, np.eye(2), atol=1e-14)

    def test_coframe_is_orthonormal(self):
        chart = sphere2()
        x = np.array([0.9, 1.0])
        frame = coframe_at(chart, x)
        _, ginv = metric_at(chart, x)
        np.testing.assert_allclose(frame.matrix @ ginv @ frame.matrix.T, np.eye(2), atol=1e-12)
        a = random_multivector(chart.signature, np.random.default_rng(1))
        self.assertLess((frame.from_frame(frame.to_frame(a)) - a).max_abs(), 1e-12)


class TestKundtCharts(unittest.TestCase):
    """Null-coordinate charts over a transverse chart."""

    def test_signature_and_coordinates(self):
        chart = kundt_chart(flat(2, 0), lambda y: 0.0, lambda y: 0.0)
        self.assertEqual(chart.signature, Signature(3, 1))
        self.assertEqual(chart.coordinates[:2], ("u", "v"))

    def test_pp_wave_ricci(self):
        transverse = flat(2, 0)
        profile = lambda y: y[0] ** 2 + y[1] ** 2
        chart = brinkmann_chart(transverse, profile)
        x = np.array([0.1, 0.2, 0.3, -0.2])
        self.assertAlmostEqual(brinkmann_ricci_uu(transverse, profile, None, x[2:]), -2.0, places=6)
        self.assertAlmostEqual(curvature(chart, x).ricci[0, 0], -2.0, places=5)

    def test_closed_form_ricci(self):
        for transverse, profile, dilaton, x in kundt_cases():
            chart = kundt_chart(transverse, profile, dilaton)
            ricci = curvature(chart, x).ricci
            y = x[2:]
            self.assertAlmostEqual(ricci[0, 0], kundt_ricci_uu(transverse, profile, dilaton, y), delta=1e-5)
            self.assertAlmostEqual(ricci[0, 1], kundt_ricci_uv(transverse, dilaton, y), delta=1e-5)
            self.assertAlmostEqual(ricci[1, 1], 0.0, delta=1e-5)
            np.testing.assert_allclose(ricci[2:, 2:], kundt_ricci_transverse(transverse, dilaton, y), atol=1e-5)

    def test_closed_form_christoffel(self):
        for transverse, profile, dilaton, x in kundt_cases():
            chart = kundt_chart(transverse, profile, dilaton)
            closed = kundt_christoffel(transverse, profile, dilaton, x[2:])
            np.testing.assert_allclose(christoffel(chart, x), closed, atol=1e-8)
            dF = function_gradient(dilaton, transverse, x[2:])
            np.testing.assert_allclose(closed[1, 1, 2:], 0.5 * dF, atol=1e-12)

    def test_hodge_on_null_pair(self):
        rng = np.random.default_rng(3)
        for transverse, profile, dilaton, x in kundt_cases():
            chart = kundt_chart(transverse, profile, dilaton)
            sig, y = chart.signature, x[2:]
            u, v = null_pair(chart, profile, dilaton, x)
            nu_h = embed(metric_volume(transverse, y), sig)
            self.assertAlmostEqual(form_pairing(u, v, chart, x).real, 1.0, places=10)
            self.assertAlmostEqual(form_pairing(v, v, chart, x).real, 0.0, places=10)
            self.assertLess((hodge_field(u, chart, x) + wedge(u, nu_h)).max_abs(), 1e-9)
            self.assertLess((hodge_field(wedge(u, v), chart, x) + nu_h).max_abs(), 1e-9)
            for k in range(transverse.dim + 1):
                a = random_multivector(transverse.signature, rng, grade=k, real=True)
                a_lift = embed(a, sig)
                star_a = embed(hodge_field(a, transverse, y), sig)
                gap = hodge_field(wedge(u, a_lift), chart, x) - (-1) ** (k + 1) * wedge(u, star_a)
                self.assertLess(gap.max_abs(), 1e-9, (transverse.name, k))
                gap = hodge_field(wedge(wedge(u, v), a_lift), chart, x) + star_a
                self.assertLess(gap.max_abs(), 1e-9, (transverse.name, k))

    @settings(max_examples=5, deadline=None)
    @given(seed=seeds)
    def test_double_hodge_sign(self, seed):
        rng = np.random.default_rng(seed)
        for transverse, profile, dilaton, x in kundt_cases()[1:]:
            chart = kundt_chart(transverse, profile, dilaton)
            d, q = chart.dim, chart.signature.q
            for k in range(d + 1):
                a = random_multivector(chart.signature, rng, grade=k)
                twice = hodge_field(hodge_field(a, chart, x), chart, x)
                self.assertLess((twice - (-1) ** (k * (d - k) + q) * a).max_abs(), 1e-9 * max(1.0, a.max_abs()))


class TestCovariantDerivative(unittest.TestCase):
    """Levi-Civita derivative of form fields."""

    def setUp(self):
        self.chart = sphere3()
        sig = self.chart.signature
        self.x = np.array([1.0, 1.2, 0.6])
        self.one_form = lambda y: Multivector.vector(sig, [np.sin(y[1]), y[0] * np.cos(y[2]), 0.3])
        self.other = lambda y: Multivector.vector(sig, [y[2], np.cos(y[0]) * y[1], np.sin(y[0] * y[2])])
        self.two_form = lambda y: (
            Multivector.blade(sig, (0, 1), np.cos(y[0])) + Multivector.blade(sig, (1, 2), y[1] * y[2])
        )

    def derivative(self, field, w):
        return covariant_derivative_form(field, self.chart, self.x, w)

    def test_volume_form_is_parallel(self):
        volume = lambda y: metric_volume(self.chart, y)
        for w in np.eye(3):
            self.assertLess(self.derivative(volume, w).max_abs(), 1e-8)

    def test_leibniz_rule(self):
        w = np.array([0.3, -1.0, 0.5])
        product = lambda y: wedge(self.one_form(y), self.two_form(y))
        expected = (
            wedge(self.derivative(self.one_form, w), self.two_form(self.x))
            + wedge(self.one_form(self.x), self.derivative(self.two_form, w))
        )
        self.assertLess((self.derivative(product, w) - expected).max_abs(), 1e-8)

    def test_metric_compatibility(self):
        w = np.array([-0.4, 0.7, 1.1])
        for a, b in ((self.one_form, self.other), (self.two_form, self.two_form)):
            pairing = lambda y: form_pairing(a(y), b(y), self.chart, y).real
            lhs = function_gradient(pairing, self.chart, self.x) @ w
            rhs = (
                form_pairing(self.derivative(a, w), b(self.x), self.chart, self.x)
                + form_pairing(a(self.x), self.derivative(b, w), self.chart, self.x)
            ).real
            self.assertAlmostEqual(lhs, rhs, delta=1e-8)

    def test_azimuthal_form_on_two_sphere(self):
        chart = sphere2()
        sig = chart.signature
        x = np.array([0.9, 1.4])
        dphi = lambda y: Multivector.blade(sig, (1,))
        nabla = covariant_derivative_form(dphi, chart, x, [1.0, 0.0])
        self.assertLess((nabla + Multivector.blade(sig, (1,), 1 / np.tan(x[0]))).max_abs(), 1e-8)

    def test_radial_form_on_warped_plane(self):
        chart = MetricChart(
            "warped2", Signature(2, 0), lambda x: np.diag([1.0, (1 + x[0] ** 2) ** 2]), ((0.2, 1.5), (0.0, 2 * np.pi))
        )
        sig = chart.signature
        x = np.array([0.8, 2.0])
        dr = lambda y: Multivector.blade(sig, (0,))
        nabla = covariant_derivative_form(dr, chart, x, [0.0, 1.0])
        warp, slope = 1 + x[0] ** 2, 2 * x[0]
        self.assertLess((nabla - Multivector.blade(sig, (1,), warp * slope)).max_abs(), 1e-8)


class TestParallelSquares(unittest.TestCase):
    """The first-order system ∇α = 𝔞⋄α + α⋄τ(𝔞̄) with torsion and zero symbols."""

    def test_torsion_commutes_with_even_center(self):
        chart = flat(5, 1)
        sig = chart.signature
        H = Multivector.blade(sig, (0, 1, 2)) + Multivector.blade(sig, (3, 4, 5), 0.5)
        connection = torsion_connection(lambda x: H)
        x = np.full(6, 0.1)
        central = lambda y: Multivector.scalar(sig, 1.0) + volume_form(sig)
        record = parallel_square_residual(central, connection, (), chart, x)
        self.assertTrue(record.passed, record.residuals)

        vector = lambda y: Multivector.blade(sig, (0,))
        record = parallel_square_residual(vector, connection, (), chart, x)
        self.assertFalse(record.passed)
        self.assertGreater(record.residuals[f"nabla_{chart.coordinate_name(1)}"], 0.1)

    def test_zero_symbol_needs_parallel_form(self):
        chart = flat(3, 1)
        sig = chart.signature
        x = np.array([0.2, -0.1, 0.3, 0.4])
        constant = lambda y: Multivector.scalar(sig, 0.5) + Multivector.blade(sig, (0, 3), 0.5)
        record = parallel_square_residual(constant, zero_connection(chart), (), chart, x)
        self.assertTrue(record.passed, record.residuals)

        growing = lambda y: Multivector.blade(sig, (0, 3), y[0])
        record = parallel_square_residual(growing, zero_connection(chart), (), chart, x)
        self.assertFalse(record.passed)


if __name__ == '__main__':
    unittest.main()
