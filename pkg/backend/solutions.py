"""
Closed-form solution families and the wave-front reduction checks.

Constructors return a MetricChart plus the form fields that the field-equation
residuals of `geometry` consume. Six-dimensional families are built from
four-dimensional wave-front data (𝔥, H_b, ℱ, ℋ) lifted to a non-twisting
stationary Kundt chart with transverse metric h = e^{-ℱ}𝔥.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Optional, Tuple

import numpy as np
from scipy.integrate import dblquad, tplquad

from errors import ContractViolation
from geometry import (
    GEOMETRY_TOL,
    FormField,
    MetricChart,
    brinkmann_chart,
    coframe_at,
    covariant_derivatives,
    curvature,
    einstein_maxwell_residual,
    exterior_derivative,
    form_norm_sq,
    form_square,
    function_gradient,
    gradient,
    hessian,
    hodge_field,
    killing_connection,
    kundt_chart,
    laplacian,
    metric_at,
    parallel_square_residual,
    partial,
    second_partials,
)
from multivector import Multivector, Signature, contract, wedge
from radial import DF as DF_SLOT
from radial import F as F_SLOT
from radial import K as K_SLOT
from radial import HBAR, RadialParams, closed_form_state, rho_star_from_radius, warp_profile
from reports import ResidualRecord
from spinors import HERMITIAN
from verifier import normal_form

logger = logging.getLogger(__name__)

POLE_MARGIN = 0.3
AZIMUTH_MARGIN = 0.1
NULL_DOMAIN = ((-1.0, 1.0), (-1.0, 1.0))
FRAK = "frak"
H_FRAME = "h"


def _zero(*args) -> float:
    return 0.0


def embed(a: Multivector, sig: Signature, offset: int = 2) -> Multivector:
    """Push a transverse form into the (u, v, y) coframe by shifting blade masks."""
    if a.sig.dim + offset != sig.dim:
        raise ContractViolation(f"Cannot embed a form of {a.sig} into {sig} with offset {offset}")
    coeffs = np.zeros(sig.size, dtype=complex)
    coeffs[np.arange(a.sig.size) << offset] = a.coeffs
    return Multivector(sig, coeffs)


# -- transverse charts -----------------------------------------------------


def flat_chart(dim: int, domain=None, q: int = 0, name: str = "flat") -> MetricChart:
    domain = tuple(domain) if domain is not None else tuple((-1.0, 1.0) for _ in range(dim))
    diagonal = np.diag([1.0] * (dim - q) + [-1.0] * q)
    return MetricChart(
        name=name,
        signature=Signature(dim - q, q),
        metric=lambda x: diagonal.copy(),
        domain=domain,
        metric_derivative=lambda x: np.zeros((dim, dim, dim)),
        description=f"flat chart of signature ({dim - q},{q})",
    )


def sphere_chart(radius: float = 1.0, name: str = "sphere") -> MetricChart:
    """Round S² of the given radius in (θ, φ) away from the poles."""
    if not radius > 0:
        raise ContractViolation(f"Sphere radius must be positive, got {radius}")
    r2 = radius * radius

    def metric(y):
        return r2 * np.diag([1.0, np.sin(y[0]) ** 2])

    def derivative(y):
        out = np.zeros((2, 2, 2))
        out[0, 1, 1] = r2 * np.sin(2 * y[0])
        return out

    return MetricChart(
        name=name,
        signature=Signature(2, 0),
        metric=metric,
        domain=((POLE_MARGIN, np.pi - POLE_MARGIN), (-np.pi + AZIMUTH_MARGIN, np.pi - AZIMUTH_MARGIN)),
        metric_derivative=derivative,
        coordinates=("theta", "phi"),
        description=f"round sphere of radius {radius}",
    )


def s3_chart(name: str = "s3") -> MetricChart:
    """Unit S³ in hyperspherical angles (χ, θ, φ)."""

    def metric(y):
        s_chi, s_th = np.sin(y[0]) ** 2, np.sin(y[1]) ** 2
        return np.diag([1.0, s_chi, s_chi * s_th])

    def derivative(y):
        out = np.zeros((3, 3, 3))
        s_chi, s_th = np.sin(y[0]) ** 2, np.sin(y[1]) ** 2
        out[0, 1, 1] = np.sin(2 * y[0])
        out[0, 2, 2] = np.sin(2 * y[0]) * s_th
        out[1, 2, 2] = s_chi * np.sin(2 * y[1])
        return out

    polar = (POLE_MARGIN, np.pi - POLE_MARGIN)
    return MetricChart(
        name=name,
        signature=Signature(3, 0),
        metric=metric,
        domain=(polar, polar, (-np.pi + AZIMUTH_MARGIN, np.pi - AZIMUTH_MARGIN)),
        metric_derivative=derivative,
        coordinates=("chi", "theta", "phi"),
        description="unit three-sphere",
    )


def euclidean_polar_chart(r_domain: Tuple[float, float] = (0.6, 2.0), name: str = "polar") -> MetricChart:
    """Flat ℝ⁴ as dr² + r²g_S³ in (r, χ, θ, φ)."""

    def metric(y):
        r2, s_chi, s_th = y[0] ** 2, np.sin(y[1]) ** 2, np.sin(y[2]) ** 2
        return np.diag([1.0, r2, r2 * s_chi, r2 * s_chi * s_th])

    def derivative(y):
        r, r2 = y[0], y[0] ** 2
        s_chi, s_th = np.sin(y[1]) ** 2, np.sin(y[2]) ** 2
        out = np.zeros((4, 4, 4))
        out[0, 1, 1] = 2 * r
        out[0, 2, 2] = 2 * r * s_chi
        out[0, 3, 3] = 2 * r * s_chi * s_th
        out[1, 2, 2] = r2 * np.sin(2 * y[1])
        out[1, 3, 3] = r2 * np.sin(2 * y[1]) * s_th
        out[2, 3, 3] = r2 * s_chi * np.sin(2 * y[2])
        return out

    polar = (POLE_MARGIN, np.pi - POLE_MARGIN)
    return MetricChart(
        name=name,
        signature=Signature(4, 0),
        metric=metric,
        domain=(tuple(r_domain), polar, polar, (-np.pi + AZIMUTH_MARGIN, np.pi - AZIMUTH_MARGIN)),
        metric_derivative=derivative,
        coordinates=("r", "chi", "theta", "phi"),
        description="flat R^4 in polar coordinates",
    )


def hyperbolic_chart(lam: float, name: str = "hyperbolic") -> MetricChart:
    """Upper half-space (2/|λ|)(dx²+dy²+dz²)/z², so that Ric = λh."""
    if not lam < 0:
        raise ContractViolation(f"Hyperbolic space needs λ < 0, got {lam}")
    a2 = 2.0 / abs(lam)

    def metric(y):
        return a2 / y[2] ** 2 * np.eye(3)

    def derivative(y):
        out = np.zeros((3, 3, 3))
        out[2] = -2 * a2 / y[2] ** 3 * np.eye(3)
        return out

    return MetricChart(
        name=name,
        signature=Signature(3, 0),
        metric=metric,
        domain=((-0.5, 0.5), (-0.5, 0.5), (1.0, 2.0)),
        metric_derivative=derivative,
        coordinates=("x", "y", "z"),
        description=f"hyperbolic three-space with Ric = {lam}h",
    )


def conformal_chart(chart: MetricChart, weight: Callable, power: float, name: Optional[str] = None) -> MetricChart:
    """The metric e^{power·w(x)}g on the same coordinate box."""

    def metric(x):
        return np.exp(power * weight(x)) * np.asarray(chart.metric(x), dtype=float)

    return MetricChart(
        name=name or f"{chart.name}_conformal",
        signature=chart.signature,
        metric=metric,
        domain=chart.domain,
        scale=chart.scale,
        coordinates=chart.coordinates,
        description=f"e^({power:+g}w) times {chart.name}",
    )


def warped_chart(
    base: MetricChart,
    warp: Callable[[float], float],
    t_domain: Tuple[float, float],
    name: str = "warped",
) -> MetricChart:
    """dt⊗dt + G(t)²g_N on an interval times the base chart."""
    n = base.dim

    def metric(x):
        g = np.zeros((n + 1, n + 1))
        g[0, 0] = 1.0
        g[1:, 1:] = warp(x[0]) ** 2 * np.asarray(base.metric(x[1:]), dtype=float)
        return g

    return MetricChart(
        name=name,
        signature=Signature(base.signature.p + 1, base.signature.q),
        metric=metric,
        domain=(tuple(t_domain),) + tuple(base.domain),
        scale=base.scale,
        coordinates=("t",) + (base.coordinates or tuple(f"y{i}" for i in range(n))),
        description=f"warped product over {base.name}",
    )


# -- Freedman family -------------------------------------------------------


@dataclass(frozen=True)
class FreedmanParams:
    """Sphere radius R, first harmonic ψ = c1 sinθcosφ + c2 sinθsinφ + c3 cosθ, constant 𝔠."""

    R: float = 1.0
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    c: float = 0.0
    mu: int = 1
    e: float = 1.0

    def __post_init__(self):
        if not self.R > 0:
            raise ContractViolation(f"Freedman radius R must be positive, got {self.R}")
        if not self.e > 0:
            raise ContractViolation(f"Coupling 𝔢 must be positive, got {self.e}")
        if self.mu not in (1, -1):
            raise ContractViolation(f"μ must be ±1, got {self.mu}")

    @property
    def lam_I(self) -> float:
        return 1.0 / (self.e * self.R)

    @property
    def Lambda(self) -> float:
        return -0.5 * self.e ** 2 * self.lam_I ** 2

    def psi(self, y) -> float:
        theta, phi = y[0], y[1]
        return float(
            self.c1 * np.sin(theta) * np.cos(phi) + self.c2 * np.sin(theta) * np.sin(phi) + self.c3 * np.cos(theta)
        )

    def dpsi(self, y) -> np.ndarray:
        theta, phi = y[0], y[1]
        d_theta = self.c1 * np.cos(theta) * np.cos(phi) + self.c2 * np.cos(theta) * np.sin(phi) - self.c3 * np.sin(theta)
        d_phi = -self.c1 * np.sin(theta) * np.sin(phi) + self.c2 * np.sin(theta) * np.cos(phi)
        return np.array([d_theta, d_phi])


def freedman_chart(params: FreedmanParams, perturb: float = 0.0) -> Tuple[MetricChart, FormField]:
    """g = −(ψ²/R² + 𝔠)du⊗du + du⊙(dv + ∗_h dψ) + h over S²_R, with F_A = −μλ_I du∧dψ + μλ_I ν_h.

    `perturb` adds perturb·cosθ to g_uu.
    """
    R = params.R
    transverse = sphere_chart(R, name="freedman_sphere")

    def profile(y):
        return -(params.psi(y) ** 2 / R ** 2 + params.c) + perturb * np.cos(y[0])

    def twist(y):
        d = params.dpsi(y)
        return np.array([-d[1] / np.sin(y[0]), d[0] * np.sin(y[0])])

    chart = brinkmann_chart(transverse, profile, twist, name="freedman")
    sig = chart.signature
    strength = params.mu * params.lam_I

    def F_A(x):
        y = x[2:]
        d = params.dpsi(y)
        out = Multivector.blade(sig, (0, 2), -strength * d[0]) + Multivector.blade(sig, (0, 3), -strength * d[1])
        return out + Multivector.blade(sig, (2, 3), strength * R * R * np.sin(y[0]))

    return chart, F_A


def freedman_residual(
    params: FreedmanParams,
    chart: MetricChart,
    F_A: FormField,
    x,
    tol: float = GEOMETRY_TOL,
) -> ResidualRecord:
    """Einstein-Maxwell, Δψ = −2ψ/R² on the sphere, and the gaugino identities at x."""
    x = np.asarray(x, dtype=float)
    record = einstein_maxwell_residual(chart, F_A, params.Lambda, params.e, x, tol)
    residuals = dict(record.residuals)

    sphere = sphere_chart(params.R)
    y = x[2:]
    residuals["laplacian"] = abs(laplacian(params.psi, sphere, y) + 2 * params.psi(y) / params.R ** 2)

    _, ginv = metric_at(chart, x)
    F = F_A(x)
    du = Multivector.blade(chart.signature, (0,))
    residuals["gaugino_contraction"] = contract(F, ginv[:, 0]).max_abs()
    dual = wedge(F, du) + params.mu * params.lam_I * hodge_field(du, chart, x)
    residuals["gaugino_duality"] = dual.max_abs()
    return ResidualRecord.build("freedman", x, residuals, tol)


def freedman_flux(params: FreedmanParams) -> Dict[str, float]:
    """∫_{S²}F_a by quadrature, c = (1/2π)∫F_a and the residual of λ_I𝔢²c = 2μ."""
    strength = params.mu * params.lam_I * params.R ** 2
    flux, error = dblquad(lambda phi, theta: strength * np.sin(theta), 0.0, np.pi, 0.0, 2 * np.pi)
    chern = flux / (2 * np.pi)
    return {
        "flux": float(flux),
        "quadrature_error": float(error),
        "chern": float(chern),
        "residual": float(abs(params.lam_I * params.e ** 2 * chern - 2 * params.mu)),
    }


def causal_character(chart: MetricChart, points: Iterable, tol: float = 1e-12) -> Dict[str, int]:
    """Counts of sampled points where ∂_u is timelike, null or spacelike."""
    counts = {"timelike": 0, "null": 0, "spacelike": 0}
    for x in points:
        g_uu = float(chart.metric(np.asarray(x, dtype=float))[0, 0])
        if g_uu < -tol:
            counts["timelike"] += 1
        elif g_uu > tol:
            counts["spacelike"] += 1
        else:
            counts["null"] += 1
    return counts


# -- wave-front data -------------------------------------------------------


@dataclass(frozen=True)
class WavefrontData:
    """Transverse data on the 𝔥 side (frame="frak") or on h = e^{-ℱ}𝔥 (frame="h").

    `profile` is ℋ, the du⊗du coefficient of the lifted metric; on the 𝔥 side
    H̄ = e^{-ℱ}ℋ is the harmonic function.
    """

    chart: MetricChart
    H_b: FormField
    dilaton: Callable
    profile: Callable = _zero
    frame: str = FRAK

    def __post_init__(self):
        if self.frame not in (FRAK, H_FRAME):
            raise ContractViolation(f"Unknown wave-front frame {self.frame!r}")

    def hbar(self, y) -> float:
        return float(self.profile(y) * np.exp(-self.dilaton(y)))


def conformal_transfer(data: WavefrontData) -> WavefrontData:
    """Switch between h and 𝔥 = e^ℱh; H_b, ℱ and ℋ are unchanged."""
    if data.frame == FRAK:
        chart = conformal_chart(data.chart, data.dilaton, -1.0, name=f"{data.chart.name}_h")
        return WavefrontData(chart, data.H_b, data.dilaton, data.profile, H_FRAME)
    chart = conformal_chart(data.chart, data.dilaton, 1.0, name=f"{data.chart.name}_frak")
    return WavefrontData(chart, data.H_b, data.dilaton, data.profile, FRAK)


def _frak_terms(data: WavefrontData, x) -> Dict:
    chart, F_fn = data.chart, data.dilaton
    curv = curvature(chart, x)
    ginv = curv.inverse
    F = float(F_fn(x))
    dF = function_gradient(F_fn, chart, x)
    H = data.H_b(x)
    norm_H = form_norm_sq(H, chart, x)
    e2F = np.exp(2 * F)
    dP = function_gradient(data.profile, chart, x)
    P = float(data.profile(x))
    return {
        "dilaton": -laplacian(F_fn, chart, x) + e2F * norm_H,
        "einstein": curv.ricci - np.outer(dF, dF) - e2F * (form_square(H, 3, chart, x).real - norm_H * curv.metric),
        "maxwell": exterior_derivative(
            lambda z: np.exp(2 * F_fn(z)) * hodge_field(data.H_b(z), chart, z), chart, x
        ),
        "profile": -laplacian(data.profile, chart, x) + 2 * dP @ ginv @ dF - P * dF @ ginv @ dF + P * e2F * norm_H,
        "metric": curv.metric,
    }


def _h_terms(data: WavefrontData, x) -> Dict:
    chart, F_fn = data.chart, data.dilaton
    curv = curvature(chart, x)
    hinv = curv.inverse
    dF = function_gradient(F_fn, chart, x)
    H = data.H_b(x)
    norm_H = form_norm_sq(H, chart, x)
    dF2 = dF @ hinv @ dF
    dP = function_gradient(data.profile, chart, x)
    P = float(data.profile(x))
    return {
        "dilaton": -laplacian(F_fn, chart, x) - dF2 + norm_H,
        "einstein": (
            curv.ricci
            - hessian(F_fn, chart, x)
            - 0.5 * np.outer(dF, dF)
            - (form_square(H, 3, chart, x).real - 0.5 * norm_H * curv.metric)
        ),
        "maxwell": exterior_derivative(lambda z: np.exp(F_fn(z)) * hodge_field(data.H_b(z), chart, z), chart, x),
        "profile": -laplacian(data.profile, chart, x) + dP @ hinv @ dF - P * dF2 + P * norm_H,
    }


def _terms_size(terms: Dict) -> Dict[str, float]:
    return {
        "dilaton": abs(terms["dilaton"]),
        "einstein": float(np.max(np.abs(terms["einstein"]))),
        "maxwell": terms["maxwell"].max_abs(),
        "profile": abs(terms["profile"]),
    }


def wavefront_residual(data: WavefrontData, x, tol: float = GEOMETRY_TOL) -> ResidualRecord:
    """Residuals of the wave-front system in the frame the data is given in."""
    x = np.asarray(x, dtype=float)
    terms = _frak_terms(data, x) if data.frame == FRAK else _h_terms(data, x)
    return ResidualRecord.build(f"wavefront_{data.frame}", x, _terms_size(terms), tol)


def conformal_cross_residual(data: WavefrontData, x, tol: float = GEOMETRY_TOL) -> ResidualRecord:
    """How far the h-side terms are from their 𝔥-side images.

    D_h = e^ℱD_𝔥, E_h = E_𝔥 − ½D_𝔥𝔥, M_h = M_𝔥 and P_h = e^ℱP_𝔥 hold for any
    data, solution or not.
    """
    x = np.asarray(x, dtype=float)
    frak = data if data.frame == FRAK else conformal_transfer(data)
    h_data = conformal_transfer(frak)
    upper = _frak_terms(frak, x)
    lower = _h_terms(h_data, x)
    eF = float(np.exp(frak.dilaton(x)))
    residuals = {
        "dilaton": abs(lower["dilaton"] - eF * upper["dilaton"]),
        "einstein": float(np.max(np.abs(lower["einstein"] - (upper["einstein"] - 0.5 * upper["dilaton"] * upper["metric"])))),
        "maxwell": (lower["maxwell"] - upper["maxwell"]).max_abs(),
        "profile": abs(lower["profile"] - eF * upper["profile"]),
    }
    return ResidualRecord.build("conformal_transfer", x, residuals, tol)


def scalar_identity_residual(data: WavefrontData, x) -> float:
    """|s_h − 2|H_b|²_h + ½|dℱ|²_h| on h = e^{-ℱ}𝔥."""
    h_data = data if data.frame == H_FRAME else conformal_transfer(data)
    chart = h_data.chart
    curv = curvature(chart, x)
    dF = function_gradient(h_data.dilaton, chart, x)
    norm_H = form_norm_sq(h_data.H_b(x), chart, x)
    return abs(curv.scalar - 2 * norm_H + 0.5 * dF @ curv.inverse @ dF)


def duality_residual(data: WavefrontData, mu: int, x) -> float:
    """max|∗_𝔥H_b + μe^{-ℱ}dℱ|, the quasi-supersymmetric condition."""
    chart = data.chart if data.frame == FRAK else conformal_transfer(data).chart
    dF = Multivector.vector(chart.signature, function_gradient(data.dilaton, chart, x))
    gap = hodge_field(data.H_b(x), chart, x) + mu * np.exp(-data.dilaton(x)) * dF
    return gap.max_abs()


def reduced_system_residual(
    chart: MetricChart,
    H_b: FormField,
    dilaton: Callable,
    hbar: Callable,
    x,
    mu: Optional[int] = None,
    tol: float = GEOMETRY_TOL,
) -> ResidualRecord:
    """The decoupled system on (N, 𝔥) at x.

    Ric^𝔥 = dℱ⊗dℱ + e^{2ℱ}(H_b∘H_b − |H_b|²𝔥), ∇^*dℱ + e^{2ℱ}|H_b|² = 0,
    d(e^{2ℱ}∗H_b) = 0, ΔH̄ = 0, plus the scalar identity on h = e^{-ℱ}𝔥 and,
    with μ, the duality ∗H_b = −μe^{-ℱ}dℱ.
    """
    x = np.asarray(x, dtype=float)

    def profile(y):
        return hbar(y) * np.exp(dilaton(y))

    data = WavefrontData(chart, H_b, dilaton, profile, FRAK)
    terms = _frak_terms(data, x)
    residuals = {
        "einstein": float(np.max(np.abs(terms["einstein"]))),
        "dilaton": abs(terms["dilaton"]),
        "maxwell": terms["maxwell"].max_abs(),
        "harmonic": abs(laplacian(hbar, chart, x)),
        "scalar_identity": scalar_identity_residual(data, x),
    }
    if mu is not None:
        residuals["duality"] = duality_residual(data, mu, x)
    return ResidualRecord.build("reduced_system", x, residuals, tol)


def lift_to_six(data: WavefrontData, mu: int, name: str = "lift") -> Tuple[MetricChart, FormField]:
    """g = ℋ du⊗du + e^ℱ du⊙dv + e^{-ℱ}𝔥 and H = H_b + μe^{2ℱ} du∧dv∧∗_𝔥H_b."""
    if mu not in (1, -1):
        raise ContractViolation(f"μ must be ±1, got {mu}")
    frak = data if data.frame == FRAK else conformal_transfer(data)
    h_data = conformal_transfer(frak)
    chart = kundt_chart(h_data.chart, frak.profile, frak.dilaton, name=name, null_domain=NULL_DOMAIN)
    sig = chart.signature
    du_dv = Multivector.blade(sig, (0, 1))

    def H_field(x):
        y = x[2:]
        H = frak.H_b(y)
        dual = hodge_field(H, frak.chart, y)
        return embed(H, sig) + mu * np.exp(2 * frak.dilaton(y)) * wedge(du_dv, embed(dual, sig))

    return chart, H_field


# -- black brane -----------------------------------------------------------


def black_brane_data(m: float, mu: int = 1) -> WavefrontData:
    """𝔥 flat in polar coordinates, ℱ = −ln(1 + m/r²), H_b = 2μm ν_S³, ℋ = 0."""
    if not m > 0:
        raise ContractViolation(f"Black brane mass parameter must be positive, got {m}")
    chart = euclidean_polar_chart(name="brane_polar")
    sig = chart.signature

    def dilaton(y):
        return -np.log1p(m / y[0] ** 2)

    def H_b(y):
        return Multivector.blade(sig, (1, 2, 3), 2 * mu * m * np.sin(y[1]) ** 2 * np.sin(y[2]))

    return WavefrontData(chart, H_b, dilaton)


def black_brane_flux(m: float) -> float:
    """𝔢 = 2m."""
    return 2.0 * m


def black_brane_charge(m: float, mu: int = 1) -> Dict[str, float]:
    """𝔢 measured as |∫_{S³}H_b| / Vol(S³) by quadrature, against 𝔢 = 2m."""
    coefficient = 2 * mu * m
    flux, error = tplquad(
        lambda phi, theta, chi: coefficient * np.sin(chi) ** 2 * np.sin(theta),
        0.0, np.pi, 0.0, np.pi, 0.0, 2 * np.pi,
    )
    e = abs(flux) / (2 * np.pi ** 2)
    return {
        "flux": float(flux),
        "quadrature_error": float(error),
        "e": float(e),
        "residual": float(abs(e - black_brane_flux(m))),
    }


def black_brane_chart(m: float, mu: int = 1) -> Tuple[MetricChart, FormField]:
    return lift_to_six(black_brane_data(m, mu), mu, name="black_brane")


def black_brane_harmonic_residual(m: float, r: float, step: float = 1e-3) -> float:
    """∂_r²e^U + (3/r)∂_r e^U for e^U = 1 + m/r²."""
    x = np.array([r])

    def warp(z):
        return 1.0 + m / z[0] ** 2

    second = second_partials(warp, x, step)[0, 0]
    first = partial(warp, x, 0, step)
    return float(abs(second + 3.0 / r * first))


def adapted_null_form(data: WavefrontData, sig: Signature) -> FormField:
    """u = e^ℱ du on the lifted chart."""

    def u_field(x):
        return Multivector.blade(sig, (0,), np.exp(data.dilaton(x[2:])))

    return u_field


def _polar_jacobian(y) -> np.ndarray:
    """∂x^i/∂y^α for x = r(cos χ, sin χ cos θ, sin χ sin θ cos φ, sin χ sin θ sin φ)."""
    r, chi, theta, phi = y
    sc, cc = np.sin(chi), np.cos(chi)
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    return np.array([
        [cc, -r * sc, 0.0, 0.0],
        [sc * ct, r * cc * ct, -r * sc * st, 0.0],
        [sc * st * cp, r * cc * st * cp, r * sc * ct * cp, -r * sc * st * sp],
        [sc * st * sp, r * cc * st * sp, r * sc * ct * sp, r * sc * st * cp],
    ])


def brane_screen_form(data: WavefrontData, mu: int, sig: Signature) -> FormField:
    """ω = e^{-ℱ}(dx¹∧dx² + s dx³∧dx⁴) on the lifted brane chart.

    x are Cartesian coordinates of the flat 𝔥 and s is chosen so that
    ∗_𝔥ω = −μω in the chart orientation. ω has unit norm on the screen h.
    """
    chart = data.chart
    if chart.dim != 4:
        raise ContractViolation(f"The brane screen form needs a four-dimensional 𝔥, got {chart.dim}")

    def field(x):
        y = x[2:]
        J = _polar_jacobian(y)
        s = -mu * chart.signature.orientation * np.sign(np.linalg.det(J))
        kahler = np.zeros((4, 4))
        kahler[0, 1], kahler[1, 0] = 1.0, -1.0
        kahler[2, 3], kahler[3, 2] = s, -s
        pulled = Multivector.from_tensor(chart.signature, J.T @ kahler @ J)
        return np.exp(-data.dilaton(y)) * embed(pulled, sig)

    return field


# -- radial family ---------------------------------------------------------


def radial_domain(params: RadialParams) -> Tuple[float, float]:
    """Radial interval kept inside (r*, π/2k) where both e^K and e^{-ℱ} stay positive."""
    r_max = np.pi / (2 * params.frequency)
    r_star = rho_star_from_radius(params)
    return r_star + 0.25 * (r_max - r_star), 0.6 * r_max


def radial_family_data(params: RadialParams) -> WavefrontData:
    """𝔥 = e^K(dr² + h_X) over hyperbolic X, H_b = 𝔢ν_X, ℱ and H̄ from the closed form."""
    if not params.lam < 0:
        raise ContractViolation("The radial family chart is built for λ < 0 only")
    X = hyperbolic_chart(params.lam)
    a2 = 2.0 / abs(params.lam)

    def metric(y):
        K = float(warp_profile(y[0], params)[0])
        g = np.zeros((4, 4))
        g[0, 0] = 1.0
        g[1:, 1:] = X.metric(y[1:])
        return np.exp(K) * g

    chart = MetricChart(
        name="radial_frak",
        signature=Signature(4, 0),
        metric=metric,
        domain=(radial_domain(params),) + X.domain,
        coordinates=("r",) + X.coordinates,
        description=f"radial family over hyperbolic X (λ={params.lam})",
    )

    def dilaton(y):
        return float(closed_form_state(y[0], params)[F_SLOT])

    def profile(y):
        state = closed_form_state(y[0], params)
        return float(state[HBAR] * np.exp(state[F_SLOT]))

    def H_b(y):
        return Multivector.blade(chart.signature, (1, 2, 3), params.e * (a2 / y[3] ** 2) ** 1.5)

    return WavefrontData(chart, H_b, dilaton, profile)


def radial_family_chart(params: RadialParams, mu: int = 1) -> Tuple[MetricChart, FormField]:
    return lift_to_six(radial_family_data(params), mu, name="radial")


# -- Killing-spinor warped families ----------------------------------------

KILLING_CASES = ("imag2d", "imag3d", "imag4d_q0", "real4d", "imag4d_qpos")
WARPED = "warped"
SPHERE = "sphere"


@dataclass
class KillingWarpedFamily:
    """A warped chart with the scalar S and one-form T of its Killing system.

    The fields obey dS + 2λT = 0, ∇T + 2λσSg = 0 and Hess S − 4λ²σSg = 0 with
    σ = −1 for real Killing number and σ = +1 otherwise. `alpha` is the full
    Hermitian square where it is known in closed form.
    """

    case: str
    lam: float
    chart: MetricChart
    scalar: Callable
    one_form: FormField
    sigma: int
    names: Tuple[str, str] = ("r", "theta")
    alpha: Optional[FormField] = None
    ell: Optional[int] = None


def _imaginary_family(case: str, lam: float, base: Optional[MetricChart], f0: float) -> KillingWarpedFamily:
    dim = {"imag2d": 2, "imag3d": 3, "imag4d_q0": 4}[case]
    base = base or flat_chart(dim - 1, name="flat_base")
    if base.dim != dim - 1:
        raise ContractViolation(f"{case} needs a base of dimension {dim - 1}, got {base.dim}")
    chart = warped_chart(base, lambda t: np.exp(-2 * lam * t), (-0.5, 0.5), name=case)
    sig = chart.signature

    def r(x):
        return f0 * np.exp(-2 * lam * x[0])

    def theta(x):
        return Multivector.blade(sig, (0,), r(x))

    if case == "imag4d_q0":
        def vartheta(x):
            return Multivector.blade(sig, (1,), f0 * np.exp(-4 * lam * x[0]))

        def alpha(x):
            omega = Multivector.blade(sig, (2, 3), -f0 * np.exp(-6 * lam * x[0]))
            return Multivector.scalar(sig, r(x)) + theta(x) + 1j * omega + 1j * hodge_field(vartheta(x), chart, x)
    else:
        def alpha(x):
            return Multivector.scalar(sig, r(x)) + theta(x)

    ell = 1 if sig.is_odd else None
    return KillingWarpedFamily(case, lam, chart, r, theta, 1, ("r", "theta"), alpha, ell)


def killing_warped_chart(
    case: str,
    lam: float,
    base: Optional[MetricChart] = None,
    branch: str = WARPED,
    f0: float = 1.0,
) -> KillingWarpedFamily:
    """Warped charts carrying Killing spinors.

    imag*: g = dt² + e^{-4λt}g_N with r = e^{-2λt}, θ = r dt. real4d:
    g = dt² + G²g_N with G = sin(2λt), f = f0 cos(2λt), ϑ = f0 sin(2λt)dt.
    imag4d_qpos: G = sinh(2λt), r = f0 cosh(2λt), θ = −f0 sinh(2λt)dt. The
    sphere branch divides G by 2λ and uses a unit S³ base, giving the round
    sphere or hyperbolic space.
    """
    if case not in KILLING_CASES:
        raise ContractViolation(f"Unknown Killing case {case!r}; choose one of {KILLING_CASES}")
    if not lam > 0:
        raise ContractViolation(f"λ must be positive, got {lam}")
    if branch not in (WARPED, SPHERE):
        raise ContractViolation(f"Unknown branch {branch!r}")
    if case.startswith("imag") and case != "imag4d_qpos":
        if branch != WARPED:
            raise ContractViolation(f"{case} has no sphere branch")
        return _imaginary_family(case, lam, base, f0)

    if branch == SPHERE:
        if base is not None:
            raise ContractViolation("The sphere branch fixes the base to the unit S³")
        base = s3_chart()
    base = base or flat_chart(3, name="flat_base")
    if base.dim != 3:
        raise ContractViolation(f"{case} needs a three-dimensional base, got {base.dim}")
    norm = 2 * lam if branch == SPHERE else 1.0

    if case == "real4d":
        t_domain = (0.2 * np.pi / (2 * lam), 0.8 * np.pi / (2 * lam))
        chart = warped_chart(base, lambda t: np.sin(2 * lam * t) / norm, t_domain, name=f"real4d_{branch}")
        sig = chart.signature

        def f(x):
            return f0 * np.cos(2 * lam * x[0])

        def vartheta(x):
            return Multivector.blade(sig, (0,), f0 * np.sin(2 * lam * x[0]))

        return KillingWarpedFamily(case, lam, chart, f, vartheta, -1, ("f", "vartheta"))

    t_domain = (0.2 / lam, 0.6 / lam)
    chart = warped_chart(base, lambda t: np.sinh(2 * lam * t) / norm, t_domain, name=f"imag4d_qpos_{branch}")
    sig = chart.signature

    def r(x):
        return f0 * np.cosh(2 * lam * x[0])

    def theta(x):
        return Multivector.blade(sig, (0,), -f0 * np.sinh(2 * lam * x[0]))

    return KillingWarpedFamily(case, lam, chart, r, theta, 1, ("r", "theta"))


def killing_warped_residuals(family: KillingWarpedFamily, x, tol: float = GEOMETRY_TOL) -> ResidualRecord:
    x = np.asarray(x, dtype=float)
    chart, lam, sigma = family.chart, family.lam, family.sigma
    s_name, t_name = family.names
    g, _ = metric_at(chart, x)
    S = float(family.scalar(x))
    T = family.one_form(x).vector_part().real
    nabla_T = np.array([part.vector_part().real for part in covariant_derivatives(family.one_form, chart, x)])
    scale = max(abs(S), 1.0)
    residuals = {
        f"d{s_name}+2*lam*{t_name}": float(np.max(np.abs(function_gradient(family.scalar, chart, x) + 2 * lam * T))),
        f"nabla_{t_name}+2*lam*sigma*{s_name}*g": float(np.max(np.abs(nabla_T + 2 * lam * sigma * S * g))),
        f"hess_{s_name}-4*lam^2*sigma*{s_name}*g": float(
            np.max(np.abs(hessian(family.scalar, chart, x) - 4 * lam * lam * sigma * S * g))
        ),
    }
    residuals = {name: value / scale for name, value in residuals.items()}

    if family.alpha is not None:
        connection = killing_connection(chart, 1j * lam)
        square = parallel_square_residual(family.alpha, connection, (), chart, x, ell=family.ell, tol=tol)
        residuals.update({f"square:{name}": value for name, value in square.residuals.items()})
        if not chart.signature.is_odd:
            frame = coframe_at(chart, x)
            form = normal_form(frame.to_frame(family.alpha(x)), HERMITIAN, tol=tol)
            residuals["normal_form"] = max(form.residuals.values())
    return ResidualRecord.build(f"killing_{family.case}", x, residuals, tol)


# -- self-dual curvings on Kundt charts ------------------------------------


@dataclass(frozen=True)
class GerbeComponents:
    """Component data of a curving on a Kundt chart.

    Every callable takes (u, y) with y a transverse point. H_b, α and Θ are
    forms on the transverse chart; 𝒜 is a transverse one-form. Missing
    components are zero.
    """

    transverse: MetricChart
    H_b: Callable
    dilaton: Optional[Callable] = None
    profile: Optional[Callable] = None
    twist: Optional[Callable] = None
    f: Optional[Callable] = None
    alpha: Optional[Callable] = None
    theta: Optional[Callable] = None

    def _scalar(self, fn, u, y) -> float:
        return float(fn(u, y)) if fn is not None else 0.0

    def _form(self, fn, u, y) -> Multivector:
        return fn(u, y) if fn is not None else Multivector(self.transverse.signature)

    def dilaton_at(self, u, y) -> float:
        return self._scalar(self.dilaton, u, y)

    def profile_at(self, u, y) -> float:
        return self._scalar(self.profile, u, y)

    def twist_at(self, u, y) -> Multivector:
        return self._form(self.twist, u, y)

    def theta_at(self, u, y) -> Multivector:
        return self._form(self.theta, u, y)

    def d_alpha(self, u, y) -> Multivector:
        if self.alpha is None:
            return Multivector(self.transverse.signature)
        return exterior_derivative(lambda z: self.alpha(u, z), self.transverse, y)

    def source(self, u, y) -> Multivector:
        """∂_uα + df."""
        sig = self.transverse.signature
        out = Multivector(sig)
        h = self.transverse.step
        if self.alpha is not None:
            out = out + Multivector(sig, partial(lambda s: self.alpha(s[0], y).coeffs, np.array([u]), 0, h))
        if self.f is not None:
            out = out + Multivector.vector(sig, gradient(lambda z: self.f(u, z), np.asarray(y, dtype=float), h))
        return out

    def chart(self, name: str = "gerbe") -> MetricChart:
        twist = None
        if self.twist is not None:
            def twist(u, y):
                return self.twist(u, y).vector_part().real

        return kundt_chart(self.transverse, self.profile_at, self.dilaton_at, twist, name=name, null_domain=NULL_DOMAIN, stationary=False)


def assemble_curvature(components: GerbeComponents, sig: Signature) -> FormField:
    """H_b̄ = H_b + e^{-ℱ}s∧u∧v + u∧(Θ + e^{-ℱ}s∧𝒜 + ½ℋe^{-ℱ}dα) + e^{-ℱ}(𝒜 − v)∧dα.

    Here u = du, v = ½ℋdu + e^ℱdv + 𝒜 and s = ∂_uα + df.
    """

    def field(x):
        u_coord, y = x[0], x[2:]
        F = components.dilaton_at(u_coord, y)
        H = components.profile_at(u_coord, y)
        e_minus = np.exp(-F)
        A = embed(components.twist_at(u_coord, y), sig)
        s = embed(components.source(u_coord, y), sig)
        d_alpha = embed(components.d_alpha(u_coord, y), sig)
        u = Multivector.blade(sig, (0,))
        v = 0.5 * H * u + np.exp(F) * Multivector.blade(sig, (1,)) + A
        out = embed(components.H_b(u_coord, y), sig)
        out = out + e_minus * wedge(wedge(s, u), v)
        inner = embed(components.theta_at(u_coord, y), sig) + e_minus * wedge(s, A) + 0.5 * H * e_minus * d_alpha
        out = out + wedge(u, inner)
        return out + e_minus * wedge(A - v, d_alpha)

    return field


def selfdual_gerbe_check(
    components: GerbeComponents,
    x,
    mu: int,
    tol: float = GEOMETRY_TOL,
) -> ResidualRecord:
    """The three component conditions for ∗_gH = μH, the closure identity, and
    the assembled six-dimensional self-duality and closure at x = (u, v, y).
    """
    if mu not in (1, -1):
        raise ContractViolation(f"μ must be ±1, got {mu}")
    x = np.asarray(x, dtype=float)
    u_coord, y = x[0], x[2:]
    h = components.transverse

    def star(a):
        return hodge_field(a, h, y)

    F = components.dilaton_at(u_coord, y)
    H = components.profile_at(u_coord, y)
    A = components.twist_at(u_coord, y)
    H_b = components.H_b(u_coord, y)
    s = components.source(u_coord, y)
    d_alpha = components.d_alpha(u_coord, y)
    T = components.theta_at(u_coord, y) + np.exp(-F) * wedge(s, A)

    step = h.step
    dH_du = Multivector(H_b.sig, partial(lambda w: components.H_b(w[0], y).coeffs, np.array([u_coord]), 0, step))
    if components.theta is not None:
        d_theta = exterior_derivative(lambda z: components.theta(u_coord, z), h, y)
    else:
        d_theta = Multivector(H_b.sig)

    chart = components.chart()
    field = assemble_curvature(components, chart.signature)
    H6 = field(x)
    residuals = {
        "condition_1": (star(np.exp(F) * H_b + wedge(A, d_alpha)) - mu * s).max_abs(),
        "condition_2": (star(d_alpha) - mu * d_alpha).max_abs(),
        "condition_3": (T + H * np.exp(-F) * d_alpha + mu * star(T)).max_abs(),
        "closure_component": (dH_du - d_theta).max_abs(),
        "self_duality": (hodge_field(H6, chart, x) - mu * H6).max_abs(),
        "closure": exterior_derivative(field, chart, x).max_abs(),
    }
    return ResidualRecord.build("selfdual_gerbe", x, residuals, tol)


def black_brane_components(m: float, mu: int = 1) -> GerbeComponents:
    """Brane data in gerbe components: α = 0, 𝒜 = 0, Θ = 0 and f = m/(r² + m)."""
    data = black_brane_data(m, mu)
    h = conformal_transfer(data).chart
    return GerbeComponents(
        transverse=h,
        H_b=lambda u, y: data.H_b(y),
        dilaton=lambda u, y: data.dilaton(y),
        f=lambda u, y: m / (y[0] ** 2 + m),
    )


def radial_components(params: RadialParams, mu: int = 1) -> GerbeComponents:
    """Radial family data in gerbe components with f = −(μ/𝔢)e^K ℱ'.

    ∗_𝔥H_b = −𝔢e^{-K}dr and the dilaton equation (e^Kℱ')' = 𝔢²e^{2ℱ−K} give
    df = μe^{2ℱ}∗_𝔥H_b.
    """
    data = radial_family_data(params)
    h = conformal_transfer(data).chart

    def f(u, y):
        state = closed_form_state(y[0], params)
        return float(-mu / params.e * np.exp(state[K_SLOT]) * state[DF_SLOT])

    return GerbeComponents(
        transverse=h,
        H_b=lambda u, y: data.H_b(y),
        dilaton=lambda u, y: data.dilaton(y),
        profile=lambda u, y: data.profile(y),
        f=f,
    )
