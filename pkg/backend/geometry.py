"""
Pseudo-Riemannian calculus on coordinate charts.

Metrics are callables x -> g(x). Derivatives come from the chart when it
supplies them and from 4th-order central differences otherwise. Exterior form
fields are callables x -> Multivector whose coefficients are components in the
coordinate coframe dx^μ; metric-dependent algebra (⋄, △_k, pairings) happens in
an orthonormal coframe built pointwise by `coframe_at`.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from errors import ContractViolation, DegenerateMetric
from multivector import (
    ABS_FLOOR,
    Multivector,
    Signature,
    _permutation_sign,
    adjoint_twist,
    contract,
    exterior_power,
    generalized_product,
    geometric_product,
    transform,
    wedge,
)
from reports import ResidualRecord
from truncated import TruncatedMultivector, vee_product

logger = logging.getLogger(__name__)

FD_STEP = 1e-4
SECOND_STEP_FACTOR = 10.0
BOUNDARY_MARGIN = 5.0
GEOMETRY_TOL = 1e-6
PIVOT_TOL = 1e-10

FormField = Callable[[np.ndarray], Multivector]
# (x, w) -> 𝔞_w at x, in coordinate components
ConnectionField = Callable[[np.ndarray, np.ndarray], Multivector]

_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_SECOND_WEIGHTS = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0


@dataclass(frozen=True)
class MetricChart:
    """A metric on a coordinate box.

    `metric_derivative`, when given, returns dg[μ, a, b] = ∂_μ g_ab. The
    orthonormal coframes of the chart list the p spacelike directions before
    the q timelike ones, matching the ε layout of the algebra.
    """

    name: str
    signature: Signature
    metric: Callable[[np.ndarray], np.ndarray]
    domain: Tuple[Tuple[float, float], ...]
    metric_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    scale: float = 1.0
    coordinates: Tuple[str, ...] = ()
    description: str = ""

    def __post_init__(self):
        if len(self.domain) != self.signature.dim:
            raise ContractViolation(
                f"Chart {self.name}: domain has {len(self.domain)} intervals for dimension {self.signature.dim}"
            )
        for lo, hi in self.domain:
            if not lo < hi:
                raise ContractViolation(f"Chart {self.name}: empty interval ({lo}, {hi})")
        if self.coordinates and len(self.coordinates) != self.signature.dim:
            raise ContractViolation(f"Chart {self.name}: {len(self.coordinates)} coordinate names")

    @property
    def dim(self) -> int:
        return self.signature.dim

    @property
    def step(self) -> float:
        return FD_STEP * self.scale

    @property
    def margin(self) -> float:
        """Distance kept from the boundary so that every nested stencil stays inside."""
        return BOUNDARY_MARGIN * SECOND_STEP_FACTOR * self.step

    def coordinate_name(self, mu: int) -> str:
        return self.coordinates[mu] if self.coordinates else f"x{mu}"

    def contains(self, x, margin: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return all(lo + margin <= xi <= hi - margin for xi, (lo, hi) in zip(x, self.domain))

    def sample_points(self, n: int, rng: np.random.Generator, margin: Optional[float] = None) -> np.ndarray:
        margin = self.margin if margin is None else margin
        lo = np.array([a for a, _ in self.domain]) + margin
        hi = np.array([b for _, b in self.domain]) - margin
        if np.any(hi <= lo):
            raise ContractViolation(f"Chart {self.name}: domain too small for boundary margin {margin}")
        return lo + rng.random((n, self.dim)) * (hi - lo)

    def unit(self, mu: int) -> np.ndarray:
        w = np.zeros(self.dim)
        w[mu] = 1.0
        return w


# -- finite differences ----------------------------------------------------


def partial(f: Callable, x: np.ndarray, mu: int, h: float) -> np.ndarray:
    """4th-order central difference of f along coordinate μ."""
    e = np.zeros(len(x))
    e[mu] = h
    return sum(w * np.asarray(f(x + o * e)) for o, w in zip(_OFFSETS, _WEIGHTS)) / h


def gradient(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    return np.stack([partial(f, x, mu, h) for mu in range(len(x))])


def second_partials(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    """out[μ, ν] = ∂_μ∂_ν f(x), direct 4th-order stencils."""
    d = len(x)
    f0 = np.asarray(f(x))
    out = np.zeros((d, d) + f0.shape, dtype=np.result_type(f0, float))
    eye = np.eye(d) * h
    for mu in range(d):
        values = [f0 if k == 0 else np.asarray(f(x + k * eye[mu])) for k in range(-2, 3)]
        out[mu, mu] = sum(c * v for c, v in zip(_SECOND_WEIGHTS, values)) / (h * h)
        for nu in range(mu + 1, d):
            acc = 0.0
            for oa, wa in zip(_OFFSETS, _WEIGHTS):
                for ob, wb in zip(_OFFSETS, _WEIGHTS):
                    acc = acc + wa * wb * np.asarray(f(x + oa * eye[mu] + ob * eye[nu]))
            out[mu, nu] = out[nu, mu] = acc / (h * h)
    return out


# -- metric and connection -------------------------------------------------


def metric_at(chart: MetricChart, x) -> Tuple[np.ndarray, np.ndarray]:
    """g and g^{-1} at x; a singular or asymmetric metric raises DegenerateMetric."""
    x = np.asarray(x, dtype=float)
    g = np.asarray(chart.metric(x), dtype=float)
    if g.shape != (chart.dim, chart.dim):
        raise ContractViolation(f"Chart {chart.name}: metric has shape {g.shape}, expected {(chart.dim, chart.dim)}")
    size = max(1.0, float(np.max(np.abs(g))))
    if np.max(np.abs(g - g.T)) > 1e-12 * size:
        raise DegenerateMetric(f"Chart {chart.name}: metric is not symmetric at {x.tolist()}")
    try:
        lu, piv = lu_factor(g)
    except ValueError as e:
        raise DegenerateMetric(f"Chart {chart.name}: metric is not finite at {x.tolist()}: {e}")
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= PIVOT_TOL * pivots.max():
        raise DegenerateMetric(f"Chart {chart.name}: singular metric at {x.tolist()}")
    return g, lu_solve((lu, piv), np.eye(chart.dim))


def metric_derivative(chart: MetricChart, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if chart.metric_derivative is not None:
        return np.asarray(chart.metric_derivative(x), dtype=float)
    return gradient(chart.metric, x, chart.step)


def metric_second_derivative(chart: MetricChart, x) -> np.ndarray:
    """d2g[λ, μ, a, b] = ∂_λ∂_μ g_ab."""
    x = np.asarray(x, dtype=float)
    if chart.metric_derivative is not None:
        return gradient(chart.metric_derivative, x, chart.step)
    return second_partials(chart.metric, x, SECOND_STEP_FACTOR * chart.step)


def _lowered(dg: np.ndarray) -> np.ndarray:
    # Γ_{σμν} = ½(∂_μ g_σν + ∂_ν g_σμ − ∂_σ g_μν)
    return 0.5 * (np.einsum("msn->smn", dg) + np.einsum("nsm->smn", dg) - dg)


def christoffel(chart: MetricChart, x) -> np.ndarray:
    """Γ[ρ, μ, ν] = Γ^ρ_{μν} of the Levi-Civita connection."""
    _, ginv = metric_at(chart, x)
    return np.einsum("rs,smn->rmn", ginv, _lowered(metric_derivative(chart, x)))


def christoffel_derivative(chart: MetricChart, x) -> np.ndarray:
    """dΓ[λ, ρ, μ, ν] = ∂_λ Γ^ρ_{μν}, from the first two metric derivatives."""
    _, ginv = metric_at(chart, x)
    dg = metric_derivative(chart, x)
    d2g = metric_second_derivative(chart, x)
    lowered = _lowered(dg)
    dlowered = 0.5 * (
        np.einsum("lmsn->lsmn", d2g) + np.einsum("lnsm->lsmn", d2g) - d2g
    )
    dginv = -np.einsum("ra,lab,bs->lrs", ginv, dg, ginv)
    return np.einsum("lrs,smn->lrmn", dginv, lowered) + np.einsum("rs,lsmn->lrmn", ginv, dlowered)


@dataclass
class Curvature:
    metric: np.ndarray
    inverse: np.ndarray
    christoffel: np.ndarray
    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float

    @property
    def einstein(self) -> np.ndarray:
        return self.ricci - 0.5 * self.scalar * self.metric


def curvature(chart: MetricChart, x) -> Curvature:
    """Riemann R^ρ_{σμν}, Ricci R_{σν} = R^ρ_{σρν} and scalar curvature at x."""
    g, ginv = metric_at(chart, x)
    gamma = christoffel(chart, x)
    dgamma = christoffel_derivative(chart, x)
    riemann = (
        np.einsum("mrns->rsmn", dgamma)
        - np.einsum("nrms->rsmn", dgamma)
        + np.einsum("rml,lns->rsmn", gamma, gamma)
        - np.einsum("rnl,lms->rsmn", gamma, gamma)
    )
    ricci = np.einsum("rsrn->sn", riemann)
    scalar = float(np.einsum("sn,sn->", ginv, ricci))
    return Curvature(g, ginv, gamma, riemann, ricci, scalar)


def einstein_divergence(chart: MetricChart, x) -> np.ndarray:
    """∇^μ(Ric − ½s g)_{μν}; zero by the contracted Bianchi identity."""
    x = np.asarray(x, dtype=float)
    curv = curvature(chart, x)
    h = SECOND_STEP_FACTOR * chart.step
    dG = gradient(lambda y: curvature(chart, y).einstein, x, h)
    G = curv.einstein
    gamma = curv.christoffel
    nabla = dG - np.einsum("lam,ln->amn", gamma, G) - np.einsum("lan,ml->amn", gamma, G)
    return np.einsum("am,amn->n", curv.inverse, nabla)


# -- scalar functions ------------------------------------------------------


def function_gradient(f: Callable, chart: MetricChart, x) -> np.ndarray:
    return gradient(f, np.asarray(x, dtype=float), chart.step)


def hessian(f: Callable, chart: MetricChart, x) -> np.ndarray:
    """Hess f_{μν} = ∂_μ∂_ν f − Γ^λ_{μν}∂_λ f."""
    x = np.asarray(x, dtype=float)
    second = second_partials(f, x, SECOND_STEP_FACTOR * chart.step)
    return second - np.einsum("lmn,l->mn", christoffel(chart, x), function_gradient(f, chart, x))


def laplacian(f: Callable, chart: MetricChart, x) -> float:
    """tr_g Hess f; the codifferential ∇^*df is its negative."""
    _, ginv = metric_at(chart, x)
    return float(np.einsum("mn,mn->", ginv, hessian(f, chart, x)))


# -- exterior form fields --------------------------------------------------


def field_partials(field: FormField, chart: MetricChart, x) -> List[Multivector]:
    x = np.asarray(x, dtype=float)
    sig = field(x).sig
    coeffs = gradient(lambda y: field(y).coeffs, x, chart.step)
    return [Multivector(sig, coeffs[mu]) for mu in range(chart.dim)]


def exterior_derivative(field: FormField, chart: MetricChart, x) -> Multivector:
    """dα = Σ_μ dx^μ ∧ ∂_μα."""
    parts = field_partials(field, chart, x)
    sig = parts[0].sig
    out = Multivector(sig)
    for mu, part in enumerate(parts):
        out = out + wedge(Multivector.blade(sig, (mu,)), part)
    return out


def _connection_terms(alpha: Multivector, gamma: np.ndarray, w: np.ndarray) -> Multivector:
    # Σ_ν (∇_w dx^ν) ∧ ι_{∂ν}α with ∇_w dx^ν = −w^μΓ^ν_{μρ}dx^ρ
    sig = alpha.sig
    d = sig.dim
    rot = -np.einsum("m,nmr->nr", w, gamma)
    out = Multivector(sig)
    for nu in range(d):
        if not np.any(rot[nu]):
            continue
        out = out + wedge(Multivector.vector(sig, rot[nu]), contract(alpha, np.eye(d)[nu]))
    return out


def covariant_derivatives(field: FormField, chart: MetricChart, x) -> List[Multivector]:
    """∇_{∂μ}α for every coordinate direction μ."""
    x = np.asarray(x, dtype=float)
    gamma = christoffel(chart, x)
    alpha = field(x)
    parts = field_partials(field, chart, x)
    return [parts[mu] + _connection_terms(alpha, gamma, chart.unit(mu)) for mu in range(chart.dim)]


def covariant_derivative_form(field: FormField, chart: MetricChart, x, w) -> Multivector:
    """Levi-Civita derivative ∇_wα of an exterior form field."""
    w = np.asarray(w, dtype=float)
    derivs = covariant_derivatives(field, chart, x)
    out = Multivector(derivs[0].sig)
    for mu, wm in enumerate(w):
        if wm:
            out = out + wm * derivs[mu]
    return out


@lru_cache(maxsize=None)
def _complement_table(d: int) -> Tuple[np.ndarray, np.ndarray]:
    size = 1 << d
    full = size - 1
    signs = np.empty(size)
    for mask in range(size):
        head = [i for i in range(d) if (mask >> i) & 1]
        tail = [i for i in range(d) if not (mask >> i) & 1]
        signs[mask] = _permutation_sign(head + tail)
    return full ^ np.arange(size), signs


def hodge_field(alpha: Union[Multivector, FormField], chart: MetricChart, x) -> Multivector:
    """∗_g at x, normalized by α∧∗β = ⟨α,β⟩_g ν_g with ν_g = o√|det g| dx^1∧…∧dx^d."""
    x = np.asarray(x, dtype=float)
    if callable(alpha):
        alpha = alpha(x)
    g, ginv = metric_at(chart, x)
    raised = exterior_power(ginv, alpha.sig) @ alpha.coeffs
    complement, signs = _complement_table(alpha.sig.dim)
    volume = chart.signature.orientation * np.sqrt(abs(np.linalg.det(g)))
    out = np.zeros(alpha.sig.size, dtype=complex)
    out[complement] = volume * signs * raised
    return Multivector(alpha.sig, out)


def metric_volume(chart: MetricChart, x) -> Multivector:
    return hodge_field(Multivector.scalar(chart.signature, 1.0), chart, x)


def form_pairing(a: Multivector, b: Multivector, chart: MetricChart, x) -> complex:
    """⟨a, b⟩_g, bilinear, with ⟨dx^I, dx^J⟩ = det g^{-1}[I, J]."""
    _, ginv = metric_at(chart, x)
    return complex(a.coeffs @ exterior_power(ginv, a.sig) @ b.coeffs)


def form_norm_sq(a: Multivector, chart: MetricChart, x) -> float:
    return form_pairing(a, a, chart, x).real


def form_square(a: Multivector, k: int, chart: MetricChart, x) -> np.ndarray:
    """(a∘a)_{μν} = a_{μA} a_ν^A / (k-1)! for a k-form a."""
    if k < 1:
        raise ContractViolation(f"form_square needs a positive degree, got {k}")
    _, ginv = metric_at(chart, x)
    t = a.to_tensor(k)
    raised = t
    for axis in range(1, k):
        raised = np.moveaxis(np.tensordot(raised, ginv, axes=([axis], [0])), -1, axis)
    axes = list(range(1, k))
    return np.tensordot(t, raised, axes=(axes, axes)) / factorial(k - 1)


def flat(chart: MetricChart, x, w) -> Multivector:
    g = np.asarray(chart.metric(np.asarray(x, dtype=float)), dtype=float)
    return Multivector.vector(chart.signature, g @ np.asarray(w))


# -- orthonormal coframes --------------------------------------------------


@dataclass(frozen=True)
class Coframe:
    """Rows e^a = Σ_μ matrix[a, μ] dx^μ with ⟨e^a, e^b⟩ = ε_a δ_ab and det > 0."""

    matrix: np.ndarray
    signature: Signature
    to_power: np.ndarray
    from_power: np.ndarray

    def to_frame(self, a: Multivector) -> Multivector:
        return transform(a, self.to_power, self.signature)

    def from_frame(self, a: Multivector) -> Multivector:
        return transform(a, self.from_power, self.signature)


def orthonormal_coframe(chart: MetricChart, x) -> np.ndarray:
    """Signature-aware Gram-Schmidt on dx^1 … dx^d pivoting on the largest |norm|.

    When every remaining candidate is null, the pair with the largest cross
    term is combined first.
    """
    _, ginv = metric_at(chart, x)
    d = chart.dim
    tol = 1e-8 * max(1.0, float(np.max(np.abs(ginv))))
    candidates = [row for row in np.eye(d)]
    rows: List[np.ndarray] = []
    signs: List[int] = []
    while candidates:
        candidates = [
            c - sum(s * (c @ ginv @ e) * e for e, s in zip(rows, signs)) for c in candidates
        ]
        norms = np.array([c @ ginv @ c for c in candidates])
        i = int(np.argmax(np.abs(norms)))
        if abs(norms[i]) <= tol:
            if len(candidates) < 2:
                raise DegenerateMetric(f"Chart {chart.name}: no non-null direction left at {np.asarray(x).tolist()}")
            cross = np.array([[a @ ginv @ b for b in candidates] for a in candidates])
            np.fill_diagonal(cross, 0.0)
            i, j = np.unravel_index(int(np.argmax(np.abs(cross))), cross.shape)
            if abs(cross[i, j]) <= tol:
                raise DegenerateMetric(f"Chart {chart.name}: degenerate inverse metric at {np.asarray(x).tolist()}")
            candidates[i] = candidates[i] + candidates[j]
            norms[i] = candidates[i] @ ginv @ candidates[i]
        sign = 1 if norms[i] > 0 else -1
        rows.append(candidates[i] / np.sqrt(abs(norms[i])))
        signs.append(sign)
        del candidates[i]

    plus = [r for r, s in zip(rows, signs) if s > 0]
    minus = [r for r, s in zip(rows, signs) if s < 0]
    if (len(plus), len(minus)) != (chart.signature.p, chart.signature.q):
        raise DegenerateMetric(
            f"Chart {chart.name}: metric has signature ({len(plus)},{len(minus)}) at "
            f"{np.asarray(x).tolist()}, declared {chart.signature}"
        )
    frame = np.array(plus + minus)
    if np.linalg.det(frame) < 0:
        frame[-1] = -frame[-1]
    return frame


def coframe_at(chart: MetricChart, x) -> Coframe:
    frame = orthonormal_coframe(chart, x)
    sig = chart.signature
    return Coframe(frame, sig, exterior_power(np.linalg.inv(frame), sig), exterior_power(frame, sig))


# -- first-order systems ---------------------------------------------------


def _algebra_product(a: Multivector, b: Multivector, ell: Optional[int]) -> Multivector:
    if not a.sig.is_odd:
        return geometric_product(a, b)
    if ell is None:
        raise ContractViolation(f"Odd signature {a.sig} needs a branch label ℓ")
    return vee_product(TruncatedMultivector.from_full(a, ell), TruncatedMultivector.from_full(b, ell)).mv


def killing_connection(chart: MetricChart, lam: complex) -> ConnectionField:
    """𝔞_w = iλ w♭."""
    def connection(x, w):
        return 1j * lam * flat(chart, x, w)

    return connection


def torsion_connection(H: FormField) -> ConnectionField:
    """𝔞_w = −¼ ι_w H."""
    def connection(x, w):
        return -0.25 * contract(H(x), w)

    return connection


def zero_connection(chart: MetricChart) -> ConnectionField:
    def connection(x, w):
        return Multivector(chart.signature)

    return connection


def parallel_square_residual(
    alpha_field: FormField,
    connection: ConnectionField,
    constraints: Sequence[FormField],
    chart: MetricChart,
    x,
    s: int = 1,
    conjugate: bool = True,
    ell: Optional[int] = None,
    tol: float = GEOMETRY_TOL,
) -> ResidualRecord:
    """Residuals of ∇_wα = 𝔞_w⋄α + α⋄twist_s(𝔞_w) per coordinate direction, and 𝔮⋄α.

    With conjugate=True the twisted term uses the complex conjugate of 𝔞_w, as
    for Hermitian squares. Odd dimensions use ∨ on branch ℓ.
    """
    x = np.asarray(x, dtype=float)
    frame = coframe_at(chart, x)
    alpha = frame.to_frame(alpha_field(x))
    scale = max(alpha.max_abs(), ABS_FLOOR)
    derivs = covariant_derivatives(alpha_field, chart, x)
    residuals: Dict[str, float] = {}
    for mu in range(chart.dim):
        a = frame.to_frame(connection(x, chart.unit(mu)))
        twisted = adjoint_twist(a.conj() if conjugate else a, s)
        rhs = _algebra_product(a, alpha, ell) + _algebra_product(alpha, twisted, ell)
        residuals[f"nabla_{chart.coordinate_name(mu)}"] = (frame.to_frame(derivs[mu]) - rhs).max_abs() / scale
    for i, constraint in enumerate(constraints):
        q = frame.to_frame(constraint(x))
        product = _algebra_product(q, alpha, ell)
        residuals[f"constraint_{i}"] = product.max_abs() / (scale * max(q.max_abs(), ABS_FLOOR))
    return ResidualRecord.build("parallel_square", x, residuals, tol)


def torsion_split(u_field: FormField, H_field: FormField, chart: MetricChart, x) -> Tuple[np.ndarray, np.ndarray]:
    """Skew and symmetric parts of T(w, y) = (∇_w u)(y) − ½H(w, u♯, y)."""
    x = np.asarray(x, dtype=float)
    _, ginv = metric_at(chart, x)
    derivs = covariant_derivatives(u_field, chart, x)
    nabla_u = np.array([part.vector_part() for part in derivs])
    u_sharp = ginv @ u_field(x).vector_part()
    H = H_field(x).to_tensor(3)
    T = nabla_u - 0.5 * np.einsum("man,a->mn", H, u_sharp)
    return 0.5 * (T - T.T), 0.5 * (T + T.T)


def skew_torsion_residual(
    u_field: FormField,
    H_field: FormField,
    chart: MetricChart,
    x,
    tol: float = GEOMETRY_TOL,
    include_symmetric: bool = False,
) -> ResidualRecord:
    skew, symmetric = torsion_split(u_field, H_field, chart, x)
    residuals = {"skew": float(np.max(np.abs(skew)))}
    if include_symmetric:
        residuals["symmetric"] = float(np.max(np.abs(symmetric)))
    return ResidualRecord.build("skew_torsion", x, residuals, tol)


def omega_transport_residual(
    omega_field: FormField,
    u_field: FormField,
    H_field: FormField,
    chart: MetricChart,
    x,
    tol: float = GEOMETRY_TOL,
) -> ResidualRecord:
    """u∧(∇_wΩ − ½H(w)△₁Ω) per coordinate direction; Θ_w∧u terms drop out."""
    x = np.asarray(x, dtype=float)
    frame = coframe_at(chart, x)
    omega = frame.to_frame(omega_field(x))
    u = frame.to_frame(u_field(x))
    H = H_field(x)
    derivs = covariant_derivatives(omega_field, chart, x)
    residuals = {}
    for mu in range(chart.dim):
        torsion = frame.to_frame(contract(H, chart.unit(mu)))
        gap = frame.to_frame(derivs[mu]) - 0.5 * generalized_product(torsion, omega, 1)
        residuals[f"omega_{chart.coordinate_name(mu)}"] = wedge(u, gap).max_abs()
    return ResidualRecord.build("omega_transport", x, residuals, tol)


# -- field equations -------------------------------------------------------


def einstein_maxwell_residual(
    chart: MetricChart,
    F_field: FormField,
    Lambda: float,
    e: float,
    x,
    tol: float = GEOMETRY_TOL,
) -> ResidualRecord:
    """Ric − ½s g = Λg + 𝔢²F∘F − (𝔢²/2)|F|²g, d∗F = 0 and dF = 0 at x."""
    x = np.asarray(x, dtype=float)
    curv = curvature(chart, x)
    F = F_field(x)
    source = (
        Lambda * curv.metric
        + e * e * form_square(F, 2, chart, x).real
        - 0.5 * e * e * form_norm_sq(F, chart, x) * curv.metric
    )
    residuals = {
        "einstein": float(np.max(np.abs(curv.einstein - source))),
        "maxwell": exterior_derivative(lambda y: hodge_field(F_field(y), chart, y), chart, x).max_abs(),
        "closure": exterior_derivative(F_field, chart, x).max_abs(),
    }
    return ResidualRecord.build("einstein_maxwell", x, residuals, tol)


def sugra6d_residual(chart: MetricChart, H_field: FormField, mu: int, x, tol: float = GEOMETRY_TOL) -> ResidualRecord:
    """Ric = ½H∘H, ∗H = μH and dH = 0 at x."""
    x = np.asarray(x, dtype=float)
    curv = curvature(chart, x)
    H = H_field(x)
    residuals = {
        "einstein": float(np.max(np.abs(curv.ricci - 0.5 * form_square(H, 3, chart, x).real))),
        "self_duality": (hodge_field(H, chart, x) - mu * H).max_abs(),
        "closure": exterior_derivative(H_field, chart, x).max_abs(),
    }
    return ResidualRecord.build("sugra6d", x, residuals, tol)


# -- Kundt and Brinkmann charts --------------------------------------------


def kundt_chart(
    transverse: MetricChart,
    profile: Callable,
    dilaton: Optional[Callable] = None,
    twist: Optional[Callable] = None,
    name: str = "kundt",
    null_domain: Tuple[Tuple[float, float], ...] = ((-1.0, 1.0), (-1.0, 1.0)),
    orientation: int = 1,
    stationary: bool = True,
) -> MetricChart:
    """g = ℋ du⊗du + e^ℱ du⊙dv + du⊙𝒜 + h on (u, v) × transverse chart.

    Stationary data are functions of the transverse point y; otherwise ℋ, ℱ
    and 𝒜 are called as f(u, y).
    """
    n = transverse.dim
    sig = Signature(transverse.signature.p + 1, transverse.signature.q + 1, orientation)

    def at(fn, x):
        return fn(x[2:]) if stationary else fn(x[0], x[2:])

    def metric(x):
        g = np.zeros((n + 2, n + 2))
        g[2:, 2:] = transverse.metric(x[2:])
        g[0, 0] = at(profile, x)
        g[0, 1] = g[1, 0] = np.exp(at(dilaton, x)) if dilaton is not None else 1.0
        if twist is not None:
            a = np.asarray(at(twist, x), dtype=float)
            g[0, 2:] = a
            g[2:, 0] = a
        return g

    coordinates = ("u", "v") + (transverse.coordinates or tuple(f"y{i}" for i in range(n)))
    return MetricChart(
        name=name,
        signature=sig,
        metric=metric,
        domain=tuple(null_domain) + tuple(transverse.domain),
        scale=transverse.scale,
        coordinates=coordinates,
        description=f"Kundt chart over {transverse.name}",
    )


def brinkmann_chart(
    transverse: MetricChart,
    profile: Callable[[np.ndarray], float],
    twist: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    name: str = "brinkmann",
    **kwargs,
) -> MetricChart:
    return kundt_chart(transverse, profile, dilaton=None, twist=twist, name=name, **kwargs)


def kundt_ricci_uu(
    transverse: MetricChart,
    profile: Callable,
    dilaton: Callable,
    y,
) -> float:
    """½∇^{h*}dℋ + ½⟨dℋ, dℱ⟩_h − ½ℋ|dℱ|²_h for stationary non-twisting data."""
    y = np.asarray(y, dtype=float)
    _, hinv = metric_at(transverse, y)
    dH = function_gradient(profile, transverse, y)
    dF = function_gradient(dilaton, transverse, y)
    return float(
        -0.5 * laplacian(profile, transverse, y)
        + 0.5 * dH @ hinv @ dF
        - 0.5 * profile(y) * dF @ hinv @ dF
    )


def kundt_ricci_uv(
    transverse: MetricChart,
    dilaton: Callable,
    y,
) -> float:
    """−½e^ℱ(Δ_hℱ + |dℱ|²_h) for stationary non-twisting data."""
    y = np.asarray(y, dtype=float)
    _, hinv = metric_at(transverse, y)
    dF = function_gradient(dilaton, transverse, y)
    return float(-0.5 * np.exp(dilaton(y)) * (laplacian(dilaton, transverse, y) + dF @ hinv @ dF))


def kundt_ricci_transverse(
    transverse: MetricChart,
    dilaton: Callable,
    y,
) -> np.ndarray:
    """Ric_h − Hess_hℱ − ½dℱ⊗dℱ, the transverse block of the Kundt Ricci tensor."""
    y = np.asarray(y, dtype=float)
    dF = function_gradient(dilaton, transverse, y)
    return curvature(transverse, y).ricci - hessian(dilaton, transverse, y) - 0.5 * np.outer(dF, dF)


def kundt_christoffel(
    transverse: MetricChart,
    profile: Callable,
    dilaton: Callable,
    y,
) -> np.ndarray:
    """Γ^ρ_{μν} of a stationary non-twisting Kundt chart from transverse data.

    Besides Γ^h on the transverse block the nonzero symbols are
    Γ^u_{ui} = Γ^v_{vi} = ½∂_iℱ, Γ^v_{ui} = ½e^{-ℱ}(∂_iℋ − ℋ∂_iℱ),
    Γ^k_{uu} = −½∂^kℋ and Γ^k_{uv} = −½e^ℱ∂^kℱ.
    """
    y = np.asarray(y, dtype=float)
    n = transverse.dim
    _, hinv = metric_at(transverse, y)
    dH = function_gradient(profile, transverse, y)
    dF = function_gradient(dilaton, transverse, y)
    F, H = float(dilaton(y)), float(profile(y))
    gamma = np.zeros((n + 2, n + 2, n + 2))
    gamma[2:, 2:, 2:] = christoffel(transverse, y)
    mixed = 0.5 * np.exp(-F) * (dH - H * dF)
    for rho in (0, 1):
        gamma[rho, rho, 2:] = gamma[rho, 2:, rho] = 0.5 * dF
    gamma[1, 0, 2:] = mixed
    gamma[1, 2:, 0] = mixed
    gamma[2:, 0, 0] = -0.5 * hinv @ dH
    gamma[2:, 0, 1] = gamma[2:, 1, 0] = -0.5 * np.exp(F) * hinv @ dF
    return gamma


def brinkmann_ricci_uu(
    transverse: MetricChart,
    profile: Callable,
    twist: Optional[Callable],
    y,
) -> float:
    """½(|d𝒜|²_h + ∇^{h*}dℋ) for stationary data."""
    y = np.asarray(y, dtype=float)
    value = -0.5 * laplacian(profile, transverse, y)
    if twist is not None:
        def twist_form(z):
            return Multivector.vector(transverse.signature, twist(z))

        F = exterior_derivative(twist_form, transverse, y)
        value += 0.5 * form_norm_sq(F, transverse, y)
    return float(value)
