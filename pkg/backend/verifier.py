"""
Algebraic characterization of spinor squares.

check_square_axioms decides whether a form is a Hermitian or bilinear square
(idempotency, Fierz identity, reality or symmetry, optional chirality).
normal_form splits squares of the low-dimensional signatures into named
components and checks their defining equations.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np

from config import get_tolerance
from errors import ConstraintViolation, ContractViolation, RepresentationError
from multivector import (
    ABS_FLOOR,
    Multivector,
    Signature,
    adjoint_twist,
    generalized_product,
    geometric_product,
    hodge_star,
    interior,
    involution,
    metric_pairing,
    random_multivector,
    volume_form,
    wedge,
    contract,
)
from reports import AxiomReport
from spinors import BILINEAR, HERMITIAN, Pairing, SpinorRep, Square
from truncated import TruncatedMultivector, as_truncated, vee_product

logger = logging.getLogger(__name__)

WITNESS_ATTEMPTS = 64
WITNESS_THRESHOLD = 1e-6


def _product(a: Square, b: Square) -> Square:
    if isinstance(a, TruncatedMultivector):
        return vee_product(a, as_truncated(b, a.ell))
    return geometric_product(a, b)


def _twist(a: Square, s: int) -> Square:
    if isinstance(a, TruncatedMultivector):
        return TruncatedMultivector(adjoint_twist(a.mv, s), a.ell)
    return adjoint_twist(a, s)


def _coeffs(a: Square) -> np.ndarray:
    return a.mv.coeffs if isinstance(a, TruncatedMultivector) else a.coeffs


def _sig(a: Square) -> Signature:
    return a.sig


def module_dimension(sig: Signature) -> int:
    """2^{d/2} for even d, 2^{(d-1)/2} for odd d."""
    return 1 << (sig.dim // 2)


def _max_abs(a: Square) -> float:
    return float(np.max(np.abs(_coeffs(a))))


def random_witness(sig: Signature, rng: np.random.Generator, ell: Optional[int] = None) -> Square:
    beta = random_multivector(sig, rng)
    if ell is not None:
        beta = TruncatedMultivector.from_full(beta, ell)
    return beta / beta.norm()


def _find_witness(alpha: Square, rng: np.random.Generator, attempts: int) -> Optional[Square]:
    ell = alpha.ell if isinstance(alpha, TruncatedMultivector) else None
    for _ in range(attempts):
        beta = random_witness(_sig(alpha), rng, ell)
        if abs(_product(alpha, beta).scalar_part) > WITNESS_THRESHOLD * alpha.norm():
            return beta
    return None


def check_square_axioms(
    alpha: Square,
    kind: str,
    s: int = 1,
    kappa: complex = 1.0,
    sigma: Optional[int] = None,
    mu: Optional[int] = None,
    beta: Optional[Square] = None,
    rng: Optional[np.random.Generator] = None,
    tol: Optional[float] = None,
    attempts: int = WITNESS_ATTEMPTS,
) -> AxiomReport:
    """Evaluate the square axioms of the requested kind on a candidate form.

    Quadratic residuals are relative to ‖α‖²·n and linear ones to ‖α‖,
    where n is the spinor module dimension.
    """
    tol = get_tolerance() if tol is None else tol
    sig = _sig(alpha)
    if kind not in (HERMITIAN, BILINEAR):
        raise ContractViolation(f"Unknown square kind {kind!r}")
    if kind == BILINEAR and sigma not in (1, -1):
        raise ContractViolation("Bilinear axioms need the symmetry type σ = ±1")
    if sig.is_odd != isinstance(alpha, TruncatedMultivector):
        raise ContractViolation(f"Squares in {sig} must live in the {'truncated' if sig.is_odd else 'full'} algebra")
    if mu is not None and sig.is_odd:
        raise ContractViolation("Chirality only applies in even dimension")

    norm = alpha.norm()
    if norm <= ABS_FLOOR:
        return AxiomReport(kind=kind, signature=str(sig), residuals={"norm": 0.0}, tolerance=tol, verdict="vanishing")

    n = module_dimension(sig)
    quadratic_scale = norm * norm * n
    residuals: Dict[str, float] = {}

    idempotent = _product(alpha, alpha) - n * alpha.scalar_part * alpha
    residuals["idempotency"] = idempotent.max_abs() / quadratic_scale

    if beta is None:
        beta = _find_witness(alpha, rng if rng is not None else np.random.default_rng(0), attempts)
        if beta is None:
            logger.warning(f"No witness β with (α⋄β)^(0) ≠ 0 after {attempts} attempts in {sig}")
            return AxiomReport(kind=kind, signature=str(sig), residuals=residuals, tolerance=tol, verdict="degenerate")
    alpha_beta = _product(alpha, beta)
    fierz = _product(alpha_beta, alpha) - n * alpha_beta.scalar_part * alpha
    residuals["fierz"] = fierz.max_abs() / (quadratic_scale * max(beta.norm(), ABS_FLOOR))

    if kind == HERMITIAN:
        kappa = complex(kappa)
        reality = _twist(kappa.conjugate() * alpha, s) - kappa * alpha.conj()
        residuals["reality"] = reality.max_abs() / norm
    else:
        symmetry = _twist(alpha, s) - sigma * alpha
        residuals["symmetry"] = symmetry.max_abs() / norm

    if mu is not None:
        phase = 1j ** ((sig.q + sig.dim // 2) % 4)
        chiral = phase * hodge_star(involution(alpha, "both")) - mu * alpha
        residuals["chirality"] = chiral.max_abs() / norm

    verdict = "pass" if max(residuals.values()) <= tol else "fail"
    witness = [[float(c.real), float(c.imag)] for c in _coeffs(beta)]
    return AxiomReport(kind=kind, signature=str(sig), residuals=residuals, tolerance=tol, verdict=verdict, witness=witness)


def annihilator(rep: SpinorRep, eta: np.ndarray, rng: np.random.Generator) -> Square:
    """Symbol of A(Id - ηη^†/η^†η) for a random A; it kills η."""
    eta = np.asarray(eta, dtype=complex)
    a = rng.standard_normal((rep.n, rep.n)) + 1j * rng.standard_normal((rep.n, rep.n))
    projector = rep.identity - np.outer(eta, np.conj(eta)) / np.vdot(eta, eta)
    return rep.dequantize(a @ projector)


def constrained_residual(q: Square, alpha: Square) -> float:
    if isinstance(alpha, TruncatedMultivector):
        q = as_truncated(q, alpha.ell)
    product = _product(q, alpha)
    return product.max_abs() / max(alpha.norm() * max(q.norm(), ABS_FLOOR), ABS_FLOOR)


def check_constrained(
    q: Square,
    alpha: Square,
    rep: Optional[SpinorRep] = None,
    eta: Optional[np.ndarray] = None,
    tol: float = 1e-9,
) -> bool:
    """Whether 𝔮⋄α = 0 (𝔮∨α in odd d); cross-checked against 𝔮·η = 0 when η is given."""
    if q.is_zero():
        return True
    algebraic = constrained_residual(q, alpha) <= tol
    if rep is not None and eta is not None:
        eta = np.asarray(eta, dtype=complex)
        kernel = np.linalg.norm(rep.quantize(q) @ eta) <= tol * np.linalg.norm(rep.quantize(q)) * np.linalg.norm(eta)
        if kernel != algebraic:
            raise RepresentationError(
                f"Constraint test disagrees with the matrix kernel in {q.sig}: form says {algebraic}, matrix says {kernel}"
            )
    return algebraic


def spin_equivariance_residual(rep: SpinorRep, pairing: Pairing, eta: np.ndarray, rng: np.random.Generator) -> float:
    """Move η by a random even unit versor g and compare quantized bilinear squares.

    quantize(square(gη)) must equal ±Q(g)·quantize(square(η))·Q(g)^{-1}.
    """
    from spinors import square

    sig = rep.sig
    versor = Multivector.scalar(sig, 1.0)
    for _ in range(2):
        while True:
            v = random_multivector(sig, rng, grade=1, real=True)
            length = metric_pairing(v, v).real
            if abs(length) > 1e-3:
                break
        versor = geometric_product(versor, v / np.sqrt(abs(length)))
    g = rep.quantize(versor)
    moved = square(g @ eta, rep, pairing)
    target = g @ rep.quantize(square(eta, rep, pairing)) @ np.linalg.inv(g)
    got = rep.quantize(moved)
    scale = max(np.max(np.abs(target)), ABS_FLOOR)
    return float(min(np.max(np.abs(got - target)), np.max(np.abs(got + target))) / scale)


# -- normal forms ----------------------------------------------------------

NORMAL_FORM_SIGNATURES = ((2, 0), (3, 0), (4, 0), (3, 1), (5, 1))


@dataclass
class NormalForm:
    """Named components of a square plus the residual of each defining equation."""

    signature: str
    kind: str
    components: Dict[str, Union[complex, Multivector]] = field(default_factory=dict)
    residuals: Dict[str, float] = field(default_factory=dict)
    tolerance: float = 1e-10
    mu: Optional[int] = None

    @property
    def violations(self) -> Dict[str, float]:
        return {name: value for name, value in self.residuals.items() if not value <= self.tolerance}

    @property
    def passed(self) -> bool:
        return not self.violations

    def require(self) -> "NormalForm":
        if not self.passed:
            raise ConstraintViolation(self.violations, self.tolerance, self.signature)
        return self


def _imag_size(x) -> float:
    if isinstance(x, Multivector):
        return float(np.max(np.abs(x.coeffs.imag)))
    return abs(complex(x).imag)


def _top(a: Multivector) -> complex:
    """Coefficient of ν (orientation included)."""
    return a.coeffs[-1] * a.sig.orientation


def isotropic_conjugate(u: Multivector) -> Multivector:
    """An isotropic one-form v with ⟨u,v⟩ = 1 for isotropic nonzero u."""
    sig = u.sig
    eps = sig.eps
    u_vec = u.vector_part()
    k = int(np.argmax(np.abs(eps * u_vec)))
    c = eps[k] * u_vec[k]
    if abs(c) <= ABS_FLOOR:
        raise ContractViolation("Cannot build a conjugate of the zero one-form")
    w = Multivector.blade(sig, (k,))
    ww = float(eps[k])
    return w / c - (ww / (2 * c * c)) * u.grade(1)


def decomposability_residual(alpha: Multivector, k: int) -> float:
    """Relative size of the (k+1)-th singular value of w ↦ ι_w α."""
    d = alpha.sig.dim
    rows = []
    for i in range(d):
        w = np.zeros(d)
        w[i] = 1.0
        rows.append(contract(alpha, w).coeffs)
    singular = np.linalg.svd(np.array(rows), compute_uv=False)
    if singular[0] <= ABS_FLOOR or len(singular) <= k:
        return 0.0
    return float(singular[k] / singular[0])


def _normal_form_20(a: Multivector, mu: Optional[int], scale: float) -> NormalForm:
    sig = a.sig
    r = a.scalar_part
    theta = a.grade(1)
    f = _top(a) / 1j
    res = {
        "reality": max(_imag_size(r), _imag_size(theta), _imag_size(f)) / scale,
        "r^2=f^2+<theta,theta>": abs(r * r - f * f - metric_pairing(theta, theta)) / scale ** 2,
    }
    if mu is not None:
        res["chiral:theta=0"] = theta.max_abs() / scale
        res["chiral:f=mu*r"] = abs(f - mu * r) / scale
    return NormalForm(str(sig), HERMITIAN, {"r": r, "theta": theta, "f": f}, res, mu=mu)


def _normal_form_30(a: TruncatedMultivector, scale: float) -> NormalForm:
    r = a.scalar_part
    theta = a.grade(1)
    res = {
        "reality": max(_imag_size(r), _imag_size(theta)) / scale,
        "r^2=<theta,theta>": abs(r * r - metric_pairing(theta, theta)) / scale ** 2,
    }
    return NormalForm(str(a.sig), HERMITIAN, {"r": r, "theta": theta}, res, mu=None)


def _normal_form_40(a: Multivector, scale: float) -> NormalForm:
    sig = a.sig
    nu = volume_form(sig)
    r = a.scalar_part
    theta = a.grade(1)
    omega = -1j * a.grade(2)
    # α^(3) = i∗ϑ and ∗∗ = -1 on one-forms in (4,0)
    vartheta = 1j * hodge_star(a.grade(3))
    f = _top(a)

    def pair(x, y):
        return metric_pairing(x, y)

    sq = scale ** 2
    res = {
        "reality": max(_imag_size(x) for x in (r, theta, omega, vartheta, f)) / scale,
        "norms_sum=3r^2": abs(pair(theta, theta) + pair(omega, omega) + pair(vartheta, vartheta) + f * f - 3 * r * r) / sq,
        "*(omega^vartheta)=r*theta": (hodge_star(wedge(omega, vartheta)) - r * theta).max_abs() / sq,
        "*(theta^vartheta)+f*(*omega)+r*omega=0": (
            hodge_star(wedge(theta, vartheta)) + f * hodge_star(omega) + r * omega
        ).max_abs() / sq,
        "theta^omega=r*vartheta": (wedge(theta, omega) - r * hodge_star(vartheta)).max_abs() / sq,
        "omega^omega=-2rf*nu": (wedge(omega, omega) + 2 * r * f * nu).max_abs() / sq,
        "<vartheta,theta>=0": abs(pair(vartheta, theta)) / sq,
        "<vartheta,vartheta>=r^2-f^2": abs(pair(vartheta, vartheta) - (r * r - f * f)) / sq,
        "<theta,theta>=r^2-f^2": abs(pair(theta, theta) - (r * r - f * f)) / sq,
        "<omega,omega>=r^2+f^2": abs(pair(omega, omega) - (r * r + f * f)) / sq,
    }
    components = {"r": r, "theta": theta, "omega": omega, "vartheta": vartheta, "f": f}
    return NormalForm(str(sig), HERMITIAN, components, res, mu=None)


def _infer_mu(a: Multivector, candidates, builder) -> NormalForm:
    forms = [builder(mu) for mu in candidates]
    return min(forms, key=lambda nf: max(nf.residuals.values()))


def _normal_form_31(a: Multivector, kind: str, mu: Optional[int], scale: float) -> NormalForm:
    sig = a.sig

    def hermitian(m: int) -> NormalForm:
        u = a.grade(1)
        res = {
            "reality": _imag_size(u) / scale,
            "<u,u>=0": abs(metric_pairing(u, u)) / scale ** 2,
            "alpha3=i*mu*(*u)": (a.grade(3) - 1j * m * hodge_star(u)).max_abs() / scale,
            "grades": max(a.grade(k).max_abs() for k in (0, 2, 4)) / scale,
        }
        return NormalForm(str(sig), HERMITIAN, {"u": u.real}, res, mu=m)

    def bilinear(m: int) -> NormalForm:
        two = a.grade(2)
        res = {
            "grades": max(a.grade(k).max_abs() for k in (0, 1, 3, 4)) / scale,
            "alpha*alpha=0": geometric_product(a, a).max_abs() / scale ** 2,
            "i*(*alpha)=mu*alpha": (1j * hodge_star(two) - m * two).max_abs() / scale,
            "decomposable": decomposability_residual(two, 2),
        }
        return NormalForm(str(sig), BILINEAR, {"alpha2": two}, res, mu=m)

    builder = hermitian if kind == HERMITIAN else bilinear
    return builder(mu) if mu is not None else _infer_mu(a, (1, -1), builder)


def gauge_fixed_omega(alpha_hat: Multivector, v: Multivector) -> Multivector:
    """ω_uv = ι_{v♯}(-i α̂^(3)), which satisfies ω_uv(v♯) = 0."""
    return interior(v, -1j * alpha_hat.grade(3))


def _normal_form_51(a: Multivector, kind: str, mu: Optional[int], v: Optional[Multivector], scale: float) -> NormalForm:
    sig = a.sig

    def hermitian(m: int) -> NormalForm:
        u = a.grade(1).real
        sq = scale ** 2
        res = {
            "reality": max(_imag_size(a.grade(1)), float(np.max(np.abs(a.grade(3).coeffs.real))),
                           _imag_size(a.grade(5))) / scale,
            "grades": max(a.grade(k).max_abs() for k in (0, 2, 4, 6)) / scale,
            "<u,u>=0": abs(metric_pairing(u, u)) / sq,
            "alpha5=-mu*(*u)": (a.grade(5) + m * hodge_star(u)).max_abs() / scale,
        }
        components = {"u": u}
        if u.norm() > ABS_FLOOR:
            conj_v = v if v is not None else isotropic_conjugate(u)
            omega = gauge_fixed_omega(a, conj_v)
            u_omega = wedge(u, omega)
            ww = wedge(omega, omega)
            uv = wedge(u, conj_v)
            res.update({
                "<u,v>=1": abs(metric_pairing(u, conj_v) - 1),
                "<v,v>=0": abs(metric_pairing(conj_v, conj_v)),
                "alpha3=i*u^omega": (a.grade(3) - 1j * u_omega).max_abs() / scale,
                "<omega,omega>=2": abs(metric_pairing(omega, omega) - 2),
                "omega(u#)=0": interior(u, omega).max_abs() / scale,
                "*(u^omega)=mu*u^omega": (hodge_star(u_omega) - m * u_omega).max_abs() / scale,
                "2mu*(*u)=u^omega^omega": (2 * m * hodge_star(u) - wedge(u, ww)).max_abs() / scale,
                "*u=(mu/2)u^omega^omega": (hodge_star(u) - 0.5 * m * wedge(u, ww)).max_abs() / scale,
                "*v=-(mu/2)v^omega^omega": (hodge_star(conj_v) + 0.5 * m * wedge(conj_v, ww)).max_abs() * scale,
                "*(u^v)=(mu/2)omega^omega": (hodge_star(uv) - 0.5 * m * ww).max_abs(),
                "*omega=-mu*u^v^omega": (hodge_star(omega) + m * wedge(uv, omega)).max_abs(),
                "*(v^omega)=-mu*v^omega": (hodge_star(wedge(conj_v, omega)) + m * wedge(conj_v, omega)).max_abs() * scale,
            })
            components.update({"v": conj_v, "omega": omega})
        return NormalForm(str(sig), HERMITIAN, components, res, mu=m)

    def bilinear(m: int) -> NormalForm:
        three = a.grade(3)
        res = {
            "grades": max(a.grade(k).max_abs() for k in (0, 1, 2, 4, 5, 6)) / scale,
            "*alpha=mu*alpha": (hodge_star(three) - m * three).max_abs() / scale,
            "decomposable": decomposability_residual(three, 3),
        }
        return NormalForm(str(sig), BILINEAR, {"alpha3": three}, res, mu=m)

    builder = hermitian if kind == HERMITIAN else bilinear
    return builder(mu) if mu is not None else _infer_mu(a, (1, -1), builder)


def normal_form(
    alpha: Square,
    kind: str = HERMITIAN,
    mu: Optional[int] = None,
    conjugate: Optional[Multivector] = None,
    tol: Optional[float] = None,
) -> NormalForm:
    """Split a square of a supported low-dimensional signature into named parts.

    The residual names spell the equation they measure. Use `.require()` to
    turn violations into a ConstraintViolation.
    """
    tol = get_tolerance() if tol is None else tol
    sig = alpha.sig
    key = (sig.p, sig.q)
    if key not in NORMAL_FORM_SIGNATURES:
        raise ContractViolation(f"No normal form for signature {sig}; supported: {NORMAL_FORM_SIGNATURES}")
    scale = max(alpha.max_abs(), ABS_FLOOR)
    if key == (3, 0):
        if kind != HERMITIAN:
            raise ContractViolation("Only Hermitian squares have a normal form in (3,0)")
        result = _normal_form_30(as_truncated(alpha), scale)
    elif key in ((2, 0), (4, 0)):
        if kind != HERMITIAN:
            raise ContractViolation(f"Only Hermitian squares have a normal form in {sig}")
        result = _normal_form_20(alpha, mu, scale) if key == (2, 0) else _normal_form_40(alpha, scale)
    elif key == (3, 1):
        result = _normal_form_31(alpha, kind, mu, scale)
    else:
        result = _normal_form_51(alpha, kind, mu, conjugate, scale)
    result.tolerance = tol
    if not result.passed:
        logger.info(f"Normal form in {sig} violates {sorted(result.violations)}")
    return result


@dataclass
class CompatibilityReport:
    residuals: Dict[str, float]
    tolerance: float
    mu: int
    phase_shift: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(value <= self.tolerance for value in self.residuals.values())


def hermitian_bilinear_compatibility(
    alpha_hat: Multivector,
    alpha: Multivector,
    v: Optional[Multivector] = None,
    mu: Optional[int] = None,
    reference: Optional[Multivector] = None,
    tol: float = 1e-9,
) -> CompatibilityReport:
    """Check that α̂ and α are the Hermitian and bilinear squares of one spinor in (5,1).

    With a reference bilinear square the relative phase e^{2iφ} between α and
    the reference is reported: a spinor rescaled by e^{iφ} keeps α̂ and turns
    α into e^{2iφ}α.
    """
    sig = alpha_hat.sig
    if (sig.p, sig.q) != (5, 1):
        raise ContractViolation(f"Hermitian/bilinear compatibility is stated in (5,1), got {sig}")
    if alpha.sig != sig:
        raise ContractViolation(f"Signature mismatch: {sig} vs {alpha.sig}")
    u = alpha_hat.grade(1).real
    if u.norm() <= ABS_FLOOR:
        raise ContractViolation("The Hermitian square has no one-form part")
    if v is None:
        v = isotropic_conjugate(u)
    if mu is None:
        mu = normal_form(alpha_hat, HERMITIAN).mu
    omega = gauge_fixed_omega(alpha_hat, v)
    big_omega = interior(v, alpha)
    alpha_bar = alpha.conj()
    big_omega_bar = big_omega.conj()

    u_scale = max(u.max_abs(), ABS_FLOOR)
    a_scale = max(alpha.max_abs(), ABS_FLOOR)
    residuals = {
        "u=(mu/4)*(Omega^alpha_bar)": (u - 0.25 * mu * hodge_star(wedge(big_omega, alpha_bar))).max_abs() / u_scale,
        "omega=-(i/4)Omega△1Omega_bar": (omega + 0.25j * generalized_product(big_omega, big_omega_bar, 1)).max_abs(),
        "alpha=u^Omega": (alpha - wedge(u, big_omega)).max_abs() / a_scale,
        "Omega^Omega_bar=2omega^omega": (wedge(big_omega, big_omega_bar) - 2 * wedge(omega, omega)).max_abs(),
    }
    phase = None
    if reference is not None:
        overlap = np.vdot(reference.coeffs, alpha.coeffs)
        if abs(overlap) > ABS_FLOOR:
            phase = float(np.angle(overlap))
            proportional = alpha - (overlap / np.vdot(reference.coeffs, reference.coeffs)) * reference
            residuals["alpha∝reference"] = proportional.max_abs() / a_scale
    return CompatibilityReport(residuals=residuals, tolerance=tol, mu=mu, phase_shift=phase)
