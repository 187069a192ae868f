"""
Randomized check suites behind the `algebra` and `squares` commands.

A suite is a list of SuiteCheck objects. Each check draws from its own
generator spawned off the run seed, so the report does not depend on how
checks are scheduled across worker threads.
"""

import logging
import time
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    AdjointTypeNotRealized,
    ContractViolation,
    NotASquareError,
    RepresentationError,
    SpinformError,
)
from multivector import (
    ABS_FLOOR,
    Multivector,
    Signature,
    expansion_sign,
    generalized_product,
    geometric_product,
    hodge_star,
    involution,
    random_multivector,
    volume_form,
    volume_square_sign,
    wedge,
)
from radial import RadialParams, Trajectory, complete_initial_data, convergence_order, radial_integrate
from reports import ReportEntry
from solutions import radial_domain
from spinors import (
    BILINEAR,
    HERMITIAN,
    KINDS,
    Pairing,
    SpinorRep,
    admissibility_residual,
    build_rep,
    pairing_table,
    random_spinor,
    reconstruct_spinor,
    solve_admissible,
    square,
)
from truncated import (
    TruncatedMultivector,
    complex_volume,
    project_ell,
    vee_product,
    vee_product_hodge,
)
from verifier import (
    NORMAL_FORM_SIGNATURES,
    annihilator,
    check_constrained,
    check_square_axioms,
    hermitian_bilinear_compatibility,
    normal_form,
    spin_equivariance_residual,
)

logger = logging.getLogger(__name__)

Outcome = Tuple[Dict[str, float], Dict[str, Any]]


@dataclass
class SuiteCheck:
    check_id: str
    run: Callable[[np.random.Generator], Outcome]
    tolerance: float
    params: Optional[Dict[str, Any]] = None


def _execute(check: SuiteCheck, seed_seq: np.random.SeedSequence, params: Dict[str, Any]) -> ReportEntry:
    start = time.perf_counter()
    rng = np.random.default_rng(seed_seq)
    try:
        residuals, details = check.run(rng)
    except SpinformError as e:
        logger.warning(f"Check {check.check_id} failed: {e}")
        residuals, details = {"error": float("inf")}, {"error": str(e)}
    except Exception as e:
        logger.error(f"Check {check.check_id} raised unexpectedly: {e}")
        residuals, details = {"error": float("inf")}, {"error": f"{type(e).__name__}: {e}"}
    merged = {**params, **(check.params or {})}
    return ReportEntry.from_residuals(
        check.check_id, merged, residuals, check.tolerance, time.perf_counter() - start, **details
    )


def run_suite(
    checks: Sequence[SuiteCheck],
    seed: int,
    params: Optional[Dict[str, Any]] = None,
    executor: Optional[Executor] = None,
) -> List[ReportEntry]:
    """Run every check and return the entries ordered by check id."""
    params = params or {}
    streams = np.random.SeedSequence(seed).spawn(len(checks))
    if executor is None:
        entries = [_execute(c, s, params) for c, s in zip(checks, streams)]
    else:
        entries = list(executor.map(lambda pair: _execute(pair[0], pair[1], params), zip(checks, streams)))
    failed = sum(not e.passed for e in entries)
    logger.info(f"Suite finished: {len(entries)} checks, {failed} failed")
    return sorted(entries, key=lambda e: e.check_id)


def _rel(residual: Multivector, *factors: Multivector) -> float:
    scale = 1.0
    for f in factors:
        scale *= max(f.max_abs(), ABS_FLOOR)
    return residual.max_abs() / scale


# -- algebra suite ---------------------------------------------------------


def algebra_checks(sig: Signature, samples: int, tol: float) -> List[SuiteCheck]:
    """Invariant suite of the exterior algebra with ⋄ and, for odd d, of ∨."""
    if samples < 1:
        raise ContractViolation(f"samples must be positive, got {samples}")
    d = sig.dim
    nu = volume_form(sig)

    def associativity(rng):
        worst = 0.0
        for _ in range(samples):
            a, b, c = (random_multivector(sig, rng) for _ in range(3))
            gap = geometric_product(geometric_product(a, b), c) - geometric_product(a, geometric_product(b, c))
            worst = max(worst, _rel(gap, a, b, c))
        return {"associativity": worst}, {}

    def graded_expansion(rng):
        worst = 0.0
        for _ in range(samples):
            ka, kb = rng.integers(0, d + 1, size=2)
            a = random_multivector(sig, rng, grade=int(ka))
            b = random_multivector(sig, rng, grade=int(kb))
            total = Multivector(sig)
            for k in range(d + 1):
                total = total + expansion_sign(k, int(ka)) * generalized_product(a, b, k)
            worst = max(worst, _rel(geometric_product(a, b) - total, a, b))
        return {"graded_expansion": worst}, {}

    def delta_symmetry(rng):
        worst = 0.0
        for _ in range(samples):
            ka, kb = (int(v) for v in rng.integers(0, d + 1, size=2))
            k = int(rng.integers(0, min(ka, kb) + 1))
            a = random_multivector(sig, rng, grade=ka)
            b = random_multivector(sig, rng, grade=kb)
            sign = -1 if ((ka - k) * (kb - k)) % 2 else 1
            gap = generalized_product(a, b, k) - sign * generalized_product(b, a, k)
            worst = max(worst, _rel(gap, a, b))
        return {"delta_symmetry": worst}, {}

    def delta_hodge(rng):
        worst = 0.0
        for _ in range(samples):
            ka = int(rng.integers(0, d + 1))
            kb = int(rng.integers(0, d - ka + 1))
            a = random_multivector(sig, rng, grade=ka)
            b = random_multivector(sig, rng, grade=kb)
            gap = generalized_product(a, hodge_star(b), ka) - hodge_star(wedge(b, a))
            worst = max(worst, _rel(gap, a, b))
        return {"delta_hodge": worst}, {}

    def volume_identities(rng):
        right = left = centrality = 0.0
        odd_power = "parity" if (d - 1) % 2 else None
        for _ in range(samples):
            a = random_multivector(sig, rng)
            tau = involution(a, "reversion")
            left_twist = involution(a, "both") if odd_power else tau
            moved = involution(a, "parity") if odd_power else a
            right = max(right, _rel(geometric_product(a, nu) - hodge_star(tau), a))
            left = max(left, _rel(geometric_product(nu, a) - hodge_star(left_twist), a))
            centrality = max(centrality, _rel(geometric_product(nu, a) - geometric_product(moved, nu), a))
        square_gap = abs(geometric_product(nu, nu).scalar_part - volume_square_sign(sig))
        return {"right": right, "left": left, "centrality": centrality, "volume_square": square_gap}, {}

    def involutions(rng):
        worst = 0.0
        for _ in range(samples):
            a = random_multivector(sig, rng)
            pi_tau = involution(involution(a, "reversion"), "parity")
            tau_pi = involution(involution(a, "parity"), "reversion")
            worst = max(
                worst,
                _rel(pi_tau - tau_pi, a),
                _rel(pi_tau - involution(a, "both"), a),
                _rel(involution(involution(a, "both"), "both") - a, a),
            )
        return {"involutions": worst}, {}

    checks = [
        SuiteCheck("algebra/associativity", associativity, tol),
        SuiteCheck("algebra/graded_expansion", graded_expansion, tol),
        SuiteCheck("algebra/delta_symmetry", delta_symmetry, tol),
        SuiteCheck("algebra/delta_hodge", delta_hodge, tol),
        SuiteCheck("algebra/volume_identities", volume_identities, tol),
        SuiteCheck("algebra/involutions", involutions, tol),
    ]
    if sig.is_odd:
        checks.extend(_truncated_checks(sig, samples, tol))
    return checks


def _truncated_checks(sig: Signature, samples: int, tol: float) -> List[SuiteCheck]:
    nu_c = complex_volume(sig)

    def volume(rng):
        central = 0.0
        for _ in range(samples):
            a = random_multivector(sig, rng)
            central = max(central, _rel(geometric_product(nu_c, a) - geometric_product(a, nu_c), a))
        square_gap = (geometric_product(nu_c, nu_c) - Multivector.scalar(sig, 1.0)).max_abs()
        return {"square": square_gap, "central": central}, {}

    def projections(rng):
        idempotent = orthogonal = complete = 0.0
        for _ in range(samples):
            a = random_multivector(sig, rng)
            plus, minus = project_ell(a, 1), project_ell(a, -1)
            idempotent = max(idempotent, _rel(project_ell(plus, 1) - plus, a))
            orthogonal = max(orthogonal, _rel(project_ell(minus, 1), a))
            complete = max(complete, _rel(plus + minus - a, a))
        return {"idempotent": idempotent, "orthogonal": orthogonal, "complete": complete}, {}

    def vee(rng):
        assoc = presentations = unit = 0.0
        for _ in range(samples):
            for ell in (1, -1):
                a, b, c = (TruncatedMultivector.from_full(random_multivector(sig, rng), ell) for _ in range(3))
                lhs = vee_product(vee_product(a, b), c)
                rhs = vee_product(a, vee_product(b, c))
                assoc = max(assoc, _rel(lhs.mv - rhs.mv, a.mv, b.mv, c.mv))
                presentations = max(presentations, _rel(vee_product(a, b).mv - vee_product_hodge(a, b).mv, a.mv, b.mv))
                one = TruncatedMultivector.one(sig, ell)
                unit = max(unit, _rel(vee_product(one, a).mv - a.mv, a.mv))
        return {"associativity": assoc, "presentations": presentations, "unit": unit}, {}

    return [
        SuiteCheck("algebra/complex_volume", volume, tol),
        SuiteCheck("algebra/projections", projections, tol),
        SuiteCheck("algebra/vee", vee, tol),
    ]


# -- squares suite ---------------------------------------------------------


def _chirality_for(rep: SpinorRep, rng: np.random.Generator, chiral: bool) -> Optional[int]:
    if not chiral or rep.chirality_op is None:
        return None
    return int(rng.choice((1, -1)))


def _real_one_form_kappa(alpha) -> complex:
    """Unit κ that makes the largest one-form coefficient of a Hermitian square real."""
    coeffs = alpha.grade(1).coeffs
    j = int(np.argmax(np.abs(coeffs)))
    if abs(coeffs[j]) <= ABS_FLOOR:
        return 1.0
    return complex(abs(coeffs[j]) / coeffs[j])


def _uses_chiral_normal_form(sig: Signature) -> bool:
    return sig.q == 1 and not sig.is_odd


def squares_checks(
    sig: Signature,
    kinds: Sequence[str],
    samples: int,
    tol: float,
    ell: Optional[int] = None,
    s: int = 1,
) -> List[SuiteCheck]:
    """Representation, pairing and squaring checks for one signature."""
    if samples < 1:
        raise ContractViolation(f"samples must be positive, got {samples}")
    for kind in kinds:
        if kind not in KINDS:
            raise ContractViolation(f"Unknown square kind {kind!r}")
    if sig.is_odd and ell is None:
        ell = 1
    rep = build_rep(sig, ell)

    def representation(rng):
        residuals = {"clifford": rep.clifford_residual()}
        homomorphism = roundtrip = 0.0
        for _ in range(samples):
            a, b = random_multivector(sig, rng), random_multivector(sig, rng)
            if sig.is_odd:
                a, b = TruncatedMultivector.from_full(a, ell), TruncatedMultivector.from_full(b, ell)
                product = vee_product(a, b)
            else:
                product = geometric_product(a, b)
            qa, qb = rep.quantize(a), rep.quantize(b)
            gap = rep.quantize(product) - qa @ qb
            homomorphism = max(homomorphism, float(np.max(np.abs(gap))) / max(a.max_abs() * b.max_abs(), ABS_FLOOR))
            back = rep.dequantize(qa)
            roundtrip = max(roundtrip, (back - a).max_abs() / max(a.max_abs(), ABS_FLOOR))
        residuals["homomorphism"] = homomorphism
        residuals["dequantize_roundtrip"] = roundtrip
        if sig.is_odd:
            residuals["volume_branch"] = float(np.max(np.abs(rep.quantize(complex_volume(sig)) - ell * rep.identity)))
        else:
            op = rep.chirality_op
            residuals["chirality_square"] = float(np.max(np.abs(op @ op - rep.identity)))
            residuals["chirality_anticommutes"] = max(float(np.max(np.abs(op @ g + g @ op))) for g in rep.gammas)
        return residuals, {"n": rep.n}

    checks = [SuiteCheck("squares/representation", representation, tol)]

    def pairings(rng):
        details: Dict[str, Any] = {}
        if sig.dim <= 6:
            details["pairing_table"] = [row for row in pairing_table(sig.dim) if (row["p"], row["q"]) == (sig.p, sig.q)]
        residuals = {}
        for kind in kinds:
            try:
                pairing = solve_admissible(rep, s, kind)
            except AdjointTypeNotRealized as e:
                logger.warning(str(e))
                details[kind] = {"realized": False, "s": s}
                continue
            residuals[f"{kind}_admissibility"] = admissibility_residual(rep, pairing)
            details[kind] = {"realized": True, "s": s, "sigma": pairing.sigma}
        return residuals, details

    checks.append(SuiteCheck("squares/pairings", pairings, tol))

    for kind in kinds:
        try:
            pairing = solve_admissible(rep, s, kind)
        except AdjointTypeNotRealized:
            continue
        checks.extend(_kind_checks(rep, pairing, samples, tol))

    if (sig.p, sig.q) == (5, 1) and HERMITIAN in kinds and BILINEAR in kinds:
        checks.append(_compatibility_check(rep, s, samples, tol))
    return checks


def _kind_checks(rep: SpinorRep, pairing: Pairing, samples: int, tol: float) -> List[SuiteCheck]:
    sig, kind = rep.sig, pairing.kind
    prefix = f"squares/{kind}"

    def axioms(rng):
        worst: Dict[str, float] = {}
        verdicts: Dict[str, int] = {}
        for _ in range(samples):
            mu = _chirality_for(rep, rng, True)
            eta = random_spinor(rep, rng, mu)
            kappa = np.exp(1j * rng.uniform(0, 2 * np.pi)) if kind == HERMITIAN else 1.0
            alpha = square(eta, rep, pairing, kappa)
            report = check_square_axioms(
                alpha, kind, s=pairing.s, kappa=kappa, sigma=pairing.sigma, mu=mu, rng=rng, tol=tol
            )
            verdicts[report.verdict] = verdicts.get(report.verdict, 0) + 1
            values = report.residuals if report.verdict in ("pass", "fail") else {"verdict": float("inf")}
            for name, value in values.items():
                worst[name] = max(worst.get(name, 0.0), value)
        return worst, {"verdicts": verdicts}

    def reconstruction(rng):
        worst = 0.0
        for _ in range(samples):
            eta = random_spinor(rep, rng, _chirality_for(rep, rng, True))
            alpha = square(eta, rep, pairing)
            try:
                rebuilt = reconstruct_spinor(alpha, rep, pairing)
            except NotASquareError:
                worst = float("inf")
                continue
            if kind == BILINEAR:
                gap = min(np.max(np.abs(rebuilt.components - eta.components)),
                          np.max(np.abs(rebuilt.components + eta.components)))
            else:
                gap = (square(rebuilt, rep, pairing) - alpha).max_abs()
            worst = max(worst, float(gap))
        return {"reconstruction": worst}, {}

    def constrained(rng):
        disagreements = 0
        unit_rejected = True
        for _ in range(samples):
            eta = random_spinor(rep, rng)
            alpha = square(eta, rep, pairing)
            q = annihilator(rep, eta.components, rng)
            try:
                if not check_constrained(q, alpha, rep, eta.components):
                    disagreements += 1
            except RepresentationError:
                disagreements += 1
            one = TruncatedMultivector.one(sig, rep.ell) if sig.is_odd else Multivector.scalar(sig, 1.0)
            unit_rejected = unit_rejected and not check_constrained(one, alpha)
        return {"disagreements": float(disagreements), "unit_accepted": 0.0 if unit_rejected else 1.0}, {}

    checks = [
        SuiteCheck(f"{prefix}/axioms", axioms, tol),
        SuiteCheck(f"{prefix}/reconstruction", reconstruction, 1e-9),
        SuiteCheck(f"{prefix}/constrained", constrained, 0.5),
    ]

    if kind == BILINEAR and not sig.is_odd:
        def equivariance(rng):
            worst = max(spin_equivariance_residual(rep, pairing, random_spinor(rep, rng).components, rng)
                        for _ in range(samples))
            return {"spin_equivariance": worst}, {}

        checks.append(SuiteCheck(f"{prefix}/spin_equivariance", equivariance, 1e-9))

    if (sig.p, sig.q) in NORMAL_FORM_SIGNATURES and (kind == HERMITIAN or sig.q == 1):
        def normal_forms(rng):
            worst: Dict[str, float] = {}
            mus: Dict[str, int] = {}
            for _ in range(samples):
                mu = _chirality_for(rep, rng, _uses_chiral_normal_form(sig))
                eta = random_spinor(rep, rng, mu)
                alpha = square(eta, rep, pairing)
                if kind == HERMITIAN and sig.q == 1:
                    alpha = square(eta, rep, pairing, _real_one_form_kappa(alpha))
                form = normal_form(alpha, kind, mu=mu, tol=tol)
                mus[str(form.mu)] = mus.get(str(form.mu), 0) + 1
                for name, value in form.residuals.items():
                    worst[name] = max(worst.get(name, 0.0), value)
            return worst, {"mu": mus}

        checks.append(SuiteCheck(f"{prefix}/normal_form", normal_forms, tol))
    return checks


def _compatibility_check(rep: SpinorRep, s: int, samples: int, tol: float) -> SuiteCheck:
    hermitian = solve_admissible(rep, s, HERMITIAN)
    bilinear = solve_admissible(rep, s, BILINEAR)

    def compatibility(rng):
        factorization = 0.0
        others: Dict[str, float] = {}
        for _ in range(samples):
            mu = int(rng.choice((1, -1)))
            eta = random_spinor(rep, rng, mu)
            alpha_hat = square(eta, rep, hermitian)
            alpha_hat = square(eta, rep, hermitian, _real_one_form_kappa(alpha_hat))
            alpha = square(eta, rep, bilinear)
            report = hermitian_bilinear_compatibility(alpha_hat, alpha, tol=1e-9)
            factorization = max(factorization, report.residuals["alpha=u^Omega"])
            for name, value in report.residuals.items():
                others[name] = max(others.get(name, 0.0), value)
        return {"alpha=u^Omega": factorization}, {"all_relations": others}

    return SuiteCheck("squares/compatibility", compatibility, 1e-9)


# -- radial ODE ------------------------------------------------------------

ODE_CONSTRAINT_TOL = 1e-8
ODE_CLOSED_FORM_TOL = 1e-6
CONVERGENCE_STEP = 0.05
CONVERGENCE_ORDER = 4.0
CONVERGENCE_SLACK = 0.2


def default_ode_span(params: RadialParams) -> Tuple[float, float]:
    if params.lam < 0 and params.e > 0:
        return radial_domain(params)
    return 0.0, 1.0


def ode_entries(
    params: RadialParams,
    r0: Optional[float] = None,
    r1: Optional[float] = None,
    step: float = 1e-3,
    F0: Optional[float] = None,
) -> Tuple[List[ReportEntry], Trajectory]:
    """Integrate the radial system from constraint-completed data and report on it."""
    lo, hi = default_ode_span(params)
    r0 = lo if r0 is None else r0
    r1 = hi if r1 is None else r1
    start = time.perf_counter()
    y0 = complete_initial_data(params, r0, F0=F0)
    trajectory = radial_integrate(y0, (r0, r1), step, params)
    elapsed = time.perf_counter() - start
    echo = {"lam": params.lam, "e": params.e, "c": params.c, "r0": r0, "r1": r1, "step": step}

    entries = [
        ReportEntry.from_residuals(
            "ode/constraint", echo, {"max_constraint": trajectory.max_constraint}, ODE_CONSTRAINT_TOL, elapsed,
            steps=len(trajectory.r) - 1, truncated=trajectory.truncated, final_r=float(trajectory.r[-1]),
        )
    ]
    if params.lam < 0 and params.e > 0 and F0 is None:
        entries.append(ReportEntry.from_residuals(
            "ode/closed_form", echo, trajectory.closed_form_error(), ODE_CLOSED_FORM_TOL,
        ))
        order = convergence_order(params, (r0, r1), CONVERGENCE_STEP)
        entries.append(ReportEntry.from_residuals(
            "ode/convergence_order", echo, {"order_gap": abs(order - CONVERGENCE_ORDER)}, CONVERGENCE_SLACK,
            observed_order=order,
        ))
    return sorted(entries, key=lambda e: e.check_id), trajectory
