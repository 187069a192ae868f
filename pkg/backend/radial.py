"""
Radial reduction of the six-dimensional system.

State vector y = [K, K', F, F', ρ, H̄, H̄'] in the radial coordinate r:

    K'' + K'² = 2λ,   F'' + K'F' = 𝔢² e^{2(F-K)},   ρ' = e^{-K},   H̄'' + K'H̄' = 0

with the Hamiltonian constraint C = 3K'² − 2F'² + 2𝔢²e^{2(F−K)} − 6λ, which
obeys C' = −2K'C along solutions.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel

from errors import ConstraintViolation, ContractViolation
from multivector import ABS_FLOOR

logger = logging.getLogger(__name__)

K, DK, F, DF, RHO, HBAR, DHBAR = range(7)
STATE_SIZE = 7
EXP_K_FLOOR = 1e-8

# Butcher tableau of the classical 4th-order method
RK4_A = np.array([
    [0.0, 0.0, 0.0, 0.0],
    [0.5, 0.0, 0.0, 0.0],
    [0.0, 0.5, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
])
RK4_B = np.array([1 / 6, 1 / 3, 1 / 3, 1 / 6])
RK4_C = np.array([0.0, 0.5, 0.5, 1.0])


@dataclass(frozen=True)
class RadialParams:
    """λ: Einstein constant of X; e: flux 𝔢; c: warp amplitude; m1, m2: H̄ = m1ρ + m2; rho_star: Liouville shift."""

    lam: float
    e: float
    c: float = 1.0
    m1: float = 0.0
    m2: float = 0.0
    rho_star: float = -1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ContractViolation(f"Warp amplitude c must be positive, got {self.c}")

    @property
    def frequency(self) -> float:
        return float(np.sqrt(2 * abs(self.lam)))

    @property
    def liouville_energy(self) -> float:
        """E = 3c²|λ|, the energy of the hyperbolic Liouville branch (λ < 0)."""
        return 3 * self.c ** 2 * abs(self.lam)


class RadialState(BaseModel):
    r: float
    K: float
    dK: float
    F: float
    dF: float
    rho: float
    Hbar: float
    dHbar: float
    C: float

    @classmethod
    def from_vector(cls, r: float, y: np.ndarray, params: RadialParams) -> "RadialState":
        return cls(
            r=float(r), K=float(y[K]), dK=float(y[DK]), F=float(y[F]), dF=float(y[DF]),
            rho=float(y[RHO]), Hbar=float(y[HBAR]), dHbar=float(y[DHBAR]),
            C=float(hamiltonian_constraint(y, params)),
        )


def radial_rhs(r: float, y: np.ndarray, params: RadialParams) -> np.ndarray:
    if not np.isfinite(y[K]) or np.exp(y[K]) <= EXP_K_FLOOR:
        raise ContractViolation(f"Warp factor e^K collapsed at r={r}")
    source = params.e ** 2 * np.exp(2 * (y[F] - y[K]))
    out = np.empty(STATE_SIZE)
    out[K] = y[DK]
    out[DK] = 2 * params.lam - y[DK] ** 2
    out[F] = y[DF]
    out[DF] = -y[DK] * y[DF] + source
    out[RHO] = np.exp(-y[K])
    out[HBAR] = y[DHBAR]
    out[DHBAR] = -y[DK] * y[DHBAR]
    return out


def hamiltonian_constraint(y: np.ndarray, params: RadialParams) -> float:
    return float(
        3 * y[DK] ** 2 - 2 * y[DF] ** 2 + 2 * params.e ** 2 * np.exp(2 * (y[F] - y[K])) - 6 * params.lam
    )


def constraint_derivative(y: np.ndarray, params: RadialParams) -> float:
    """dC/dr along the flow, by the chain rule through radial_rhs."""
    dy = radial_rhs(0.0, y, params)
    source = params.e ** 2 * np.exp(2 * (y[F] - y[K]))
    return float(6 * y[DK] * dy[DK] - 4 * y[DF] * dy[DF] + 4 * source * (y[DF] - y[DK]))


def warp_profile(r, params: RadialParams) -> Tuple[np.ndarray, np.ndarray]:
    """K and K' of the zero-phase solution of (e^K)'' = 2λe^K."""
    r = np.asarray(r, dtype=float)
    k = params.frequency
    if params.lam < 0:
        cos = np.cos(k * r)
        if np.any(cos <= 0):
            raise ContractViolation(f"r outside (-π/2k, π/2k) with k={k}")
        return np.log(params.c * cos), -k * np.tan(k * r)
    if params.lam > 0:
        return np.log(params.c * np.cosh(k * r)), k * np.tanh(k * r)
    return np.full_like(r, np.log(params.c)), np.zeros_like(r)


def rho_profile(r, params: RadialParams) -> np.ndarray:
    """ρ(r) = ∫_0^r e^{-K}, closed form for λ < 0."""
    if params.lam >= 0:
        raise ContractViolation("Closed-form ρ(r) is only provided for λ < 0")
    k = params.frequency
    r = np.asarray(r, dtype=float)
    return np.log(np.abs(1 / np.cos(k * r) + np.tan(k * r))) / (params.c * k)


def closed_form_state(r: float, params: RadialParams) -> np.ndarray:
    """The exact λ < 0 solution: hyperbolic Liouville branch for F, H̄ = m1ρ + m2."""
    if params.lam >= 0:
        raise ContractViolation("The closed-form dilaton is only known for λ < 0")
    if params.e <= 0:
        raise ContractViolation(f"The Liouville branch needs 𝔢 > 0, got {params.e}")
    Kr, dKr = warp_profile(r, params)
    rho = float(rho_profile(r, params))
    root = np.sqrt(params.liouville_energy)
    shift = root * (rho - params.rho_star)
    if shift <= 0:
        raise ContractViolation(f"ρ(r)={rho:.6g} must exceed ρ*={params.rho_star}")
    Fr = -np.log(params.e / root * np.sinh(shift))
    dFr = -root / np.tanh(shift) * np.exp(-Kr)
    y = np.empty(STATE_SIZE)
    y[K], y[DK], y[F], y[DF] = Kr, dKr, Fr, dFr
    y[RHO] = rho
    y[HBAR] = params.m1 * rho + params.m2
    y[DHBAR] = params.m1 * np.exp(-Kr)
    return y


def rho_star_from_radius(params: RadialParams) -> float:
    """r* with ρ(r*) = ρ*, where e^{-F} vanishes."""
    k = params.frequency
    return float(np.arctan(np.sinh(params.c * k * params.rho_star)) / k)


def complete_initial_data(
    params: RadialParams,
    r0: float,
    F0: Optional[float] = None,
    sign: Optional[int] = None,
) -> np.ndarray:
    """Initial state at r0 with F' solved from C = 0.

    K, K' come from the warp profile. F0 defaults to the closed form for
    λ < 0 and to 0 otherwise; the sign of F' follows the closed form unless given.
    """
    Kr, dKr = warp_profile(r0, params)
    y = np.zeros(STATE_SIZE)
    y[K], y[DK] = float(Kr), float(dKr)
    reference = closed_form_state(r0, params) if params.lam < 0 and params.e > 0 else None
    if F0 is None:
        F0 = reference[F] if reference is not None else 0.0
    y[F] = F0
    if reference is not None:
        y[RHO] = reference[RHO]
    y[HBAR] = params.m1 * y[RHO] + params.m2
    y[DHBAR] = params.m1 * np.exp(-y[K])

    discriminant = 0.5 * (3 * y[DK] ** 2 + 2 * params.e ** 2 * np.exp(2 * (y[F] - y[K])) - 6 * params.lam)
    if discriminant < 0:
        raise ConstraintViolation({"discriminant": float(discriminant)}, 0.0, "radial")
    if sign is None:
        sign = int(np.sign(reference[DF])) if reference is not None else -1
    y[DF] = sign * np.sqrt(discriminant)

    if params.lam < 0:
        energy = np.exp(2 * y[K]) * y[DF] ** 2 - params.e ** 2 * np.exp(2 * y[F])
        if energy <= 0:
            raise ContractViolation(f"λ < 0 requires Liouville energy E > 0, got {energy:.6g}")
    return y


@dataclass
class Trajectory:
    r: np.ndarray
    states: np.ndarray
    constraint: np.ndarray
    params: RadialParams
    truncated: bool = False

    @property
    def max_constraint(self) -> float:
        return float(np.max(np.abs(self.constraint)))

    def records(self) -> List[RadialState]:
        return [RadialState.from_vector(r, y, self.params) for r, y in zip(self.r, self.states)]

    def closed_form_error(self) -> Dict[str, float]:
        """Max relative deviation of e^K, e^{-F} and H̄ from the λ < 0 closed form."""
        exact = np.array([closed_form_state(r, self.params) for r in self.r])
        scale_hbar = max(1.0, float(np.max(np.abs(exact[:, HBAR]))))
        return {
            "warp": float(np.max(np.abs(np.exp(self.states[:, K]) - np.exp(exact[:, K])) / np.exp(exact[:, K]))),
            "dilaton": float(
                np.max(np.abs(np.exp(-self.states[:, F]) - np.exp(-exact[:, F])) / np.exp(-exact[:, F]))
            ),
            "hbar": float(np.max(np.abs(self.states[:, HBAR] - exact[:, HBAR])) / scale_hbar),
        }


def rk4_step(r: float, y: np.ndarray, h: float, params: RadialParams) -> np.ndarray:
    stages = np.zeros((4, STATE_SIZE))
    for i in range(4):
        stages[i] = radial_rhs(r + RK4_C[i] * h, y + h * RK4_A[i, :i] @ stages[:i], params)
    return y + h * RK4_B @ stages


def radial_integrate(
    y0: np.ndarray,
    r_span: Tuple[float, float],
    step: float,
    params: RadialParams,
    constraint_tol: float = 1e-12,
) -> Trajectory:
    """Fixed-step RK4 from r_span[0] to r_span[1].

    A collapsing warp factor or a non-finite state ends the trajectory early
    with `truncated=True`.
    """
    r0, r1 = map(float, r_span)
    if not step > 0 or r1 <= r0:
        raise ContractViolation(f"Need step > 0 and r1 > r0, got step={step}, span={r_span}")
    y = np.asarray(y0, dtype=float).copy()
    if y.shape != (STATE_SIZE,):
        raise ContractViolation(f"State vector needs {STATE_SIZE} entries, got {y.shape}")
    c0 = hamiltonian_constraint(y, params)
    if abs(c0) > constraint_tol:
        raise ConstraintViolation({"initial_constraint": abs(c0)}, constraint_tol, "radial")

    n = max(1, int(round((r1 - r0) / step)))
    h = (r1 - r0) / n
    rs, states = [r0], [y.copy()]
    truncated = False
    for i in range(n):
        r = r0 + i * h
        try:
            nxt = rk4_step(r, y, h, params)
        except ContractViolation:
            truncated = True
        else:
            truncated = not np.all(np.isfinite(nxt)) or np.exp(nxt[K]) <= EXP_K_FLOOR
        if truncated:
            logger.warning(f"Radial trajectory truncated at r={r:.6g} (λ={params.lam}, 𝔢={params.e})")
            break
        y = nxt
        rs.append(r0 + (i + 1) * h)
        states.append(y.copy())

    states_arr = np.array(states)
    constraint = np.array([hamiltonian_constraint(s, params) for s in states_arr])
    return Trajectory(np.array(rs), states_arr, constraint, params, truncated)


def convergence_order(params: RadialParams, r_span: Tuple[float, float], step: float) -> float:
    """Observed order from the closed-form error at step and step/2."""
    errors = []
    for h in (step, step / 2):
        y0 = closed_form_state(r_span[0], params)
        trajectory = radial_integrate(y0, r_span, h, params, constraint_tol=1e-10)
        exact = closed_form_state(trajectory.r[-1], params)
        errors.append(float(np.max(np.abs(trajectory.states[-1, :4] - exact[:4]))))
    # exact at both steps gives order 0
    return float(np.log2(max(errors[0], ABS_FLOOR) / max(errors[1], ABS_FLOOR)))
