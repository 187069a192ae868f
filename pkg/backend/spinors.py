"""
Irreducible Clifford modules, admissible pairings and spinor squares.

Gamma matrices come from the Jordan-Wigner tensor construction. Timelike
generators get a factor i, and in odd dimension the last generator is fixed
by γ(ν_C) = ℓ·Id.
"""

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.linalg import lu_factor, lu_solve, null_space

from errors import AdjointTypeNotRealized, ContractViolation, NotASquareError, RepresentationError
from multivector import ABS_FLOOR, MAX_DIM, Multivector, Signature, _grade_masks
from truncated import TruncatedMultivector, truncation_degree, volume_phase

logger = logging.getLogger(__name__)

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

SQUARE_SELF_CHECK_TOL = 1e-10
HERMITIAN = "hermitian"
BILINEAR = "bilinear"
KINDS = (HERMITIAN, BILINEAR)

Square = Union[Multivector, TruncatedMultivector]


def _kron_all(factors: List[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors, np.ones((1, 1), dtype=complex))


def _euclidean_generators(m: int) -> List[np.ndarray]:
    """2m Hermitian, mutually anticommuting involutions on (C^2)^{⊗m}."""
    gens = []
    for k in range(m):
        for pauli in (SIGMA_1, SIGMA_2):
            factors = [SIGMA_3] * k + [pauli] + [IDENTITY_2] * (m - k - 1)
            gens.append(_kron_all(factors))
    return gens


class SpinorRep:
    """Irreducible complex representation γ of Cl(V*, h*) for one signature.

    For odd d the representation realizes branch ℓ, i.e. γ(ν_C) = ℓ·Id, and
    quantization acts on the truncated algebra.
    """

    def __init__(self, sig: Signature, ell: Optional[int] = None):
        if sig.dim > MAX_DIM:
            raise ContractViolation(f"Dimension {sig.dim} exceeds the cap {MAX_DIM}")
        if sig.is_odd:
            if ell not in (1, -1):
                raise ContractViolation(f"Odd signature {sig} needs a branch label ℓ = ±1, got {ell}")
        elif ell is not None:
            raise ContractViolation(f"Branch label ℓ is meaningless in even signature {sig}")
        self.sig = sig
        self.ell = ell
        self.n = 1 << (sig.dim // 2)
        self.gammas = self._build_generators()
        self.identity = np.eye(self.n, dtype=complex)

        d = sig.dim
        if sig.is_odd:
            keep = _grade_masks(d) <= truncation_degree(sig)
            self.blade_masks = np.nonzero(keep)[0]
        else:
            self.blade_masks = np.arange(sig.size)
        self.blade_matrices = np.array([self._blade_matrix(int(mask)) for mask in self.blade_masks])
        self.blade_inverses = np.array([np.linalg.inv(m) for m in self.blade_matrices])

        basis = self.blade_matrices.reshape(len(self.blade_masks), -1).T
        if basis.shape[0] != basis.shape[1]:
            raise RepresentationError(f"Quantization basis is not square: {basis.shape}")
        try:
            self._basis_lu = lu_factor(basis)
        except (ValueError, np.linalg.LinAlgError) as e:
            raise RepresentationError(f"Singular quantization basis for {sig}: {e}")

        full = self._blade_matrix(sig.size - 1) * sig.orientation
        self.volume_matrix = full
        if sig.is_odd:
            self.chirality_op = None
        else:
            self.chirality_op = (1j ** ((sig.q + d // 2) % 4)) * full
        logger.debug(f"Built spinor representation for {sig} (n={self.n}, ℓ={ell})")

    def _build_generators(self) -> np.ndarray:
        sig = self.sig
        d = sig.dim
        m = d // 2
        gens = _euclidean_generators(m)
        for i in range(len(gens)):
            if i >= sig.p:
                gens[i] = 1j * gens[i]
        if sig.is_odd:
            if m == 0:
                product = np.eye(1, dtype=complex)
            else:
                product = reduce(np.matmul, gens)
            square = product @ product
            s = square[0, 0].real
            eps_last = 1 if d - 1 < sig.p else -1
            c0 = np.sqrt(complex(eps_last / s))
            value = volume_phase(sig) * sig.orientation * c0 * s
            if abs(value - self.ell) > 1e-12:
                c0 = -c0
            gens.append(c0 * product)
        return np.array(gens)

    def _blade_matrix(self, mask: int) -> np.ndarray:
        out = np.eye(self.n, dtype=complex)
        for i in range(self.sig.dim):
            if (mask >> i) & 1:
                out = out @ self.gammas[i]
        return out

    # -- quantization -----------------------------------------------------

    def _check_sig(self, sig: Signature) -> None:
        if sig != self.sig:
            raise ContractViolation(f"Signature mismatch: representation {self.sig}, form {sig}")

    def quantize(self, a: Square) -> np.ndarray:
        """Ψ_γ(α) (even d) or Ψ^<_ℓ(α) (odd d) as an n×n matrix."""
        if isinstance(a, TruncatedMultivector):
            self._check_sig(a.sig)
            if self.sig.is_odd and a.ell != self.ell:
                raise ContractViolation(f"Branch mismatch: representation ℓ={self.ell}, form ℓ={a.ell}")
            coeffs = a.mv.coeffs
        else:
            self._check_sig(a.sig)
            coeffs = a.coeffs
        if self.sig.is_odd and not isinstance(a, TruncatedMultivector):
            # γ(P_ℓ α) = γ(α) because γ(ν_C) = ℓ·Id
            all_blades = np.array([self._blade_matrix(mask) for mask in range(self.sig.size)])
            return np.tensordot(coeffs, all_blades, axes=1)
        return np.tensordot(coeffs[self.blade_masks], self.blade_matrices, axes=1)

    def dequantize(self, matrix: np.ndarray) -> Square:
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (self.n, self.n):
            raise ContractViolation(f"Expected a {self.n}x{self.n} matrix, got {matrix.shape}")
        solution = lu_solve(self._basis_lu, matrix.ravel())
        if not np.all(np.isfinite(solution)):
            raise RepresentationError(f"Dequantization produced non-finite coefficients for {self.sig}")
        coeffs = np.zeros(self.sig.size, dtype=complex)
        coeffs[self.blade_masks] = solution
        mv = Multivector(self.sig, coeffs)
        if self.sig.is_odd:
            return TruncatedMultivector(mv, self.ell)
        return mv

    def clifford_residual(self) -> float:
        eps = self.sig.eps
        worst = 0.0
        for i in range(self.sig.dim):
            for j in range(self.sig.dim):
                anti = self.gammas[i] @ self.gammas[j] + self.gammas[j] @ self.gammas[i]
                target = 2 * eps[i] * self.identity if i == j else 0
                worst = max(worst, float(np.max(np.abs(anti - target))))
        return worst

    def chirality_projector(self, mu: int) -> np.ndarray:
        if self.chirality_op is None:
            raise ContractViolation(f"Chirality is only defined in even dimension, not {self.sig}")
        return 0.5 * (self.identity + mu * self.chirality_op)

    def to_json(self) -> Dict:
        def encode(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        data = {
            "p": self.sig.p,
            "q": self.sig.q,
            "orientation": self.sig.orientation,
            "ell": self.ell,
            "n": self.n,
            "gammas": [encode(g) for g in self.gammas],
        }
        if self.chirality_op is not None:
            data["chirality"] = encode(self.chirality_op)
        return data


def build_rep(sig: Signature, ell: Optional[int] = None) -> SpinorRep:
    return SpinorRep(sig, ell)


@dataclass(frozen=True)
class Pairing:
    """One admissible pairing: ℋ(η₁,η₂) = η₂^†Hη₁ or ℬ(η₁,η₂) = η₂^T B η₁."""

    kind: str
    s: int
    matrix: np.ndarray
    sigma: Optional[int] = None

    def __call__(self, eta1: np.ndarray, eta2: np.ndarray) -> complex:
        if self.kind == HERMITIAN:
            return complex(np.conj(eta2) @ self.matrix @ eta1)
        return complex(eta2 @ self.matrix @ eta1)

    def to_json(self) -> Dict:
        return {
            "kind": self.kind,
            "s": self.s,
            "sigma": self.sigma,
            "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
        }


@dataclass
class PairingData:
    """Resolved pairings of a representation; a missing kind is None."""

    hermitian: Optional[Pairing] = None
    bilinear: Optional[Pairing] = None
    unrealized: List[str] = field(default_factory=list)

    def get(self, kind: str) -> Pairing:
        pairing = self.hermitian if kind == HERMITIAN else self.bilinear
        if pairing is None:
            raise ContractViolation(f"No {kind} pairing was resolved for this representation")
        return pairing


def _normalize_hermitian(h: np.ndarray) -> np.ndarray:
    sym = h + h.conj().T
    anti = 1j * (h - h.conj().T)
    h = sym if np.linalg.norm(sym) >= np.linalg.norm(anti) else anti
    flat = h.ravel()
    k = int(np.argmax(np.abs(flat)))
    h = h / np.abs(flat[k])
    if h.ravel()[k].real < 0:
        h = -h
    return h


def _normalize_bilinear(b: np.ndarray) -> np.ndarray:
    flat = b.ravel()
    k = int(np.argmax(np.abs(flat)))
    return b / flat[k]


def solve_admissible(rep: SpinorRep, s: int, kind: str) -> Pairing:
    """Solve the linear admissibility constraints on the generators."""
    if s not in (1, -1):
        raise ContractViolation(f"Adjoint type must be ±1, got {s}")
    if kind not in KINDS:
        raise ContractViolation(f"Unknown pairing kind {kind!r}; expected one of {KINDS}")
    n = rep.n
    eye = rep.identity
    blocks = []
    for gamma in rep.gammas:
        adjoint = gamma.conj().T if kind == HERMITIAN else gamma.T
        # row-major vec: vec(Xγ) = (I⊗γ^T)vec(X), vec(AX) = (A⊗I)vec(X)
        blocks.append(np.kron(eye, gamma.T) - s * np.kron(adjoint, eye))
    system = np.vstack(blocks)
    basis = null_space(system)
    if basis.shape[1] == 0:
        raise AdjointTypeNotRealized(rep.sig.p, rep.sig.q, s, kind)
    if basis.shape[1] > 1:
        logger.warning(f"Pairing nullspace has dimension {basis.shape[1]} for {rep.sig}; taking the first vector")
    matrix = basis[:, 0].reshape(n, n)

    if kind == HERMITIAN:
        matrix = _normalize_hermitian(matrix)
        return Pairing(kind=kind, s=s, matrix=matrix)
    matrix = _normalize_bilinear(matrix)
    sigma = 1 if np.linalg.norm(matrix.T - matrix) < np.linalg.norm(matrix.T + matrix) else -1
    return Pairing(kind=kind, s=s, matrix=matrix, sigma=sigma)


def resolve_pairings(rep: SpinorRep, s_hermitian: int = 1, s_bilinear: int = 1) -> PairingData:
    data = PairingData()
    for kind, s in ((HERMITIAN, s_hermitian), (BILINEAR, s_bilinear)):
        try:
            pairing = solve_admissible(rep, s, kind)
        except AdjointTypeNotRealized as e:
            logger.warning(str(e))
            data.unrealized.append(kind)
            continue
        if kind == HERMITIAN:
            data.hermitian = pairing
        else:
            data.bilinear = pairing
    return data


def admissibility_residual(rep: SpinorRep, pairing: Pairing) -> float:
    worst = 0.0
    for gamma in rep.gammas:
        adjoint = gamma.conj().T if pairing.kind == HERMITIAN else gamma.T
        res = pairing.matrix @ gamma - pairing.s * adjoint @ pairing.matrix
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def pairing_table(max_dim: int = 6) -> List[Dict]:
    """Which adjoint types each signature realizes, found by solving."""
    rows = []
    for d in range(1, max_dim + 1):
        for q in range(d + 1):
            sig = Signature(d - q, q)
            rep = build_rep(sig, 1 if sig.is_odd else None)
            for kind in KINDS:
                for s in (1, -1):
                    try:
                        pairing = solve_admissible(rep, s, kind)
                        rows.append({"p": sig.p, "q": q, "kind": kind, "s": s, "realized": True, "sigma": pairing.sigma})
                    except AdjointTypeNotRealized:
                        rows.append({"p": sig.p, "q": q, "kind": kind, "s": s, "realized": False, "sigma": None})
    return rows


@dataclass
class Spinor:
    components: np.ndarray
    chirality: Optional[int] = None

    def __post_init__(self):
        self.components = np.asarray(self.components, dtype=complex)

    def check(self, rep: SpinorRep, tol: float = 1e-10) -> None:
        if self.components.shape != (rep.n,):
            raise ContractViolation(f"Spinor needs {rep.n} components, got {self.components.shape}")
        if self.chirality is not None:
            residual = rep.chirality_op @ self.components - self.chirality * self.components
            if np.max(np.abs(residual), initial=0.0) > tol * max(1.0, np.linalg.norm(self.components)):
                raise ContractViolation(f"Spinor is not of chirality {self.chirality:+d}")

    def scaled(self, factor: complex) -> "Spinor":
        return Spinor(self.components * factor, self.chirality)


def random_spinor(rep: SpinorRep, rng: np.random.Generator, chirality: Optional[int] = None) -> Spinor:
    eta = rng.standard_normal(rep.n) + 1j * rng.standard_normal(rep.n)
    if chirality is not None:
        eta = rep.chirality_projector(chirality) @ eta
    return Spinor(eta / np.linalg.norm(eta), chirality)


def _as_components(eta: Union[Spinor, np.ndarray], rep: SpinorRep) -> np.ndarray:
    if isinstance(eta, Spinor):
        eta.check(rep)
        return eta.components
    eta = np.asarray(eta, dtype=complex)
    if eta.shape != (rep.n,):
        raise ContractViolation(f"Spinor needs {rep.n} components, got {eta.shape}")
    return eta


def _package(coeffs: np.ndarray, rep: SpinorRep) -> Square:
    full = np.zeros(rep.sig.size, dtype=complex)
    full[rep.blade_masks] = coeffs
    mv = Multivector(rep.sig, full)
    if rep.sig.is_odd:
        return TruncatedMultivector(mv, rep.ell)
    return mv


def _coeffs_of(a: Square) -> np.ndarray:
    return a.mv.coeffs if isinstance(a, TruncatedMultivector) else a.coeffs


def _self_check(explicit: Square, rep: SpinorRep, matrix: np.ndarray, scale: float) -> None:
    via_dequantize = rep.dequantize(matrix)
    gap = float(np.max(np.abs(_coeffs_of(explicit) - _coeffs_of(via_dequantize))))
    if gap > SQUARE_SELF_CHECK_TOL * max(scale, 1.0):
        raise RepresentationError(
            f"Explicit square expansion disagrees with dequantization by {gap:.3e} in {rep.sig}"
        )


def hermitian_square(eta, rep: SpinorRep, pairing: Pairing, kappa: complex = 1.0) -> Square:
    """κ/n Σ_A ℋ((γ^A)^{-1}η, η) e^A, cross-checked against dequantize(κ η⊗ℋ(-,η))."""
    if pairing.kind != HERMITIAN:
        raise ContractViolation(f"hermitian_square needs a Hermitian pairing, got {pairing.kind}")
    eta = _as_components(eta, rep)
    row = np.conj(eta) @ pairing.matrix
    coeffs = kappa / rep.n * np.einsum("j,ajk,k->a", row, rep.blade_inverses, eta)
    square = _package(coeffs, rep)
    matrix = kappa * np.outer(eta, row)
    _self_check(square, rep, matrix, float(np.vdot(eta, eta).real))
    return square


def bilinear_square(eta, rep: SpinorRep, pairing: Pairing) -> Square:
    """1/n Σ_A ℬ((γ^A)^{-1}η, η) e^A, cross-checked against dequantize(η⊗ℬ(-,η))."""
    if pairing.kind != BILINEAR:
        raise ContractViolation(f"bilinear_square needs a bilinear pairing, got {pairing.kind}")
    eta = _as_components(eta, rep)
    row = eta @ pairing.matrix
    coeffs = 1.0 / rep.n * np.einsum("j,ajk,k->a", row, rep.blade_inverses, eta)
    square = _package(coeffs, rep)
    matrix = np.outer(eta, row)
    _self_check(square, rep, matrix, float(np.vdot(eta, eta).real))
    return square


def square(eta, rep: SpinorRep, pairing: Pairing, kappa: complex = 1.0) -> Square:
    if pairing.kind == HERMITIAN:
        return hermitian_square(eta, rep, pairing, kappa)
    return bilinear_square(eta, rep, pairing)


def reconstruct_spinor(alpha: Square, rep: SpinorRep, pairing: Pairing, kappa: complex = 1.0,
                       tol: float = 1e-9) -> Spinor:
    """Rank-one extraction of η from quantize(α).

    Bilinear squares fix η up to sign, Hermitian squares up to a phase.
    """
    if alpha.is_zero(ABS_FLOOR):
        raise NotASquareError("The zero form is not the square of a nowhere-vanishing spinor")
    q_matrix = rep.quantize(alpha)
    columns = q_matrix / kappa if pairing.kind == HERMITIAN else q_matrix
    if pairing.kind == HERMITIAN:
        # (y_j^† H)_j = |c_j|² for y_j = c_j η
        values = np.einsum("kj,kj->j", np.conj(columns), pairing.matrix)
    else:
        values = np.einsum("kj,kj->j", columns, pairing.matrix)
    j = int(np.argmax(np.abs(values)))
    if abs(values[j]) <= ABS_FLOOR:
        raise NotASquareError(f"quantize(α) has no usable rank-one column in {rep.sig}")
    eta = columns[:, j] / np.sqrt(values[j])

    rebuilt = square(eta, rep, pairing, kappa)
    gap = float(np.max(np.abs(_coeffs_of(rebuilt) - _coeffs_of(alpha))))
    scale = max(float(np.max(np.abs(_coeffs_of(alpha)))), ABS_FLOOR)
    if gap > tol * scale:
        raise NotASquareError(f"Form is not a {pairing.kind} square: re-squaring misses by {gap:.3e}")

    chirality = None
    if rep.chirality_op is not None:
        for mu in (1, -1):
            if np.max(np.abs(rep.chirality_op @ eta - mu * eta)) <= tol * max(1.0, np.linalg.norm(eta)):
                chirality = mu
    return Spinor(eta, chirality)
