"""
Dense complex multivectors of the Kähler-Atiyah algebra (∧V*_C, ⋄).

Blades are indexed by bitmask: bit i set means e^{i+1} is a factor. The first
p generators square to +1 and the remaining q to -1. All structure constants
live in {0, ±1} and are tabulated once per signature.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from errors import ContractViolation

logger = logging.getLogger(__name__)

MAX_DIM = 8
ABS_FLOOR = 1e-13

Scalar = Union[int, float, complex, np.number]


@dataclass(frozen=True)
class Signature:
    """Signature (p, q) with an orientation choice for the volume form."""

    p: int
    q: int
    orientation: int = 1

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ContractViolation(f"Signature counts must be non-negative, got ({self.p},{self.q})")
        if not 1 <= self.p + self.q <= MAX_DIM:
            raise ContractViolation(f"Dimension p+q must lie in [1, {MAX_DIM}], got {self.p + self.q}")
        if self.orientation not in (1, -1):
            raise ContractViolation(f"Orientation must be ±1, got {self.orientation}")

    @property
    def dim(self) -> int:
        return self.p + self.q

    @property
    def size(self) -> int:
        return 1 << self.dim

    @property
    def is_odd(self) -> bool:
        return self.dim % 2 == 1

    @property
    def eps(self) -> np.ndarray:
        return np.array([1] * self.p + [-1] * self.q, dtype=int)

    def with_orientation(self, orientation: int) -> "Signature":
        return Signature(self.p, self.q, orientation)

    def __str__(self) -> str:
        suffix = "" if self.orientation == 1 else ", -"
        return f"({self.p},{self.q}{suffix})"


@lru_cache(maxsize=None)
def _popcounts(size: int) -> np.ndarray:
    return np.array([bin(i).count("1") for i in range(size)], dtype=np.int64)


def grade_of(mask: int) -> int:
    return bin(mask).count("1")


@lru_cache(maxsize=None)
def _tables(p: int, q: int):
    """(xor, reorder sign, metric sign, overlap) for every blade pair (A, B)."""
    d = p + q
    n = 1 << d
    pc = _popcounts(n)
    idx = np.arange(n)
    a = idx[:, None]
    b = idx[None, :]
    xor = a ^ b

    swaps = np.zeros((n, n), dtype=np.int64)
    for i in range(d):
        a_has = (idx >> i) & 1
        below = pc[idx & ((1 << i) - 1)]
        swaps += a_has[:, None] * below[None, :]
    reorder = 1 - 2 * (swaps % 2)

    negmask = ((1 << d) - 1) ^ ((1 << p) - 1)
    metric = 1 - 2 * (pc[(a & b) & negmask] % 2)
    overlap = pc[a & b]
    return xor, reorder, metric, overlap


@lru_cache(maxsize=None)
def _geometric_sign(p: int, q: int) -> np.ndarray:
    _, reorder, metric, _ = _tables(p, q)
    return reorder * metric


@lru_cache(maxsize=None)
def _wedge_sign(p: int, q: int) -> np.ndarray:
    _, reorder, _, overlap = _tables(p, q)
    return np.where(overlap == 0, reorder, 0)


@lru_cache(maxsize=None)
def _generalized_sign(p: int, q: int, k: int) -> np.ndarray:
    _, reorder, metric, overlap = _tables(p, q)
    n = 1 << (p + q)
    grade_a = _popcounts(n)[:, None]
    sign = 1 - 2 * ((k * (k + 1) // 2 + grade_a * k) % 2)
    return np.where(overlap == k, sign * reorder * metric, 0)


@lru_cache(maxsize=None)
def _blade_norms(p: int, q: int) -> np.ndarray:
    """ε_A = ⟨e^A, e^A⟩ for each blade."""
    d = p + q
    n = 1 << d
    negmask = ((1 << d) - 1) ^ ((1 << p) - 1)
    return 1 - 2 * (_popcounts(n)[np.arange(n) & negmask] % 2)


@lru_cache(maxsize=None)
def _hodge_tables(p: int, q: int) -> Tuple[np.ndarray, np.ndarray]:
    d = p + q
    n = 1 << d
    full = n - 1
    idx = np.arange(n)
    complement = full ^ idx
    _, reorder, _, _ = _tables(p, q)
    sign = _blade_norms(p, q) * reorder[idx, complement]
    return complement, sign


@lru_cache(maxsize=None)
def _contraction_tables(d: int) -> Tuple[np.ndarray, np.ndarray]:
    """Metric-free ι_{e_i}: target blade and sign, shape (d, 2^d); sign 0 if i is absent."""
    n = 1 << d
    pc = _popcounts(n)
    idx = np.arange(n)
    targets = np.zeros((d, n), dtype=np.int64)
    signs = np.zeros((d, n), dtype=np.int64)
    for i in range(d):
        has = (idx >> i) & 1
        targets[i] = idx & ~(1 << i)
        signs[i] = has * (1 - 2 * (pc[idx & ((1 << i) - 1)] % 2))
    return targets, signs


@lru_cache(maxsize=None)
def blades_of_grade(d: int, k: int) -> Tuple[int, ...]:
    return tuple(sum(1 << i for i in combo) for combo in combinations(range(d), k))


@lru_cache(maxsize=None)
def _grade_masks(d: int) -> np.ndarray:
    return _popcounts(1 << d)


def _permutation_sign(seq: Sequence[int]) -> int:
    sign = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class Multivector:
    """A complex exterior form with the geometric product of its signature.

    `a * b` is the geometric product ⋄, `a ^ b` the wedge product; numbers
    scale. Values are treated as immutable.
    """

    __slots__ = ("sig", "coeffs")

    def __init__(self, sig: Signature, coeffs: Optional[Iterable[Scalar]] = None):
        self.sig = sig
        if coeffs is None:
            data = np.zeros(sig.size, dtype=complex)
        else:
            data = np.array(coeffs, dtype=complex)
        if data.shape != (sig.size,):
            raise ContractViolation(f"Expected {sig.size} coefficients for {sig}, got shape {data.shape}")
        self.coeffs = data

    # -- construction -----------------------------------------------------

    @classmethod
    def scalar(cls, sig: Signature, value: Scalar = 1.0) -> "Multivector":
        mv = cls(sig)
        mv.coeffs[0] = value
        return mv

    @classmethod
    def blade(cls, sig: Signature, indices: Sequence[int], coeff: Scalar = 1.0) -> "Multivector":
        """coeff·e^{i1}∧…∧e^{ik} for 0-based indices in any order."""
        if len(set(indices)) != len(indices):
            return cls(sig)
        if any(i < 0 or i >= sig.dim for i in indices):
            raise ContractViolation(f"Blade indices {tuple(indices)} out of range for {sig}")
        mask = sum(1 << i for i in indices)
        mv = cls(sig)
        mv.coeffs[mask] = coeff * _permutation_sign(indices)
        return mv

    @classmethod
    def vector(cls, sig: Signature, components: Sequence[Scalar]) -> "Multivector":
        if len(components) != sig.dim:
            raise ContractViolation(f"One-form needs {sig.dim} components, got {len(components)}")
        mv = cls(sig)
        for i, c in enumerate(components):
            mv.coeffs[1 << i] = c
        return mv

    @classmethod
    def from_tensor(cls, sig: Signature, tensor: np.ndarray) -> "Multivector":
        """Form with components T_{i1<…<ik} of an antisymmetric k-tensor."""
        tensor = np.asarray(tensor)
        k = tensor.ndim
        mv = cls(sig)
        if k == 0:
            mv.coeffs[0] = tensor
            return mv
        for combo in combinations(range(sig.dim), k):
            mv.coeffs[sum(1 << i for i in combo)] = tensor[combo]
        return mv

    def to_tensor(self, k: int) -> np.ndarray:
        """Fully antisymmetric k-index array of the grade-k part."""
        d = self.sig.dim
        if k == 0:
            return np.array(self.coeffs[0])
        tensor = np.zeros((d,) * k, dtype=complex)
        for combo in combinations(range(d), k):
            value = self.coeffs[sum(1 << i for i in combo)]
            if value == 0:
                continue
            for perm in permutations(range(k)):
                tensor[tuple(combo[i] for i in perm)] = _permutation_sign(perm) * value
        return tensor

    # -- arithmetic -------------------------------------------------------

    def _same(self, other: "Multivector") -> None:
        if not isinstance(other, Multivector):
            raise ContractViolation(f"Expected a Multivector, got {type(other).__name__}")
        if other.sig != self.sig:
            raise ContractViolation(f"Signature mismatch: {self.sig} vs {other.sig}")

    def __add__(self, other):
        if isinstance(other, Multivector):
            self._same(other)
            return Multivector(self.sig, self.coeffs + other.coeffs)
        if np.isscalar(other):
            out = Multivector(self.sig, self.coeffs)
            out.coeffs[0] += other
            return out
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.sig, -self.coeffs)

    def __sub__(self, other):
        if isinstance(other, Multivector) or np.isscalar(other):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if np.isscalar(other):
            return Multivector(self.sig, self.coeffs * other)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return Multivector(self.sig, self.coeffs * other)
        return NotImplemented

    def __truediv__(self, other):
        if np.isscalar(other):
            return Multivector(self.sig, self.coeffs / other)
        return NotImplemented

    def __xor__(self, other):
        return wedge(self, other)

    # -- inspection -------------------------------------------------------

    def grade(self, k: int) -> "Multivector":
        mask = _grade_masks(self.sig.dim) == k
        return Multivector(self.sig, np.where(mask, self.coeffs, 0))

    def grades(self, tol: float = ABS_FLOOR) -> List[int]:
        pc = _grade_masks(self.sig.dim)
        return sorted({int(g) for g in pc[np.abs(self.coeffs) > tol]})

    def max_grade(self) -> int:
        present = self.grades()
        return present[-1] if present else 0

    @property
    def scalar_part(self) -> complex:
        return complex(self.coeffs[0])

    def vector_part(self) -> np.ndarray:
        return np.array([self.coeffs[1 << i] for i in range(self.sig.dim)])

    def conj(self) -> "Multivector":
        return Multivector(self.sig, np.conj(self.coeffs))

    @property
    def real(self) -> "Multivector":
        return Multivector(self.sig, self.coeffs.real)

    @property
    def imag(self) -> "Multivector":
        return Multivector(self.sig, self.coeffs.imag)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_zero(self, tol: float = ABS_FLOOR) -> bool:
        return self.max_abs() <= tol

    def allclose(self, other: "Multivector", tol: float = 1e-12) -> bool:
        self._same(other)
        return float(np.max(np.abs(self.coeffs - other.coeffs))) <= tol

    def terms(self, tol: float = ABS_FLOOR) -> Dict[Tuple[int, ...], complex]:
        """Nonzero coefficients keyed by 0-based index tuples."""
        out = {}
        for mask in np.nonzero(np.abs(self.coeffs) > tol)[0]:
            out[tuple(i for i in range(self.sig.dim) if (mask >> i) & 1)] = complex(self.coeffs[mask])
        return out

    def __repr__(self) -> str:
        parts = []
        for idx, c in self.terms().items():
            label = "e" + "".join(str(i + 1) for i in idx) if idx else "1"
            parts.append(f"({c.real:.6g}{c.imag:+.6g}j){label}")
        body = " + ".join(parts) if parts else "0"
        return f"Multivector{self.sig}[{body}]"

    # -- serialization ----------------------------------------------------

    def to_json(self) -> Dict:
        return {
            "dim": self.sig.dim,
            "p": self.sig.p,
            "q": self.sig.q,
            "orientation": self.sig.orientation,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data: Dict) -> "Multivector":
        sig = Signature(int(data["p"]), int(data["q"]), int(data.get("orientation", 1)))
        if int(data.get("dim", sig.dim)) != sig.dim:
            raise ContractViolation(f"dim {data['dim']} does not match p+q={sig.dim}")
        coeffs = [complex(re, im) for re, im in data["coeffs"]]
        return cls(sig, coeffs)


def _check_pair(a: Multivector, b: Multivector) -> None:
    if not isinstance(a, Multivector) or not isinstance(b, Multivector):
        raise ContractViolation("Both operands must be multivectors")
    if a.sig != b.sig:
        raise ContractViolation(f"Signature mismatch: {a.sig} vs {b.sig}")


def _bilinear(a: Multivector, b: Multivector, sign: np.ndarray) -> Multivector:
    xor = _tables(a.sig.p, a.sig.q)[0]
    weights = sign * np.outer(a.coeffs, b.coeffs)
    idx = np.arange(a.sig.size)[:, None]
    # out[C] = Σ_A weights[A, A^C]
    return Multivector(a.sig, weights[idx, xor].sum(axis=0))


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    _check_pair(a, b)
    return _bilinear(a, b, _geometric_sign(a.sig.p, a.sig.q))


def wedge(a: Multivector, b: Multivector) -> Multivector:
    _check_pair(a, b)
    return _bilinear(a, b, _wedge_sign(a.sig.p, a.sig.q))


def generalized_product(a: Multivector, b: Multivector, k: int) -> Multivector:
    """a △_k b, the k-fold contraction term of the graded expansion of ⋄."""
    _check_pair(a, b)
    if not 0 <= k <= a.sig.dim:
        raise ContractViolation(f"Contraction order k={k} outside [0, {a.sig.dim}]")
    return _bilinear(a, b, _generalized_sign(a.sig.p, a.sig.q, k))


def expansion_sign(k: int, grade_a: int) -> int:
    """Sign of a △_k b in the graded expansion of a ⋄ b for homogeneous a."""
    return -1 if (k * (k + 1) // 2 + grade_a * k) % 2 else 1


def interior(theta: Multivector, alpha: Multivector) -> Multivector:
    """ι_{θ♯}α for a one-form θ, with ε-weighted musical isomorphism."""
    return generalized_product(theta.grade(1), alpha, 1)


def contract(alpha: Multivector, vector: Sequence[Scalar]) -> Multivector:
    """Metric-free contraction ι_w α with a vector given by components."""
    d = alpha.sig.dim
    if len(vector) != d:
        raise ContractViolation(f"Vector needs {d} components, got {len(vector)}")
    targets, signs = _contraction_tables(d)
    out = np.zeros(alpha.sig.size, dtype=complex)
    for i, w in enumerate(vector):
        if w == 0:
            continue
        np.add.at(out, targets[i], w * signs[i] * alpha.coeffs)
    return Multivector(alpha.sig, out)


INVOLUTIONS = ("parity", "reversion", "both")


def involution(a: Multivector, which: str) -> Multivector:
    """π, τ or π∘τ: grade k scaled by (-1)^k, (-1)^{C(k,2)}, (-1)^{C(k+1,2)}."""
    k = _grade_masks(a.sig.dim)
    if which == "parity":
        exponent = k
    elif which == "reversion":
        exponent = k * (k - 1) // 2
    elif which == "both":
        exponent = k * (k + 1) // 2
    else:
        raise ContractViolation(f"Unknown involution {which!r}; expected one of {INVOLUTIONS}")
    return Multivector(a.sig, a.coeffs * (1 - 2 * (exponent % 2)))


def parity(a: Multivector) -> Multivector:
    return involution(a, "parity")


def reversion(a: Multivector) -> Multivector:
    return involution(a, "reversion")


def adjoint_twist(a: Multivector, s: int) -> Multivector:
    """(π^{(1-s)/2}∘τ)(a)."""
    if s not in (1, -1):
        raise ContractViolation(f"Adjoint type must be ±1, got {s}")
    return involution(a, "reversion" if s == 1 else "both")


def hodge_star(a: Multivector) -> Multivector:
    """Linear Hodge operator fixed by α∧∗β = ⟨α,β⟩ν."""
    complement, sign = _hodge_tables(a.sig.p, a.sig.q)
    out = np.zeros(a.sig.size, dtype=complex)
    out[complement] = a.sig.orientation * sign * a.coeffs
    return Multivector(a.sig, out)


def metric_pairing(a: Multivector, b: Multivector) -> complex:
    """Symmetric bilinear ⟨a,b⟩, the grade-wise extension of h*; no conjugation."""
    _check_pair(a, b)
    return complex(np.sum(_blade_norms(a.sig.p, a.sig.q) * a.coeffs * b.coeffs))


def volume_form(sig: Signature) -> Multivector:
    mv = Multivector(sig)
    mv.coeffs[sig.size - 1] = sig.orientation
    return mv


def volume_square_sign(sig: Signature) -> int:
    """ν⋄ν, read off the closed-form sign table."""
    if sig.dim % 2 == 0:
        return -1 if ((sig.p - sig.q) // 2) % 2 else 1
    return -1 if ((sig.p - sig.q - 1) // 2) % 2 else 1


def exterior_power(matrix: np.ndarray, sig: Signature) -> np.ndarray:
    """Matrix of the algebra map induced by e^i ↦ Σ_j matrix[i, j] e^j.

    Column I holds the image of blade I: entry J is det(matrix[I, J]).
    """
    d = sig.dim
    matrix = np.asarray(matrix)
    if matrix.shape != (d, d):
        raise ContractViolation(f"Expected a {d}x{d} matrix, got {matrix.shape}")
    out = np.zeros((sig.size, sig.size), dtype=matrix.dtype if np.iscomplexobj(matrix) else float)
    out[0, 0] = 1.0
    for k in range(1, d + 1):
        masks = blades_of_grade(d, k)
        combos = [tuple(i for i in range(d) if (m >> i) & 1) for m in masks]
        rows = np.array(combos)
        # sub[I, J] = matrix[rows[I]][:, rows[J]]
        sub = matrix[rows[:, None, :, None], rows[None, :, None, :]]
        dets = np.linalg.det(sub)
        out[np.ix_(masks, masks)] = dets.T
    return out


def transform(a: Multivector, power: np.ndarray, sig: Optional[Signature] = None) -> Multivector:
    """Apply an exterior_power matrix, optionally retagging the signature."""
    return Multivector(sig or a.sig, power @ a.coeffs)


def random_multivector(
    sig: Signature,
    rng: np.random.Generator,
    grade: Optional[int] = None,
    real: bool = False,
    normalize: bool = False,
) -> Multivector:
    coeffs = rng.standard_normal(sig.size).astype(complex)
    if not real:
        coeffs = coeffs + 1j * rng.standard_normal(sig.size)
    if grade is not None:
        coeffs = np.where(_grade_masks(sig.dim) == grade, coeffs, 0)
    mv = Multivector(sig, coeffs)
    if normalize and mv.norm() > 0:
        mv = mv / mv.norm()
    return mv


def relative_residual(residual: Multivector, scale: float) -> float:
    """max-norm residual relative to scale, with the absolute floor."""
    return residual.max_abs() / max(scale, ABS_FLOOR)
