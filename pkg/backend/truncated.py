"""
Truncated Kähler-Atiyah algebra (∧^<V*_C, ∨) in odd dimension.

Elements keep only grades 0 … (d-1)/2. The branch label ℓ selects the
ν_C-eigenspace that the truncated product models.
"""

import logging
from typing import Optional

import numpy as np

from errors import ContractViolation
from multivector import (
    ABS_FLOOR,
    Multivector,
    Signature,
    _grade_masks,
    geometric_product,
    hodge_star,
    reversion,
    volume_form,
)

logger = logging.getLogger(__name__)


def _require_odd(sig: Signature) -> None:
    if not sig.is_odd:
        raise ContractViolation(f"Truncated algebra requires odd dimension, got {sig} with d={sig.dim}")


def _require_branch(ell: int) -> None:
    if ell not in (1, -1):
        raise ContractViolation(f"Branch label ℓ must be ±1, got {ell}")


def volume_phase(sig: Signature) -> complex:
    """i^{q+(d-1)/2}."""
    return 1j ** ((sig.q + (sig.dim - 1) // 2) % 4)


def complex_volume(sig: Signature) -> Multivector:
    """ν_C = i^{q+(d-1)/2}ν, a central square root of 1."""
    _require_odd(sig)
    return volume_phase(sig) * volume_form(sig)


def project_ell(a: Multivector, ell: int) -> Multivector:
    """P_ℓ(α) = ½(1 + ℓν_C)⋄α."""
    _require_odd(a.sig)
    _require_branch(ell)
    return 0.5 * (a + ell * geometric_product(complex_volume(a.sig), a))


def truncation_degree(sig: Signature) -> int:
    return (sig.dim - 1) // 2


def project_lower(a: Multivector) -> Multivector:
    """P_<: drop every grade above (d-1)/2."""
    _require_odd(a.sig)
    keep = _grade_masks(a.sig.dim) <= truncation_degree(a.sig)
    return Multivector(a.sig, np.where(keep, a.coeffs, 0))


class TruncatedMultivector:
    """Element of (∧^<V*_C, ∨) carrying its branch label ℓ."""

    __slots__ = ("mv", "ell")

    def __init__(self, mv: Multivector, ell: int):
        _require_odd(mv.sig)
        _require_branch(ell)
        top = _grade_masks(mv.sig.dim) > truncation_degree(mv.sig)
        overflow = float(np.max(np.abs(mv.coeffs[top]), initial=0.0))
        if overflow > 0.0:
            raise ContractViolation(
                f"Grade overflow: truncated elements live in grades ≤ {truncation_degree(mv.sig)}, "
                f"found coefficient of size {overflow:.3e} above"
            )
        self.mv = mv
        self.ell = ell

    @classmethod
    def from_full(cls, a: Multivector, ell: int) -> "TruncatedMultivector":
        """The truncated representative 2P_<(P_ℓ(α)) of any form."""
        return cls(2.0 * project_lower(project_ell(a, ell)), ell)

    @classmethod
    def one(cls, sig: Signature, ell: int) -> "TruncatedMultivector":
        return cls(Multivector.scalar(sig, 1.0), ell)

    @property
    def sig(self) -> Signature:
        return self.mv.sig

    def lift(self) -> Multivector:
        """P_ℓ restricted to ∧^<, landing in the ℓ-eigenspace of ν_C."""
        return project_ell(self.mv, self.ell)

    def _same(self, other: "TruncatedMultivector") -> None:
        if not isinstance(other, TruncatedMultivector):
            raise ContractViolation(f"Expected a TruncatedMultivector, got {type(other).__name__}")
        if other.sig != self.sig:
            raise ContractViolation(f"Signature mismatch: {self.sig} vs {other.sig}")
        if other.ell != self.ell:
            raise ContractViolation(f"Branch mismatch: ℓ={self.ell} vs ℓ={other.ell}")

    def __add__(self, other):
        self._same(other)
        return TruncatedMultivector(self.mv + other.mv, self.ell)

    def __sub__(self, other):
        self._same(other)
        return TruncatedMultivector(self.mv - other.mv, self.ell)

    def __neg__(self):
        return TruncatedMultivector(-self.mv, self.ell)

    def __mul__(self, other):
        if isinstance(other, TruncatedMultivector):
            return vee_product(self, other)
        if np.isscalar(other):
            return TruncatedMultivector(self.mv * other, self.ell)
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return TruncatedMultivector(self.mv * other, self.ell)
        return NotImplemented

    def __truediv__(self, other):
        return TruncatedMultivector(self.mv / other, self.ell)

    def conj(self) -> "TruncatedMultivector":
        return TruncatedMultivector(self.mv.conj(), self.ell)

    def grade(self, k: int) -> Multivector:
        return self.mv.grade(k)

    @property
    def scalar_part(self) -> complex:
        return self.mv.scalar_part

    def norm(self) -> float:
        return self.mv.norm()

    def max_abs(self) -> float:
        return self.mv.max_abs()

    def is_zero(self, tol: float = ABS_FLOOR) -> bool:
        return self.mv.is_zero(tol)

    def allclose(self, other: "TruncatedMultivector", tol: float = 1e-12) -> bool:
        self._same(other)
        return self.mv.allclose(other.mv, tol)

    def __repr__(self) -> str:
        return f"Truncated[ℓ={self.ell:+d}]{self.mv!r}"

    def to_json(self):
        data = self.mv.to_json()
        data["ell"] = self.ell
        return data

    @classmethod
    def from_json(cls, data) -> "TruncatedMultivector":
        return cls(Multivector.from_json(data), int(data["ell"]))


def vee_product(a: TruncatedMultivector, b: TruncatedMultivector) -> TruncatedMultivector:
    """α∨β = 2P_<(P_ℓ(α⋄β))."""
    a._same(b)
    product = geometric_product(a.mv, b.mv)
    return TruncatedMultivector(2.0 * project_lower(project_ell(product, a.ell)), a.ell)


def vee_product_hodge(a: TruncatedMultivector, b: TruncatedMultivector) -> TruncatedMultivector:
    """α∨β via P_<(x + i^{q+(d-1)/2}ℓ∗τ(x)) with x = α⋄β."""
    a._same(b)
    x = geometric_product(a.mv, b.mv)
    dual = hodge_star(reversion(x))
    return TruncatedMultivector(project_lower(x + volume_phase(a.sig) * a.ell * dual), a.ell)


def as_truncated(value, ell: Optional[int] = None) -> TruncatedMultivector:
    if isinstance(value, TruncatedMultivector):
        if ell is not None and value.ell != ell:
            raise ContractViolation(f"Branch mismatch: ℓ={value.ell} vs ℓ={ell}")
        return value
    if ell is None:
        raise ContractViolation("A branch label is required to truncate a full multivector")
    return TruncatedMultivector.from_full(value, ell)
