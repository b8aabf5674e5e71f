"""Truncated spectral basis, coefficient fields and the norm scales on them.

Everything in the library lives on a single truncated orthonormal basis with
a global index ``l = 1..N``.  Frequency weights follow the global-index rule
``w_l = l**(1/d)``, which keeps every operator diagonal and every norm a
finite weighted sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

VALID_TAGS = ("X", "Y", "Zdual")


@dataclass(frozen=True)
class BasisSpec:
    """Truncated basis: spatial dimension (1 or 2) and mode count N."""

    dimension: int
    n_modes: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.dimension}")
        if self.n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {self.n_modes}")

    @cached_property
    def weights(self) -> np.ndarray:
        """Frequency weights w_l = l**(1/d); strictly positive, nondecreasing."""
        ell = np.arange(1, self.n_modes + 1, dtype=np.float64)
        w = ell ** (1.0 / self.dimension)
        w.setflags(write=False)
        return w

    @cached_property
    def indices(self) -> np.ndarray:
        ell = np.arange(1, self.n_modes + 1, dtype=np.float64)
        ell.setflags(write=False)
        return ell


def _as_readonly(coeffs, n):
    arr = np.asarray(coeffs, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ValueError(f"coefficient vector must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficient vector contains non-finite entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CoefficientField:
    """Element of X, Y or Z* as a coefficient vector on a truncated basis.

    The ``space_tag`` is bookkeeping only; all arithmetic is on raw
    coefficients.  Instances are immutable (the array is read-only).
    """

    basis: BasisSpec
    coeffs: np.ndarray
    space_tag: str = "Y"

    def __post_init__(self):
        if self.space_tag not in VALID_TAGS:
            raise ValueError(f"space_tag must be one of {VALID_TAGS}")
        object.__setattr__(self, "coeffs", _as_readonly(self.coeffs, self.basis.n_modes))

    # -- convenience arithmetic (pure, returns new fields) ----------------
    def with_coeffs(self, coeffs, space_tag=None) -> "CoefficientField":
        return CoefficientField(self.basis, coeffs, space_tag or self.space_tag)

    def __add__(self, other: "CoefficientField") -> "CoefficientField":
        check_same_basis(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other: "CoefficientField") -> "CoefficientField":
        check_same_basis(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "CoefficientField":
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    # -- serialization -----------------------------------------------------
    def to_json(self) -> str:
        payload = {
            "basis": {"d": self.basis.dimension, "N": self.basis.n_modes},
            "space_tag": self.space_tag,
            "coeffs": self.coeffs.tolist(),
        }
        return json.dumps(payload)

    @staticmethod
    def from_json(text: str) -> "CoefficientField":
        payload = json.loads(text)
        basis = BasisSpec(payload["basis"]["d"], payload["basis"]["N"])
        return CoefficientField(basis, payload["coeffs"], payload.get("space_tag", "Y"))

    def to_csv_column(self, name: str = "value") -> str:
        lines = [f"index,{name}"]
        lines += [f"{ell},{float(v)!r}" for ell, v in enumerate(self.coeffs, start=1)]
        return "\n".join(lines) + "\n"


def unit_field(basis: BasisSpec, index: int, space_tag: str = "Y") -> CoefficientField:
    """Field with coefficient 1 at global index ``index`` (1-based)."""
    if not 1 <= index <= basis.n_modes:
        raise ValueError(f"index {index} outside 1..{basis.n_modes}")
    c = np.zeros(basis.n_modes)
    c[index - 1] = 1.0
    return CoefficientField(basis, c, space_tag)


def zero_field(basis: BasisSpec, space_tag: str = "Y") -> CoefficientField:
    return CoefficientField(basis, np.zeros(basis.n_modes), space_tag)


def check_same_basis(a: CoefficientField, b: CoefficientField) -> None:
    if a.basis != b.basis:
        raise ValueError(
            f"basis mismatch: (d={a.basis.dimension}, N={a.basis.n_modes}) vs "
            f"(d={b.basis.dimension}, N={b.basis.n_modes})"
        )


def sobolev_norm(u: CoefficientField, r: float) -> float:
    """Weighted norm (sum of w_l**(2r) u_l**2)**0.5; r = 0 is the Y = L2 norm."""
    w = u.basis.weights
    return float(np.sqrt(np.sum(w ** (2.0 * r) * u.coeffs**2)))


def besov1_norm(u: CoefficientField, s: float) -> float:
    """One-dimensional l1-type smoothness norm: sum of l**(s - 1/2) |u_l|."""
    if u.basis.dimension != 1:
        raise ValueError("besov1_norm is defined for dimension 1 only")
    ell = u.basis.indices
    return float(np.sum(ell ** (s - 0.5) * np.abs(u.coeffs)))


def dual_pairing(q: CoefficientField, u: CoefficientField) -> float:
    """Pairing of Z* with Z; on the truncated basis this is the dot product."""
    check_same_basis(q, u)
    return float(np.dot(q.coeffs, u.coeffs))
