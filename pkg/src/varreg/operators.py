"""Diagonal spectral forward operators and derived objects.

An operator is a strictly positive multiplier sequence ``sigma`` acting
componentwise.  The adjoint, the normal operator, resolvents and fractional
powers are all diagonal as well, so every derived quantity is an exact
finite sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .basis import BasisSpec, CoefficientField, check_same_basis

APPLY_MODES = ("K", "Kadj", "normal", "resolvent", "frac_power")

_OUTPUT_TAG = {"K": "Y", "Kadj": "X", "normal": "X", "resolvent": "X", "frac_power": "X"}


@dataclass(frozen=True)
class SpectralOperator:
    """Forward operator with componentwise multipliers ``sigma``.

    ``smoothing_order`` is metadata recording the intended decay
    sigma_l ~ w_l**(-t); it is not enforced for explicit multiplier lists.
    """

    basis: BasisSpec
    sigma: np.ndarray
    smoothing_order: float | None = None

    def __post_init__(self):
        arr = np.asarray(self.sigma, dtype=np.float64)
        if arr.shape != (self.basis.n_modes,):
            raise ValueError(
                f"sigma must have shape ({self.basis.n_modes},), got {arr.shape}"
            )
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError("multipliers must be strictly positive and finite")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "sigma", arr)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues lambda_j = sigma_j**2 of the normal operator."""
        lam = self.sigma**2
        lam.setflags(write=False)
        return lam

    def multiplier(self, mode: str, beta: float | None = None, mu: float | None = None) -> np.ndarray:
        if mode == "K" or mode == "Kadj":
            return self.sigma
        if mode == "normal":
            return self.eigenvalues
        if mode == "resolvent":
            if beta is None or beta <= 0.0:
                raise ValueError(f"resolvent requires beta > 0, got {beta}")
            return 1.0 / (self.eigenvalues + beta)
        if mode == "frac_power":
            if mu is None or not 0.0 < mu <= 0.5:
                raise ValueError(f"frac_power requires mu in (0, 1/2], got {mu}")
            return self.sigma ** (2.0 * mu)
        raise ValueError(f"unknown mode {mode!r}; expected one of {APPLY_MODES}")

    def apply(
        self,
        u: CoefficientField,
        mode: str = "K",
        beta: float | None = None,
        mu: float | None = None,
    ) -> CoefficientField:
        if u.basis != self.basis:
            raise ValueError("operator/basis mismatch")
        m = self.multiplier(mode, beta=beta, mu=mu)
        return CoefficientField(self.basis, m * u.coeffs, _OUTPUT_TAG[mode])

    def effective_dimension(self, beta: float) -> float:
        """Trace of the resolvent-whitened normal operator, sum lam/(lam+beta)."""
        if beta <= 0.0:
            raise ValueError(f"effective_dimension requires beta > 0, got {beta}")
        lam = self.eigenvalues
        return float(np.sum(lam / (lam + beta)))

    def eigenvalue_tail_sum(self, m: float) -> float:
        """Sum of lambda_j**m over the truncation, for 0 < m <= 1."""
        if not 0.0 < m <= 1.0:
            raise ValueError(f"m must lie in (0, 1], got {m}")
        return float(np.sum(self.eigenvalues**m))


def apply(
    op: SpectralOperator,
    mode: str,
    u: CoefficientField,
    beta: float | None = None,
    mu: float | None = None,
) -> CoefficientField:
    """Functional form of :meth:`SpectralOperator.apply`."""
    return op.apply(u, mode=mode, beta=beta, mu=mu)


def power_operator(basis: BasisSpec, t: float) -> SpectralOperator:
    """Canonical constructor sigma_l = w_l**(-t) (t-times smoothing)."""
    return SpectralOperator(basis, basis.weights ** (-t), smoothing_order=t)


def operator_from_config(basis: BasisSpec, spec: dict) -> SpectralOperator:
    """Build an operator from a config mapping.

    Accepted forms: ``{"kind": "power", "t": real}`` and
    ``{"kind": "explicit", "sigma": [..]}``.
    """
    kind = spec.get("kind")
    if kind == "power":
        if "t" not in spec:
            raise KeyError("operator.t")
        return power_operator(basis, float(spec["t"]))
    if kind == "explicit":
        if "sigma" not in spec:
            raise KeyError("operator.sigma")
        return SpectralOperator(basis, np.asarray(spec["sigma"], dtype=np.float64))
    raise ValueError(f"operator.kind must be 'power' or 'explicit', got {kind!r}")
