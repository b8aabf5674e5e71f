"""Seeded white-noise synthesis and data generation f = K u + delta * n.

Noise coefficients come from a counter-based generator (Philox) through the
inverse normal CDF, so the value at mode ``l`` is a pure function of
``(seed, l)``: samples are reproducible independent of evaluation order,
truncation level and parallel schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .basis import BasisSpec, CoefficientField, check_same_basis
from .operators import SpectralOperator

_MAX_SEED = 2**64


def derive_seed(master_seed: int, *path: int) -> int:
    """Stable 64-bit child seed for (master, path...) used by replicate loops."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class NoiseSample:
    """White-noise realization; regenerating with the same seed is bit-exact."""

    n: CoefficientField
    seed: int

    def pushforward(self, K: SpectralOperator) -> CoefficientField:
        """Adjoint image of the noise (finite in X* even when ||n|| is large)."""
        return K.apply(self.n, mode="Kadj")


def sample_white_noise(basis: BasisSpec, seed: int) -> NoiseSample:
    """Draw N i.i.d. standard normal coefficients keyed by (seed, mode index)."""
    seed = int(seed)
    if not 0 <= seed < _MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    rng = np.random.Generator(np.random.Philox(key=seed))
    # one counter word per uniform keeps the (seed, l) -> value map stable
    # across truncation levels; clamp away from 0 before the inverse CDF
    u = rng.random(basis.n_modes)
    u = np.maximum(u, 2.0**-54)
    coeffs = ndtri(u)
    return NoiseSample(n=CoefficientField(basis, coeffs, "Zdual"), seed=seed)


def synthesize_data(K: SpectralOperator, u_true: CoefficientField, delta: float,
                    sample: NoiseSample) -> CoefficientField:
    """Noisy data K u_true + delta * n; delta = 0 gives noiseless data."""
    if delta < 0.0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    if u_true.basis != K.basis:
        raise ValueError("truth/operator basis mismatch")
    check_same_basis(u_true, sample.n)
    f = K.sigma * u_true.coeffs + delta * sample.n.coeffs
    return CoefficientField(K.basis, f, "Zdual")
