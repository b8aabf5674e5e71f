"""Convex penalties: evaluation, conjugates, proximal maps, subgradients,
Bregman distances and the scaling data linking penalty values to symmetric
Bregman distances.

Four kinds are provided: ``Quadratic`` (squared norm), ``PPower`` (p-th
power of the componentwise p-norm, 1 < p < inf), ``BesovOne`` (weighted-l1
smoothness norm, one-homogeneous) and ``TotalVariation`` (l1 norm of
periodic forward differences of grid samples synthesized from the
coefficients).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .basis import BasisSpec, CoefficientField, besov1_norm, check_same_basis, dual_pairing
from .errors import NonconvergenceError
from .operators import SpectralOperator


def dual_norm_S(q: CoefficientField, s: float) -> float:
    """Dual norm of the weighted-l1 ball: sup_l l**(1/2 - s) |q_l| (d = 1)."""
    if q.basis.dimension != 1:
        raise ValueError("dual_norm_S is defined for dimension 1 only")
    if q.basis.n_modes == 0:
        return 0.0
    ell = q.basis.indices
    return float(np.max(ell ** (0.5 - s) * np.abs(q.coeffs)))


def duality_map_jp(p: float, u: CoefficientField) -> CoefficientField:
    """Gradient of (1/p)||u||_p^p: componentwise |u|**(p-1) sign(u)."""
    if p <= 1.0:
        raise ValueError(f"duality map needs p > 1, got {p}")
    c = u.coeffs
    return u.with_coeffs(np.sign(c) * np.abs(c) ** (p - 1.0), space_tag="X")


class Penalty:
    """Base interface; concrete kinds override everything that applies."""

    kind: str
    theta: float  # scaling exponent linking R(u-v) to the symmetric Bregman distance

    def value(self, u: CoefficientField) -> float:
        raise NotImplementedError

    def conjugate(self, q: CoefficientField) -> float:
        raise NotImplementedError

    def prox(self, tau: float, z: CoefficientField) -> CoefficientField:
        raise NotImplementedError

    def subgradient_distance(self, u: CoefficientField, candidate: CoefficientField) -> float:
        """Euclidean distance of ``candidate`` to the subdifferential at ``u``."""
        raise NotImplementedError

    def c_theta(self, r_u: float, r_v: float, constant: float = 1.0) -> float:
        """Scaling constant C_theta as a function of the two penalty values."""
        raise NotImplementedError

    def _check_prox_args(self, tau, z):
        if tau <= 0.0:
            raise ValueError(f"prox requires tau > 0, got {tau}")


class Quadratic(Penalty):
    """R(u) = 0.5 ||u||^2; conjugate is itself, prox is shrinkage by 1/(1+tau)."""

    kind = "quadratic"
    theta = 1.0

    def value(self, u):
        return 0.5 * float(np.dot(u.coeffs, u.coeffs))

    def conjugate(self, q):
        return 0.5 * float(np.dot(q.coeffs, q.coeffs))

    def prox(self, tau, z):
        self._check_prox_args(tau, z)
        return z.with_coeffs(z.coeffs / (1.0 + tau))

    def subgradient_distance(self, u, candidate):
        return float(np.linalg.norm(candidate.coeffs - u.coeffs))

    def c_theta(self, r_u, r_v, constant=1.0):
        return 0.5


class PPower(Penalty):
    """R(u) = (1/p) sum |u_l|**p for 1 < p < inf (componentwise p-norm power)."""

    kind = "ppower"

    def __init__(self, p: float):
        if not 1.0 < p < np.inf:
            raise ValueError(f"PPower needs p in (1, inf), got {p}")
        self.p = float(p)
        self.q = self.p / (self.p - 1.0)
        self.theta = self.p / 2.0 if self.p < 2.0 else 1.0

    def value(self, u):
        return float(np.sum(np.abs(u.coeffs) ** self.p)) / self.p

    def conjugate(self, q):
        return float(np.sum(np.abs(q.coeffs) ** self.q)) / self.q

    def prox(self, tau, z):
        self._check_prox_args(tau, z)
        return z.with_coeffs(kernels.ppower_prox(z.coeffs, tau, self.p))

    def subgradient_distance(self, u, candidate):
        jp = duality_map_jp(self.p, u)
        return float(np.linalg.norm(candidate.coeffs - jp.coeffs))

    def c_theta(self, r_u, r_v, constant=1.0):
        if self.p >= 2.0:
            return 0.5 if self.p == 2.0 else constant
        # ||u|| recovered from R(u) = ||u||^p / p
        nu = (self.p * max(r_u, 0.0)) ** (1.0 / self.p)
        nv = (self.p * max(r_v, 0.0)) ** (1.0 / self.p)
        return (constant / self.p) * max(nu, nv) ** (self.p * (2.0 - self.p) / 2.0)


class BesovOne(Penalty):
    """One-homogeneous weighted l1 norm with weights l**(s - 1/2), s >= 1."""

    kind = "besov1"
    theta = 0.0

    def __init__(self, s: float):
        if s < 1.0:
            raise ValueError(f"BesovOne needs s >= 1, got {s}")
        self.s = float(s)

    def weight_vector(self, basis: BasisSpec) -> np.ndarray:
        if basis.dimension != 1:
            raise ValueError("BesovOne penalty is defined for dimension 1 only")
        return basis.indices ** (self.s - 0.5)

    def value(self, u):
        return besov1_norm(u, self.s)

    def conjugate(self, q):
        return 0.0 if dual_norm_S(q, self.s) <= 1.0 else np.inf

    def prox(self, tau, z):
        self._check_prox_args(tau, z)
        thr = tau * self.weight_vector(z.basis)
        return z.with_coeffs(kernels.soft_threshold(z.coeffs, thr))

    def subgradient_distance(self, u, candidate):
        w = self.weight_vector(u.basis)
        c = candidate.coeffs
        uc = u.coeffs
        on = np.abs(c - w * np.sign(uc))
        off = np.maximum(np.abs(c) - w, 0.0)
        viol = np.where(uc != 0.0, on, off)
        return float(np.linalg.norm(viol))

    def c_theta(self, r_u, r_v, constant=1.0):
        return r_u + r_v


class TotalVariation(Penalty):
    """l1 norm of periodic forward differences of grid samples.

    Coefficients are mapped to ``grid_size`` equispaced samples through the
    fixed real trigonometric synthesis (constant, then cos/sin pairs ordered
    by the global index).  The synthesis matrix is materialized, so this
    penalty is intended for moderate mode counts.
    """

    kind = "tv"
    theta = 0.0

    def __init__(self, basis: BasisSpec, grid_size: int,
                 inner_tol: float = 1e-11, inner_max_iter: int = 50000):
        if basis.dimension != 1:
            raise ValueError("TotalVariation is defined for dimension 1 only")
        if grid_size < 2:
            raise ValueError(f"grid size must be >= 2, got {grid_size}")
        self.basis = basis
        self.grid_size = int(grid_size)
        self.inner_tol = float(inner_tol)
        self.inner_max_iter = int(inner_max_iter)
        self.synthesis = _synthesis_matrix(basis.n_modes, self.grid_size)
        # periodic forward difference of the synthesized samples
        self.diff_synthesis = np.roll(self.synthesis, -1, axis=0) - self.synthesis
        self.lipschitz = _spectral_norm_sq(self.diff_synthesis) * 1.0000001

    def _check_basis(self, u):
        if u.basis != self.basis:
            raise ValueError("field basis does not match the TV grid basis")

    def value(self, u):
        self._check_basis(u)
        return float(np.sum(np.abs(self.diff_synthesis @ u.coeffs)))

    def conjugate(self, q):
        raise NotImplementedError(
            "the convex conjugate of the total-variation penalty is not provided; "
            "use the Hilbert-embedding route for source diagnostics"
        )

    def prox(self, tau, z):
        self._check_prox_args(tau, z)
        self._check_basis(z)
        tol = self.inner_tol * max(1.0, float(np.max(np.abs(z.coeffs))))
        u, _, status = kernels.tv_prox_dual(
            self.diff_synthesis, z.coeffs, tau, self.lipschitz, tol, self.inner_max_iter
        )
        if status == kernels.STATUS_ITER_CAP:
            raise NonconvergenceError(
                f"TV prox: inner dual loop hit the {self.inner_max_iter}-iteration cap"
            )
        return z.with_coeffs(u)

    def subgradient_distance(self, u, candidate):
        """Distance of ``candidate`` to {A^T p : p box-feasible, sign-consistent}."""
        self._check_basis(u)
        A = self.diff_synthesis
        jumps = A @ u.coeffs
        jump_tol = 1e-8 * max(1.0, float(np.max(np.abs(jumps))))
        pinned = np.abs(jumps) > jump_tol
        target = np.sign(jumps)

        def project(p):
            p = np.clip(p, -1.0, 1.0)
            p[pinned] = target[pinned]
            return p

        c = candidate.coeffs
        p = project(np.zeros(A.shape[0]))
        lip = self.lipschitz
        best = np.inf
        for _ in range(2000):
            r = A.T @ p - c
            p_new = project(p - (A @ r) / lip)
            if np.max(np.abs(p_new - p)) <= 1e-12:
                p = p_new
                break
            p = p_new
            best = min(best, float(np.linalg.norm(A.T @ p - c)))
        return float(np.linalg.norm(A.T @ p - c))

    def c_theta(self, r_u, r_v, constant=1.0):
        return r_u + r_v


def _synthesis_matrix(n_modes: int, grid_size: int) -> np.ndarray:
    x = np.arange(grid_size, dtype=np.float64) / grid_size
    phi = np.empty((grid_size, n_modes))
    phi[:, 0] = 1.0
    for ell in range(2, n_modes + 1):
        k = ell // 2
        if ell % 2 == 0:
            phi[:, ell - 1] = np.sqrt(2.0) * np.cos(2.0 * np.pi * k * x)
        else:
            phi[:, ell - 1] = np.sqrt(2.0) * np.sin(2.0 * np.pi * k * x)
    return phi


def _spectral_norm_sq(A: np.ndarray) -> float:
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(200):
        w = A.T @ (A @ v)
        lam_new = float(np.linalg.norm(w))
        if lam_new == 0.0:
            return 0.0
        v = w / lam_new
        if abs(lam_new - lam) <= 1e-12 * max(1.0, lam_new):
            lam = lam_new
            break
        lam = lam_new
    return lam


# ----------------------------------------------------------------------
# Bregman distances and optimality-based subgradients
# ----------------------------------------------------------------------

def bregman(penalty: Penalty, u: CoefficientField, v: CoefficientField,
            mu_v: CoefficientField) -> float:
    """Generalized Bregman distance R(u) - R(v) - <mu_v, u - v>."""
    check_same_basis(u, v)
    return penalty.value(u) - penalty.value(v) - dual_pairing(mu_v, u - v)


def symmetric_bregman(u: CoefficientField, v: CoefficientField,
                      mu_u: CoefficientField, mu_v: CoefficientField) -> float:
    """Symmetric Bregman distance <mu_u - mu_v, u - v>."""
    check_same_basis(u, v)
    return dual_pairing(mu_u - mu_v, u - v)


def subgradient_from_optimality(K: SpectralOperator, f_delta: CoefficientField,
                                u: CoefficientField, alpha: float) -> CoefficientField:
    """Subgradient candidate K*(f - K u)/alpha selected by first-order optimality.

    At a genuine minimizer of the variational objective this is the unique
    optimality-selected element of the subdifferential; for arbitrary ``u``
    it is returned unconditionally as a candidate.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    resid = f_delta.coeffs - K.sigma * u.coeffs
    return u.with_coeffs(K.sigma * resid / alpha, space_tag="X")


# ----------------------------------------------------------------------
# scaling data
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ScalingData:
    """Exponent theta and evaluator for C_theta(u, v) given penalty values."""

    theta: float
    c_theta_eval: Callable[[float, float], float]


def scaling_data(penalty: Penalty, constant: float = 1.0) -> ScalingData:
    return ScalingData(
        theta=penalty.theta,
        c_theta_eval=lambda r_u, r_v: penalty.c_theta(r_u, r_v, constant=constant),
    )


def penalty_from_config(spec: dict, basis: BasisSpec | None = None) -> Penalty:
    """Build a penalty from a config mapping {kind, p|s|grid_size}."""
    kind = spec.get("kind")
    if kind == "quadratic":
        return Quadratic()
    if kind == "ppower":
        if "p" not in spec:
            raise KeyError("penalty.p")
        return PPower(float(spec["p"]))
    if kind == "besov1":
        if "s" not in spec:
            raise KeyError("penalty.s")
        return BesovOne(float(spec["s"]))
    if kind == "tv":
        if "grid_size" not in spec:
            raise KeyError("penalty.grid_size")
        if basis is None:
            raise ValueError("a basis is required to build a TV penalty")
        return TotalVariation(basis, int(spec["grid_size"]))
    raise ValueError(
        f"penalty.kind must be one of quadratic/ppower/besov1/tv, got {kind!r}"
    )
