"""Hot numeric kernels: numba-jitted fast paths with pure-numpy fallbacks.

Every kernel exists twice with identical semantics: ``_np`` (vectorized
numpy, always available) and ``_nb`` (numba ``@njit``).  The dispatched
public functions pick the jitted path unless numba is missing or the
environment variable ``VARREG_NO_NUMBA=1`` is set.  ``benchmarks/`` times
the two paths against each other.

All kernels operate on raw float64 arrays and are pure.  Status codes:
0 converged, 1 iteration cap hit, 2 objective increased in monotone mode.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


STATUS_OK = 0
STATUS_ITER_CAP = 1
STATUS_DIVERGED = 2

_BISECT_TOL = 1e-12
_BISECT_CAP = 200


def numba_enabled() -> bool:
    return HAVE_NUMBA and os.environ.get("VARREG_NO_NUMBA", "0") != "1"


# ----------------------------------------------------------------------
# soft threshold
# ----------------------------------------------------------------------

def soft_threshold_np(z, thr):
    return np.sign(z) * np.maximum(np.abs(z) - thr, 0.0)


@njit(cache=True)
def soft_threshold_nb(z, thr):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        a = abs(z[i]) - thr[i]
        out[i] = np.sign(z[i]) * a if a > 0.0 else 0.0
    return out


def soft_threshold(z, thr):
    """Componentwise shrinkage; exact threshold hits map to 0."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    thr = np.ascontiguousarray(np.broadcast_to(thr, z.shape), dtype=np.float64)
    if numba_enabled():
        return soft_threshold_nb(z, thr)
    return soft_threshold_np(z, thr)


# ----------------------------------------------------------------------
# p-power prox by componentwise bisection
# ----------------------------------------------------------------------

def ppower_prox_np(z, tau, p):
    a = np.abs(z)
    lo = np.zeros_like(a)
    hi = a.copy()
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (lo + hi)
        high = mid + tau * mid ** (p - 1.0) > a
        hi = np.where(high, mid, hi)
        lo = np.where(high, lo, mid)
        if np.max(hi - lo) <= _BISECT_TOL:
            break
    return np.sign(z) * 0.5 * (lo + hi)


@njit(cache=True)
def ppower_prox_nb(z, tau, p):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        a = abs(z[i])
        lo = 0.0
        hi = a
        for _ in range(_BISECT_CAP):
            if hi - lo <= _BISECT_TOL:
                break
            mid = 0.5 * (lo + hi)
            if mid + tau * mid ** (p - 1.0) > a:
                hi = mid
            else:
                lo = mid
        out[i] = np.sign(z[i]) * 0.5 * (lo + hi)
    return out


def ppower_prox(z, tau, p):
    """Solve u + tau*sign(u)|u|**(p-1) = z componentwise (monotone bracket)."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    if numba_enabled():
        return ppower_prox_nb(z, float(tau), float(p))
    return ppower_prox_np(z, float(tau), float(p))


# ----------------------------------------------------------------------
# proximal gradient for the diagonal smooth part + weighted-l1 penalty
# ----------------------------------------------------------------------
# objective: 0.5*sum(sigma2*u**2) - sum(b*u) + alpha*sum(w*|u|), b = K* f.

def _l1_objective(u, sigma2, b, w, alpha):
    return 0.5 * np.sum(sigma2 * u * u) - np.sum(b * u) + alpha * np.sum(w * np.abs(u))


def _l1_residual(u, sigma2, b, w, alpha):
    c = (b - sigma2 * u) / alpha
    on = np.abs(c - w * np.sign(u))
    off = np.maximum(np.abs(c) - w, 0.0)
    viol = np.where(u != 0.0, on, off)
    return alpha * float(np.linalg.norm(viol))


def prox_grad_l1_diag_np(sigma2, b, w, alpha, step, tol, max_iter, accelerated):
    u = np.zeros_like(b)
    y = u.copy()
    u_prev = u.copy()
    t = 1.0
    obj_prev = _l1_objective(u, sigma2, b, w, alpha)
    thr = step * alpha * w
    for k in range(1, max_iter + 1):
        z = y - step * (sigma2 * y - b)
        u = soft_threshold_np(z, thr)
        obj = _l1_objective(u, sigma2, b, w, alpha)
        if accelerated:
            if obj > obj_prev:  # function restart
                t = 1.0
                y = u.copy()
            else:
                t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
                y = u + ((t - 1.0) / t_next) * (u - u_prev)
                t = t_next
        else:
            if obj > obj_prev + 1e-10 * (1.0 + abs(obj_prev)):
                return u, k, _l1_residual(u, sigma2, b, w, alpha), STATUS_DIVERGED
            y = u
        resid = _l1_residual(u, sigma2, b, w, alpha)
        if resid <= tol:
            return u, k, resid, STATUS_OK
        u_prev = u.copy()
        obj_prev = obj
    return u, max_iter, _l1_residual(u, sigma2, b, w, alpha), STATUS_ITER_CAP


@njit(cache=True)
def prox_grad_l1_diag_nb(sigma2, b, w, alpha, step, tol, max_iter, accelerated):
    n = b.shape[0]
    u = np.zeros(n)
    u_prev = np.zeros(n)
    y = np.zeros(n)
    t = 1.0
    obj_prev = 0.0
    status = STATUS_ITER_CAP
    iters = max_iter
    resid = 0.0
    for k in range(1, max_iter + 1):
        obj = 0.0
        for i in range(n):
            z = y[i] - step * (sigma2[i] * y[i] - b[i])
            a = abs(z) - step * alpha * w[i]
            ui = np.sign(z) * a if a > 0.0 else 0.0
            u[i] = ui
            obj += 0.5 * sigma2[i] * ui * ui - b[i] * ui + alpha * w[i] * abs(ui)
        if accelerated:
            if obj > obj_prev and k > 1:
                t = 1.0
                for i in range(n):
                    y[i] = u[i]
            else:
                t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
                for i in range(n):
                    y[i] = u[i] + ((t - 1.0) / t_next) * (u[i] - u_prev[i])
                t = t_next
        else:
            if k > 1 and obj > obj_prev + 1e-10 * (1.0 + abs(obj_prev)):
                status = STATUS_DIVERGED
                iters = k
                break
            for i in range(n):
                y[i] = u[i]
        sq = 0.0
        for i in range(n):
            c = (b[i] - sigma2[i] * u[i]) / alpha
            if u[i] != 0.0:
                v = abs(c - w[i] * np.sign(u[i]))
            else:
                v = abs(c) - w[i]
                if v < 0.0:
                    v = 0.0
            sq += v * v
        resid = alpha * np.sqrt(sq)
        if resid <= tol:
            status = STATUS_OK
            iters = k
            break
        for i in range(n):
            u_prev[i] = u[i]
        obj_prev = obj
    if status == STATUS_ITER_CAP or status == STATUS_DIVERGED:
        sq = 0.0
        for i in range(n):
            c = (b[i] - sigma2[i] * u[i]) / alpha
            if u[i] != 0.0:
                v = abs(c - w[i] * np.sign(u[i]))
            else:
                v = abs(c) - w[i]
                if v < 0.0:
                    v = 0.0
            sq += v * v
        resid = alpha * np.sqrt(sq)
    return u, iters, resid, status


def prox_grad_l1_diag(sigma2, b, w, alpha, step, tol, max_iter, accelerated=False):
    sigma2 = np.ascontiguousarray(sigma2, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    args = (sigma2, b, w, float(alpha), float(step), float(tol), int(max_iter), bool(accelerated))
    if numba_enabled():
        return prox_grad_l1_diag_nb(*args)
    return prox_grad_l1_diag_np(*args)


# ----------------------------------------------------------------------
# proximal gradient for the diagonal smooth part + (1/p)||u||_p^p penalty
# ----------------------------------------------------------------------

def _ppower_objective(u, sigma2, b, alpha, p):
    return 0.5 * np.sum(sigma2 * u * u) - np.sum(b * u) + (alpha / p) * np.sum(np.abs(u) ** p)


def _ppower_residual(u, sigma2, b, alpha, p):
    jp = np.sign(u) * np.abs(u) ** (p - 1.0)
    return float(np.linalg.norm(sigma2 * u - b + alpha * jp))


def prox_grad_ppower_diag_np(sigma2, b, alpha, p, step, tol, max_iter, accelerated):
    u = np.zeros_like(b)
    u_prev = u.copy()
    y = u.copy()
    t = 1.0
    obj_prev = _ppower_objective(u, sigma2, b, alpha, p)
    for k in range(1, max_iter + 1):
        z = y - step * (sigma2 * y - b)
        u = ppower_prox_np(z, step * alpha, p)
        obj = _ppower_objective(u, sigma2, b, alpha, p)
        if accelerated:
            if obj > obj_prev:
                t = 1.0
                y = u.copy()
            else:
                t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
                y = u + ((t - 1.0) / t_next) * (u - u_prev)
                t = t_next
        else:
            if obj > obj_prev + 1e-10 * (1.0 + abs(obj_prev)):
                return u, k, _ppower_residual(u, sigma2, b, alpha, p), STATUS_DIVERGED
            y = u
        resid = _ppower_residual(u, sigma2, b, alpha, p)
        if resid <= tol:
            return u, k, resid, STATUS_OK
        u_prev = u.copy()
        obj_prev = obj
    return u, max_iter, _ppower_residual(u, sigma2, b, alpha, p), STATUS_ITER_CAP


@njit(cache=True)
def prox_grad_ppower_diag_nb(sigma2, b, alpha, p, step, tol, max_iter, accelerated):
    n = b.shape[0]
    u = np.zeros(n)
    u_prev = np.zeros(n)
    y = np.zeros(n)
    t = 1.0
    obj_prev = 0.0
    status = STATUS_ITER_CAP
    iters = max_iter
    resid = 0.0
    tau = step * alpha
    for k in range(1, max_iter + 1):
        obj = 0.0
        for i in range(n):
            z = y[i] - step * (sigma2[i] * y[i] - b[i])
            a = abs(z)
            lo = 0.0
            hi = a
            for _ in range(_BISECT_CAP):
                if hi - lo <= _BISECT_TOL:
                    break
                mid = 0.5 * (lo + hi)
                if mid + tau * mid ** (p - 1.0) > a:
                    hi = mid
                else:
                    lo = mid
            ui = np.sign(z) * 0.5 * (lo + hi)
            u[i] = ui
            obj += 0.5 * sigma2[i] * ui * ui - b[i] * ui + (alpha / p) * abs(ui) ** p
        if accelerated:
            if obj > obj_prev and k > 1:
                t = 1.0
                for i in range(n):
                    y[i] = u[i]
            else:
                t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
                for i in range(n):
                    y[i] = u[i] + ((t - 1.0) / t_next) * (u[i] - u_prev[i])
                t = t_next
        else:
            if k > 1 and obj > obj_prev + 1e-10 * (1.0 + abs(obj_prev)):
                status = STATUS_DIVERGED
                iters = k
                break
            for i in range(n):
                y[i] = u[i]
        sq = 0.0
        for i in range(n):
            jp = np.sign(u[i]) * abs(u[i]) ** (p - 1.0)
            r = sigma2[i] * u[i] - b[i] + alpha * jp
            sq += r * r
        resid = np.sqrt(sq)
        if resid <= tol:
            status = STATUS_OK
            iters = k
            break
        for i in range(n):
            u_prev[i] = u[i]
        obj_prev = obj
    if status != STATUS_OK:
        sq = 0.0
        for i in range(n):
            jp = np.sign(u[i]) * abs(u[i]) ** (p - 1.0)
            r = sigma2[i] * u[i] - b[i] + alpha * jp
            sq += r * r
        resid = np.sqrt(sq)
    return u, iters, resid, status


def prox_grad_ppower_diag(sigma2, b, alpha, p, step, tol, max_iter, accelerated=False):
    sigma2 = np.ascontiguousarray(sigma2, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    args = (sigma2, b, float(alpha), float(p), float(step), float(tol), int(max_iter), bool(accelerated))
    if numba_enabled():
        return prox_grad_ppower_diag_nb(*args)
    return prox_grad_ppower_diag_np(*args)


# ----------------------------------------------------------------------
# total-variation prox via the box-constrained dual
# ----------------------------------------------------------------------
# prox problem: argmin_u 0.5*||u - z||^2 + tau*||A u||_1.  The dual is
# min_p 0.5*||A^T p - z||^2 over ||p||_inf <= tau, with u = z - A^T p.
# Accelerated projected gradient with function restart.

def tv_prox_dual_np(A, z, tau, lip, tol, max_iter):
    m = A.shape[0]
    p = np.zeros(m)
    y = p.copy()
    p_prev = p.copy()
    t = 1.0
    u = z.copy()
    h_prev = 0.5 * float(np.dot(u, u))
    for k in range(1, max_iter + 1):
        grad = A @ (A.T @ y - z)
        p = np.clip(y - grad / lip, -tau, tau)
        u_new = z - A.T @ p
        h = 0.5 * float(np.dot(u_new, u_new))
        if h > h_prev:
            t = 1.0
            y = p.copy()
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = p + ((t - 1.0) / t_next) * (p - p_prev)
            t = t_next
        change = float(np.max(np.abs(u_new - u)))
        u = u_new
        if change <= tol:
            return u, k, STATUS_OK
        p_prev = p.copy()
        h_prev = h
    return u, max_iter, STATUS_ITER_CAP


@njit(cache=True)
def tv_prox_dual_nb(A, z, tau, lip, tol, max_iter):
    m = A.shape[0]
    p = np.zeros(m)
    y = np.zeros(m)
    p_prev = np.zeros(m)
    t = 1.0
    u = z.copy()
    h_prev = 0.5 * np.dot(u, u)
    status = STATUS_ITER_CAP
    iters = max_iter
    for k in range(1, max_iter + 1):
        grad = np.dot(A, np.dot(A.T, y) - z)
        for i in range(m):
            v = y[i] - grad[i] / lip
            if v > tau:
                v = tau
            elif v < -tau:
                v = -tau
            p[i] = v
        u_new = z - np.dot(A.T, p)
        h = 0.5 * np.dot(u_new, u_new)
        if h > h_prev:
            t = 1.0
            for i in range(m):
                y[i] = p[i]
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            for i in range(m):
                y[i] = p[i] + ((t - 1.0) / t_next) * (p[i] - p_prev[i])
            t = t_next
        change = 0.0
        for i in range(u.shape[0]):
            d = abs(u_new[i] - u[i])
            if d > change:
                change = d
            u[i] = u_new[i]
        if change <= tol:
            status = STATUS_OK
            iters = k
            break
        for i in range(m):
            p_prev[i] = p[i]
        h_prev = h
    return u, iters, status


def tv_prox_dual(A, z, tau, lip, tol, max_iter):
    A = np.ascontiguousarray(A, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    args = (A, z, float(tau), float(lip), float(tol), int(max_iter))
    if numba_enabled():
        return tv_prox_dual_nb(*args)
    return tv_prox_dual_np(*args)
