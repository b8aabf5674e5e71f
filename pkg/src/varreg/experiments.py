"""Monte-Carlo convergence-rate sweeps.

A sweep draws noise replicates per noise level, solves the variational
problem with the a-priori choice alpha = c * delta**kappa, measures the
symmetric Bregman distance to the fixed truth, and fits the empirical decay
exponent against the rule prediction.  Replicates are seeded individually
from the master seed, so results are bit-identical regardless of thread
count or execution order.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .basis import BasisSpec, CoefficientField
from .errors import ConfigError
from .fitting import ols_loglog
from .noise import derive_seed, sample_white_noise, synthesize_data
from .operators import SpectralOperator, operator_from_config
from .penalties import (
    BesovOne,
    Penalty,
    PPower,
    Quadratic,
    TotalVariation,
    penalty_from_config,
    symmetric_bregman,
)
from .solvers import SolverOptions, solve_variational
from .source import estimate_source_order, rate_rule


# ----------------------------------------------------------------------
# configuration and report types
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RateExperimentConfig:
    dimension: int
    n_modes: int
    operator: dict
    penalty: dict
    truth: dict
    deltas: tuple
    kappa: dict
    alpha_prefactor: float = 1.0
    replicates: int = 1
    master_seed: int = 0
    output_path: str | None = None
    solver: dict = field(default_factory=dict)

    def __post_init__(self):
        d = tuple(float(x) for x in self.deltas)
        if len(d) < 1 or any(x <= 0.0 for x in d):
            raise ConfigError("deltas: need at least one positive noise level")
        if any(d[i] <= d[i + 1] for i in range(len(d) - 1)):
            raise ConfigError("deltas: grid must be strictly decreasing")
        object.__setattr__(self, "deltas", d)
        if self.replicates < 1:
            raise ConfigError("replicates: must be >= 1")

    def canonical_dict(self) -> dict:
        d = asdict(self)
        d.pop("output_path")
        d["deltas"] = list(self.deltas)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class RateRow:
    delta: float
    alpha: float
    mean_bregman: float
    stderr_bregman: float
    median_bregman: float
    mean_residual: float


@dataclass(frozen=True)
class RateReport:
    rows: tuple
    fitted_slope: float
    slope_defined: bool
    predicted_slope: float
    kappa: float
    config_hash: str
    master_seed: int
    seeds: tuple
    measured_r1: float | None
    fit_residual: float


# ----------------------------------------------------------------------
# truth construction
# ----------------------------------------------------------------------

def build_truth(cfg_truth: dict, basis: BasisSpec, K: SpectralOperator, penalty: Penalty):
    """Build (u_true, mu_true, w_dag, measured_r1) from a truth spec.

    exact_source: a witness w is supplied or sampled with documented decay
    (optionally restricted to an index band and normalized), mu = K*w, and
    the truth is the penalty-consistent preimage of mu.  For the
    one-homogeneous kinds the construction starts from a sparse truth and
    derives the canonical subgradient instead.

    synthetic: mu is built componentwise with prescribed decay targeting an
    approximate-source order; the achieved order is measured and recorded.
    """
    kind = cfg_truth.get("kind")
    ell = basis.indices
    if kind == "exact_source":
        if isinstance(penalty, (Quadratic, PPower)):
            if "w" in cfg_truth:
                w = np.asarray(cfg_truth["w"], dtype=np.float64)
                if w.shape != (basis.n_modes,):
                    raise ConfigError("truth.w: length must equal n_modes")
            else:
                decay = float(cfg_truth.get("decay", 1.0))
                w = ell ** (-decay)
                if "band" in cfg_truth:
                    lo, hi = cfg_truth["band"]
                    mask = (ell >= lo) & (ell <= hi)
                    if not mask.any():
                        raise ConfigError("truth.band: empty index band")
                    w = np.where(mask, w, 0.0)
                norm = cfg_truth.get("norm")
                if norm is not None:
                    w = w * (float(norm) / np.linalg.norm(w))
            mu = K.sigma * w
            u = _penalty_preimage(penalty, mu)
            return (CoefficientField(basis, u, "X"),
                    CoefficientField(basis, mu, "X"),
                    CoefficientField(basis, w, "Y"), None)
        if isinstance(penalty, BesovOne):
            u = _sparse_truth(cfg_truth, ell)
            d = penalty.weight_vector(basis)
            mu = np.where(u != 0.0, d * np.sign(u), 0.0)
            w = mu / K.sigma
            return (CoefficientField(basis, u, "X"),
                    CoefficientField(basis, mu, "X"),
                    CoefficientField(basis, w, "Y"), None)
        if isinstance(penalty, TotalVariation):
            u = _sparse_truth(cfg_truth, ell)
            jumps = penalty.diff_synthesis @ u
            p = np.sign(np.where(np.abs(jumps) > 1e-12, jumps, 0.0))
            mu = penalty.diff_synthesis.T @ p
            w = mu / K.sigma
            return (CoefficientField(basis, u, "X"),
                    CoefficientField(basis, mu, "X"),
                    CoefficientField(basis, w, "Y"), None)
        raise ConfigError(f"truth.kind=exact_source unsupported for penalty {penalty.kind}")

    if kind == "synthetic":
        r1 = float(cfg_truth.get("target_r1", 0.5))
        t = _smoothing_order(K)
        if isinstance(penalty, (Quadratic, PPower)):
            # decay exponent from the p-homogeneous order relation
            a = t * (1.0 - r1) + 0.5 if isinstance(penalty, Quadratic) \
                else (2.0 * t + 1.0) / (2.0 + r1)
            mu = ell ** (-a)
            u = _penalty_preimage(penalty, mu)
            mu_f = CoefficientField(basis, mu, "X")
            grid = np.asarray(cfg_truth.get("order_grid", np.logspace(-3, 0, 8)))
            est = estimate_source_order(penalty, K, mu_f, grid, kind="p_homog")
            return CoefficientField(basis, u, "X"), mu_f, None, est.r_hat
        if isinstance(penalty, BesovOne):
            s = penalty.s
            a = (2.0 * t + 1.0 - r1 * (s - 0.5)) / (r1 + 2.0)
            mu = ell ** (-a)
            mu[0] = 1.0  # subgradient at the first mode carries the truth support
            d = penalty.weight_vector(basis)
            mu = np.sign(mu) * np.minimum(np.abs(mu), d)
            u = np.zeros(basis.n_modes)
            u[0] = float(cfg_truth.get("scale", 1.0))
            mu_f = CoefficientField(basis, mu, "X")
            grid = np.asarray(cfg_truth.get("order_grid", np.logspace(-3, 0, 8)))
            est = estimate_source_order(penalty, K, mu_f, grid, kind="one_homog")
            return CoefficientField(basis, u, "X"), mu_f, None, est.r_hat
        raise ConfigError(f"truth.kind=synthetic unsupported for penalty {penalty.kind}")

    raise ConfigError("truth.kind: must be 'exact_source' or 'synthetic'")


def _penalty_preimage(penalty, mu):
    """Invert the duality map so that mu is a subgradient at the returned point."""
    if isinstance(penalty, Quadratic):
        return mu.copy()
    qexp = penalty.q
    return np.sign(mu) * np.abs(mu) ** (qexp - 1.0)


def _sparse_truth(cfg_truth, ell):
    if "u" in cfg_truth:
        return np.asarray(cfg_truth["u"], dtype=np.float64)
    k = int(cfg_truth.get("u_modes", 1))
    decay = float(cfg_truth.get("u_decay", 1.0))
    scale = float(cfg_truth.get("scale", 1.0))
    u = np.where(ell <= k, scale * ell ** (-decay), 0.0)
    return u


def _smoothing_order(K: SpectralOperator) -> float:
    if K.smoothing_order is not None:
        return float(K.smoothing_order)
    slope, _, _ = ols_loglog(K.basis.weights, K.sigma)
    return max(-slope, 0.0)


# ----------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------

def fit_rate(points) -> tuple[float, float, float]:
    """OLS fit of log(value) against log(delta): (slope, intercept, residual)."""
    pts = [(float(d), float(v)) for d, v in points]
    if len(pts) < 2:
        raise ValueError("fit_rate needs at least 2 points")
    deltas = np.array([p[0] for p in pts])
    values = np.array([p[1] for p in pts])
    if np.unique(deltas).size < 2:
        raise ValueError("fit_rate needs at least 2 distinct delta values")
    return ols_loglog(deltas, values)


def mc_expectation(evaluator, draws: int, master_seed: int) -> tuple[float, float]:
    """Sample mean and standard error of a seeded evaluator.

    Per-draw seeds derive from the master seed; aggregation is a fixed-order
    pairwise sum, so the result is independent of scheduling.
    """
    if draws < 2:
        raise ValueError(f"draws must be >= 2, got {draws}")
    values = np.empty(draws)
    for i in range(draws):
        values[i] = evaluator(derive_seed(master_seed, i))
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / np.sqrt(draws))
    return mean, stderr


def _kappa_and_prediction(cfg: RateExperimentConfig) -> tuple[float, float]:
    spec = dict(cfg.kappa)
    source = spec.pop("source", "theorem")
    if source == "explicit":
        if "value" not in spec:
            raise ConfigError("kappa.value: required for source='explicit'")
        kappa = float(spec["value"])
        return kappa, float(spec.get("predicted_exponent", kappa))
    if source == "theorem":
        if "setting" not in spec:
            raise ConfigError("kappa.setting: required for source='theorem'")
        rule = rate_rule(**spec)
        return rule.kappa, rule.predicted_exponent
    raise ConfigError("kappa.source: must be 'theorem' or 'explicit'")


def run_rate_sweep(cfg: RateExperimentConfig, threads: int = 1) -> RateReport:
    """Execute the sweep described by ``cfg`` and optionally persist it.

    Writes one CSV row per (delta, replicate) plus a JSON summary when
    ``cfg.output_path`` is set.  A solver failure aborts the sweep with the
    offending (delta, seed) named.
    """
    basis = BasisSpec(cfg.dimension, cfg.n_modes)
    K = operator_from_config(basis, cfg.operator)
    penalty = penalty_from_config(cfg.penalty, basis)
    u_true, mu_true, _, measured_r1 = build_truth(cfg.truth, basis, K, penalty)
    kappa, predicted = _kappa_and_prediction(cfg)
    opts = SolverOptions(**cfg.solver) if cfg.solver else SolverOptions()

    n_d = len(cfg.deltas)
    reps = cfg.replicates
    seeds = [[derive_seed(cfg.master_seed, i, j) for j in range(reps)] for i in range(n_d)]
    bregman = np.empty((n_d, reps))
    residual = np.empty((n_d, reps))
    objective = np.empty((n_d, reps))

    def task(i, j):
        delta = cfg.deltas[i]
        alpha = cfg.alpha_prefactor * delta**kappa
        seed = seeds[i][j]
        try:
            sample = sample_white_noise(basis, seed)
            f_delta = synthesize_data(K, u_true, delta, sample)
            res = solve_variational(K, f_delta, alpha, penalty, opts)
        except Exception as exc:
            raise RuntimeError(
                f"sweep aborted at delta={delta!r}, seed={seed}: {exc}"
            ) from exc
        diff = res.u.coeffs - u_true.coeffs
        bregman[i, j] = symmetric_bregman(res.u, u_true, res.mu, mu_true)
        residual[i, j] = float(np.sum((K.sigma * diff) ** 2))
        objective[i, j] = res.objective

    pairs = [(i, j) for i in range(n_d) for j in range(reps)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda ij: task(*ij), pairs))
    else:
        for i, j in pairs:
            task(i, j)

    rows = []
    for i, delta in enumerate(cfg.deltas):
        vals = bregman[i]
        stderr = float(vals.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
        rows.append(RateRow(
            delta=float(delta),
            alpha=float(cfg.alpha_prefactor * delta**kappa),
            mean_bregman=float(vals.mean()),
            stderr_bregman=stderr,
            median_bregman=float(np.median(vals)),
            mean_residual=float(residual[i].mean()),
        ))

    means = np.array([r.mean_bregman for r in rows])
    slope_defined = n_d >= 2 and bool(np.all(means > 0.0))
    if slope_defined:
        slope, _, fit_resid = fit_rate([(r.delta, r.mean_bregman) for r in rows])
    else:
        slope, fit_resid = float("nan"), float("nan")

    report = RateReport(
        rows=tuple(rows),
        fitted_slope=slope,
        slope_defined=slope_defined,
        predicted_slope=predicted,
        kappa=kappa,
        config_hash=cfg.config_hash(),
        master_seed=cfg.master_seed,
        seeds=tuple(tuple(s) for s in seeds),
        measured_r1=measured_r1,
        fit_residual=fit_resid,
    )
    if cfg.output_path is not None:
        write_report(cfg, report, bregman, residual, objective)
    return report


def write_report(cfg: RateExperimentConfig, report: RateReport,
                 bregman, residual, objective) -> tuple[Path, Path]:
    """Persist the per-replicate CSV and the JSON summary (byte-stable)."""
    base = Path(cfg.output_path)
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path = base.with_suffix(".csv")
    json_path = base.with_suffix(".json")

    lines = [
        f"# config_hash={report.config_hash} master_seed={cfg.master_seed}",
        "delta,alpha,replicate,seed,bregman,residual,objective",
    ]
    for i, delta in enumerate(cfg.deltas):
        alpha = cfg.alpha_prefactor * delta**report.kappa
        for j in range(cfg.replicates):
            lines.append(
                f"{float(delta)!r},{float(alpha)!r},{j},{report.seeds[i][j]},"
                f"{float(bregman[i, j])!r},{float(residual[i, j])!r},{float(objective[i, j])!r}"
            )
    csv_path.write_text("\n".join(lines) + "\n")

    summary = {
        "config_hash": report.config_hash,
        "master_seed": cfg.master_seed,
        "kappa": report.kappa,
        "fitted_slope": report.fitted_slope if report.slope_defined else None,
        "slope_defined": report.slope_defined,
        "predicted_slope": report.predicted_slope,
        "fit_residual": report.fit_residual if report.slope_defined else None,
        "measured_r1": report.measured_r1,
        "rows": [asdict(r) for r in report.rows],
    }
    json_path.write_text(json.dumps(summary, sort_keys=True, indent=2) + "\n")
    return csv_path, json_path
