"""Command-line frontend: solve single instances, run source diagnostics,
run rate sweeps, print parameter-choice rules.

Configs are TOML files mirroring the library types one-to-one; there are no
defaults for scientifically meaningful knobs (noise grid, kappa, penalty
parameters), so they must be explicit.  Every output file embeds the config
hash and the seed, and replays with identical inputs are byte-identical.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # python < 3.11
    import tomli as tomllib

from .basis import BasisSpec, CoefficientField
from .errors import ConfigError, NonconvergenceError
from .experiments import RateExperimentConfig, build_truth, run_rate_sweep
from .fitting import ols_loglog
from .noise import sample_white_noise, synthesize_data
from .operators import operator_from_config
from .penalties import penalty_from_config
from .solvers import SolverOptions, solve_variational
from .source import approx_source_value_any, estimate_source_order, rate_rule


def _require(table: dict, key: str, path: str):
    if key not in table:
        raise ConfigError(f"missing required field '{path}.{key}'")
    return table[key]


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid TOML: {exc}") from exc


def _config_hash(mapping: dict) -> str:
    blob = json.dumps(mapping, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _basis_from(cfg: dict) -> BasisSpec:
    basis = _require(cfg, "basis", "")
    return BasisSpec(int(_require(basis, "dimension", "basis")),
                     int(_require(basis, "n_modes", "basis")))


def _operator_from(cfg: dict, basis: BasisSpec):
    try:
        return operator_from_config(basis, _require(cfg, "operator", ""))
    except KeyError as exc:
        raise ConfigError(f"missing required field '{exc.args[0]}'") from exc


def _penalty_from(cfg: dict, basis: BasisSpec):
    try:
        return penalty_from_config(_require(cfg, "penalty", ""), basis)
    except KeyError as exc:
        raise ConfigError(f"missing required field '{exc.args[0]}'") from exc


def _solver_opts(cfg: dict) -> SolverOptions:
    table = cfg.get("solver", {})
    try:
        return SolverOptions(**table)
    except TypeError as exc:
        raise ConfigError(f"invalid solver option: {exc}") from exc


def _deltas_from(table: dict) -> list[float]:
    if "deltas" in table:
        return [float(x) for x in table["deltas"]]
    for key in ("delta_max", "delta_min", "delta_points"):
        _require(table, key, "sweep")
    return list(np.geomspace(float(table["delta_max"]), float(table["delta_min"]),
                             int(table["delta_points"])))


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def _cmd_solve(args) -> int:
    cfg = _load_config(args.config)
    basis = _basis_from(cfg)
    K = _operator_from(cfg, basis)
    penalty = _penalty_from(cfg, basis)
    table = _require(cfg, "solve", "")
    alpha = float(_require(table, "alpha", "solve"))
    data = _require(table, "data", "solve")
    kind = _require(data, "kind", "solve.data")
    seed = None
    if kind == "file":
        path = Path(_require(data, "path", "solve.data"))
        if not path.is_file():
            raise ConfigError(f"solve.data.path: file not found: {path}")
        f_delta = CoefficientField.from_json(path.read_text())
    elif kind == "synthetic":
        delta = float(_require(data, "delta", "solve.data"))
        seed = int(args.seed if args.seed is not None else _require(data, "seed", "solve.data"))
        truth_spec = _require(data, "truth", "solve.data")
        u_true, _, _, _ = build_truth(truth_spec, basis, K, penalty)
        f_delta = synthesize_data(K, u_true, delta, sample_white_noise(basis, seed))
    else:
        raise ConfigError("solve.data.kind: must be 'file' or 'synthetic'")

    result = solve_variational(K, f_delta, alpha, penalty, _solver_opts(cfg))
    chash = _config_hash({**cfg, "seed_override": seed})
    payload = {
        "config_hash": chash,
        "seed": seed,
        "alpha": alpha,
        "objective": result.objective,
        "iterations": result.iterations,
        "optimality_residual": result.optimality_residual,
        "u": json.loads(result.u.to_json()),
        "mu": json.loads(result.mu.to_json()),
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / f"solve_{chash}.json"
    target.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    if args.verbose:
        print(f"solve: objective={result.objective!r} iterations={result.iterations} "
              f"residual={result.optimality_residual!r}")
    print(target)
    return 0


def _target_field(spec: dict, basis: BasisSpec, K, seed_override):
    kind = _require(spec, "kind", "diagnose.target")
    if kind == "mu_decay":
        a = float(_require(spec, "a", "diagnose.target"))
        return CoefficientField(basis, basis.indices ** (-a), "X"), None
    if kind == "noise_pushforward":
        seed = int(seed_override if seed_override is not None
                   else _require(spec, "seed", "diagnose.target"))
        return sample_white_noise(basis, seed).pushforward(K), seed
    if kind == "file":
        path = Path(_require(spec, "path", "diagnose.target"))
        if not path.is_file():
            raise ConfigError(f"diagnose.target.path: file not found: {path}")
        return CoefficientField.from_json(path.read_text()), None
    raise ConfigError("diagnose.target.kind: must be mu_decay/noise_pushforward/file")


def _cmd_diagnose(args) -> int:
    cfg = _load_config(args.config)
    basis = _basis_from(cfg)
    K = _operator_from(cfg, basis)
    penalty = _penalty_from(cfg, basis)
    table = _require(cfg, "diagnose", "")
    quantity = _require(table, "quantity", "diagnose")
    if "grid" in table:
        grid = np.asarray([float(x) for x in table["grid"]])
    else:
        for key in ("grid_min", "grid_max", "grid_points"):
            _require(table, key, "diagnose")
        grid = np.geomspace(float(table["grid_min"]), float(table["grid_max"]),
                            int(table["grid_points"]))
    target, seed = _target_field(_require(table, "target", "diagnose"), basis, K, args.seed)

    if quantity == "source_order":
        est = estimate_source_order(penalty, K, target, grid, kind=table.get("kind"))
        fitted = est.slope
        values = None
        residual = est.fit_residual
        extra = {"r_hat": est.r_hat, "kind": est.kind}
    elif quantity == "e_curve":
        alpha = float(_require(table, "alpha", "diagnose"))
        values = [approx_source_value_any(penalty, K, alpha, z, target) for z in grid]
        fitted, _, residual = ols_loglog(grid, values)
        extra = {"alpha": alpha}
    else:
        raise ConfigError("diagnose.quantity: must be 'source_order' or 'e_curve'")

    chash = _config_hash({**cfg, "seed_override": seed})
    report = {
        "quantity": quantity,
        "grid": [float(g) for g in grid],
        "values": values,
        "fitted_slope": fitted,
        "predicted_slope": table.get("predicted_slope"),
        "residual": residual,
        "config_hash": chash,
        "seed": seed,
        **extra,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target_path = out / f"diagnose_{chash}.json"
    target_path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    print(target_path)
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    basis_table = _require(cfg, "basis", "")
    sweep = _require(cfg, "sweep", "")
    master_seed = int(args.seed if args.seed is not None
                      else _require(sweep, "master_seed", "sweep"))
    config = RateExperimentConfig(
        dimension=int(_require(basis_table, "dimension", "basis")),
        n_modes=int(_require(basis_table, "n_modes", "basis")),
        operator=_require(cfg, "operator", ""),
        penalty=_require(cfg, "penalty", ""),
        truth=_require(cfg, "truth", ""),
        deltas=_deltas_from(sweep),
        kappa=_require(cfg, "kappa", ""),
        alpha_prefactor=float(_require(sweep, "alpha_prefactor", "sweep")),
        replicates=int(_require(sweep, "replicates", "sweep")),
        master_seed=master_seed,
        output_path=None,
        solver=cfg.get("solver", {}),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config = RateExperimentConfig(**{**config.canonical_dict(),
                                     "output_path": str(out / f"sweep_{config.config_hash()}")})
    try:
        report = run_rate_sweep(config, threads=args.threads)
    except KeyError as exc:
        raise ConfigError(f"missing required field '{exc.args[0]}'") from exc
    if args.verbose:
        for row in report.rows:
            print(f"delta={row.delta!r} alpha={row.alpha!r} "
                  f"mean_bregman={row.mean_bregman!r} stderr={row.stderr_bregman!r}")
    slope = report.fitted_slope if report.slope_defined else None
    print(f"fitted_slope={slope!r} predicted_slope={report.predicted_slope!r}")
    print(Path(config.output_path).with_suffix(".csv"))
    print(Path(config.output_path).with_suffix(".json"))
    return 0


def _cmd_kappa(args) -> int:
    params = {}
    for name in ("r1", "r2", "p", "s", "t", "m", "eps"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    if args.d is not None:
        params["d"] = args.d
    setting = args.setting.replace("-", "_")
    rule = rate_rule(setting, **params)
    print(f"setting={rule.setting} kappa={rule.kappa!r} exponent={rule.predicted_exponent!r}")
    return 0


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="varreg",
                                     description="variational regularization laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the TOML config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("--threads", type=int, default=1, help="worker threads")
        p.add_argument("--verbose", action="store_true")

    common(sub.add_parser("solve", help="solve a single instance"))
    common(sub.add_parser("diagnose", help="source-condition diagnostics"))
    common(sub.add_parser("sweep", help="Monte-Carlo rate sweep"))

    k = sub.add_parser("kappa", help="print the parameter-choice rule")
    k.add_argument("--setting", required=True,
                   help="one-homog | p-homog | quadratic | gaussian-trace | "
                        "gaussian-eigen | besov | tv")
    k.add_argument("--r1", type=float, default=None)
    k.add_argument("--r2", type=float, default=None)
    k.add_argument("--p", type=float, default=None)
    k.add_argument("--s", type=float, default=None)
    k.add_argument("--t", type=float, default=None)
    k.add_argument("--m", type=float, default=None)
    k.add_argument("--d", type=int, default=None)
    k.add_argument("--eps", type=float, default=None)
    return parser


_COMMANDS = {
    "solve": _cmd_solve,
    "diagnose": _cmd_diagnose,
    "sweep": _cmd_sweep,
    "kappa": _cmd_kappa,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NonconvergenceError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
