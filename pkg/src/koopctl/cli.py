"""Command-line harness: ``koopctl {simulate,identify,validate,control}``.

Exit status: 0 success, 2 configuration error, 3 file I/O error,
4 numerical divergence.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import ExperimentConfig
from .errors import ConfigurationError, DivergenceError, EvaluationError
from .experiment import control_summary, identify, run_control, run_validation, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DIVERGED = 4


class _InputError(Exception):
    """A required input file is missing or unreadable."""


def load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        try:
            data = io.read_json(args.config)
        except FileNotFoundError as exc:
            raise _InputError(f"config file not found: {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
    if args.seed is not None:
        data = dict(data, seed=args.seed)
    if args.out is not None:
        data = dict(data, out=args.out)
    if getattr(args, "mode", None):
        data = dict(data, control=dict(data.get("control", {}), mode=args.mode))
    return ExperimentConfig.from_dict(data)


def _prepare_out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    effective = cfg.to_dict()
    # the output location is not part of the experiment
    effective.pop("out")
    io.write_json(out / "config.json", effective)
    return out


def _load_model(path):
    try:
        return io.load_model(path)
    except FileNotFoundError as exc:
        raise _InputError(f"model file not found: {path}") from exc
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise _InputError(f"cannot read model file {path}: {exc}") from exc


def _state_columns(n1, m):
    return [f"X_{i}" for i in range(1, n1 + 1)], [f"U_{i}" for i in range(1, m + 1)]


def cmd_simulate(cfg: ExperimentConfig, args) -> int:
    out = _prepare_out(cfg)
    inputs, samples = simulate(cfg)
    n1, m = 4 * cfg.n_robots, 2 * cfg.n_robots
    xcols, ucols = _state_columns(n1, m)
    io.write_csv(out / "trajectory.csv", ["k"] + xcols + ucols,
                 ([k, *s.z.z1, *s.u] for k, s in enumerate(samples)))
    n_z = n1 + len(cfg.observables())
    io.write_csv(out / "lifted.csv", ["k"] + [f"z_{i}" for i in range(1, n_z + 1)] + ucols,
                 ([k, *s.z.z, *s.u] for k, s in enumerate(samples)))
    print(f"simulate: {len(samples)} steps, {cfg.n_robots} robots, state {n1}, "
          f"lifted {n_z}, inputs {m}, seed {cfg.seed} -> {out}")
    return EXIT_OK


def _first_bad_row(log) -> int:
    bad = ~(np.all(np.isfinite(log.eps), axis=1) & np.all(np.isfinite(log.eps_a), axis=1)
            | log.rejected)
    return int(np.argmax(bad)) if bad.any() else len(log)


def cmd_identify(cfg: ExperimentConfig, args) -> int:
    out = _prepare_out(cfg)
    result = identify(cfg)
    log = result.log
    n = _first_bad_row(log) if result.diverged else len(log)
    rows = ([k, np.linalg.norm(log.eps[k]), np.linalg.norm(log.eps_a[k]),
             np.sqrt(log.m2[k]), log.reset[k], log.rejected[k]] for k in range(n))
    io.write_csv(out / "estimation_log.csv",
                 ["k", "eps_norm", "eps_a_norm", "m", "reset", "rejected"], rows)
    summary = {"model_kind": cfg.model.kind, "samples": len(log),
               "regressor_dim": cfg.regressor_dim(), "n_lifted": len(cfg.observables()),
               "resets": result.estimator.resets, "rejected": int(log.rejected.sum()),
               "diverged": result.diverged}
    if result.diverged:
        summary["diverged_at"] = n
        io.write_json(out / "identify_summary.json", summary)
        print(f"identify: parameter estimate diverged at sample {n}", file=sys.stderr)
        return EXIT_DIVERGED
    if len(log):
        summary["final_eps_norm"] = float(np.linalg.norm(log.eps[-1]))
    if result.parameter_error is not None:
        summary["parameter_error"] = result.parameter_error
    bank = cfg.bank()
    io.save_model(out / "model.json", result.model, observables=cfg.observables(),
                  estimator=result.estimator, bank=None if bank is None else bank.to_dict())
    io.write_json(out / "identify_summary.json", summary)
    line = f"identify: {cfg.model.kind} model, {len(log)} samples, {len(result.estimator.resets)} resets"
    if result.parameter_error is not None:
        line += f", parameter error {result.parameter_error:.3e}"
    print(line)
    return EXIT_OK


def _model_path(cfg, args) -> Path:
    return Path(args.model) if args.model else Path(cfg.out) / "model.json"


def cmd_validate(cfg: ExperimentConfig, args) -> int:
    model = _load_model(_model_path(cfg, args))
    out = _prepare_out(cfg)
    report = run_validation(cfg, model)
    agg = report.aggregates()
    doc = {"metadata": report.metadata, "aggregates": agg, "diverged": report.diverged}
    io.write_json(out / "report.json", _jsonable(doc))
    n = report.n_outputs
    header = ["seed", "k"] + [f"{s}_{i}" for s in ("eps", "eps_a", "neg_eta", "z_tilde")
                              for i in range(1, n + 1)]
    seeds = report.seeds
    steps = _step_indices(seeds)
    rows = ([seeds[r], steps[r], *report.eps[r], *report.eps_a[r],
             *report.neg_eta[r], *report.z_tilde[r]] for r in range(report.horizon))
    io.write_csv(out / "report.csv", header, rows)
    print(f"validate: {len(set(seeds.tolist()))} seeds, z_tilde rmse max "
          f"{float(np.max(report.rmse('z_tilde'), initial=0.0)):.3e}")
    return EXIT_DIVERGED if report.diverged else EXIT_OK


def _step_indices(seeds):
    """Step counter that restarts whenever the seed column changes."""
    steps = np.zeros(len(seeds), dtype=int)
    for r in range(1, len(seeds)):
        steps[r] = steps[r - 1] + 1 if seeds[r] == seeds[r - 1] else 0
    return steps


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def cmd_control(cfg: ExperimentConfig, args) -> int:
    model = _load_model(args.model) if args.model else None
    out = _prepare_out(cfg)
    record, estimator = run_control(cfg, model)
    n1, m = 4 * cfg.n_robots, 2 * cfg.n_robots
    xcols, ucols = _state_columns(n1, m)
    eps = record.eps_norm
    rows = ([k, *record.X[k], *record.U[k], record.utility_realized[k],
             record.utility_predicted[k], eps[k]] for k in range(record.steps))
    io.write_csv(out / "trace.csv",
                 ["k"] + xcols + ucols + ["utility_realized", "utility_predicted", "eps_norm"],
                 rows)
    summary = control_summary(cfg, record, estimator)
    summary["mode"] = cfg.control.mode
    io.write_json(out / "summary.json", summary)
    msg = f"control: {record.steps} steps ({cfg.control.mode}), {len(record.resets)} resets"
    if "mean_goal_distance_ratio" in summary:
        msg += f", goal distance ratio {summary['mean_goal_distance_ratio']:.3f}"
    print(msg)
    if record.aborted:
        print(f"control: aborted: {record.diagnostic}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "identify": cmd_identify,
            "validate": cmd_validate, "control": cmd_control}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="koopctl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="experiment JSON file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help="override the experiment seed")
        p.add_argument("--out", help="output directory")
        if name in ("validate", "control"):
            p.add_argument("--model", help="model JSON written by identify")
        if name == "control":
            g = p.add_mutually_exclusive_group()
            g.add_argument("--adaptive", dest="mode", action="store_const", const="adaptive")
            g.add_argument("--fixed", dest="mode", action="store_const", const="fixed-model")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigurationError as exc:
        print(f"koopctl: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _InputError as exc:
        print(f"koopctl: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"koopctl: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DivergenceError, EvaluationError) as exc:
        print(f"koopctl: numerical failure: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
