"""Command-line front door.

Three subcommands: ``interval`` computes a prediction set for supplied
data, ``simulate`` runs the coverage/width study, ``sweep`` runs the prior
hyperparameter sweep. Stdout carries a human summary unless ``--json``
switches it to machine mode; files carry the machine output either way,
and a manifest is written atomically next to every output so a run can be
reproduced bit-exactly from its recorded config.

Config precedence: flags > config file > defaults. The CONFBAYES_SEED
environment variable backs the master seed when no flag or config value
supplies one.

Exit codes: 0 success, 2 usage/validation, 3 numeric/model failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import tempfile
import time
from typing import List, Optional

from confbayes import __version__
from confbayes.analytic_cp import analytic_full_cp
from confbayes.core import ContinuousInterval, ObservedSample, PredictionSet
from confbayes.errors import ConfBayesError
from confbayes.full_cp import CandidateGrid, full_cp_grid
from confbayes.models import (
    BetaPrior,
    BinomialModel,
    NormalGammaPrior,
    NormalModel,
    fit_ppd,
    hppd_interval,
)
from confbayes.scores import make_score
from confbayes.sim import (
    DEFAULT_SWEEP_GRID,
    StudyConfig,
    prior_sweep,
    report_rows,
    run_study,
    study_id,
    write_csv,
)
from confbayes.split_cp import SplitConfig, split_cp_bres, split_cp_density, split_cp_qbres

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _atomic_write(path: str, content: str) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-manifest-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(
    path: str, command: str, resolved_config: dict, seeds: dict, outputs: List[str], t0: float
) -> None:
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "resolved_config": resolved_config,
        "tool_version": __version__,
        "seeds": seeds,
        "started_at": datetime.datetime.fromtimestamp(t0, datetime.timezone.utc).isoformat(),
        "finished_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": outputs,
    }
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _resolve(flag, cfg_file: dict, key: str, default):
    if flag is not None:
        return flag
    if key in cfg_file:
        return cfg_file[key]
    return default


def _resolve_seed(flag, cfg_file: dict, default: int) -> int:
    if flag is not None:
        return int(flag)
    if "master_seed" in cfg_file:
        return int(cfg_file["master_seed"])
    env = os.environ.get("CONFBAYES_SEED")
    if env is not None:
        return int(env)
    return default


def _read_outcomes(args) -> List[float]:
    if args.y:
        return [float(v) for v in args.y.split(",") if v.strip() != ""]
    if not args.data:
        raise ValueError("supply --data FILE or --y 'v1,v2,...'")
    vals = []
    with open(args.data) as fh:
        for idx, line in enumerate(fh):
            tok = line.strip().split(",")[0]
            if tok == "":
                continue
            try:
                vals.append(float(tok))
            except ValueError:
                if idx == 0:  # optional header
                    continue
                raise
    return vals


def _set_to_dict(ps: PredictionSet) -> dict:
    if isinstance(ps.kind, ContinuousInterval):
        return {
            "type": "interval",
            "lower": ps.kind.lower,
            "upper": ps.kind.upper,
            "open_ends": ps.kind.open_ends,
            "size": ps.size,
            "flags": list(ps.flags),
        }
    return {
        "type": "discrete",
        "members": list(ps.kind.members),
        "size": ps.size,
        "flags": list(ps.flags),
    }


def cmd_interval(args) -> int:
    cfg_file = _load_config_file(args.config)
    alpha = float(_resolve(args.alpha, cfg_file, "alpha", 0.1))
    if not 0.0 < alpha < 1.0:
        print(f"error: --alpha must lie in (0, 1), got {alpha}", file=sys.stderr)
        return EXIT_USAGE
    try:
        outcomes = _read_outcomes(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    seed = _resolve_seed(args.seed, cfg_file, 0)
    method = args.method
    score = args.score
    t0 = time.time()
    try:
        if args.model == "binomial":
            if args.m is None:
                print("error: --m is required for the binomial model", file=sys.stderr)
                return EXIT_USAGE
            data = ObservedSample(outcomes, trial_size=args.m)
            prior = BetaPrior(args.prior_a, args.prior_b)
            model = BinomialModel(args.m)
            grid = CandidateGrid.binomial_support(args.m)
        else:
            data = ObservedSample(outcomes)
            prior = NormalGammaPrior(args.prior_mu, args.prior_tau2, args.prior_a, args.prior_b)
            model = NormalModel()
            if args.grid_lo is not None and args.grid_hi is not None:
                grid = CandidateGrid.continuous(args.grid_lo, args.grid_hi, args.grid_points)
            else:
                grid = None

        diagnostics = None
        if method == "analytic":
            if args.model != "binomial" and args.model != "normal":
                raise ValueError("analytic method needs a conjugate model")
            ps = analytic_full_cp(data, prior, alpha)
        elif method == "hppd":
            ps = hppd_interval(fit_ppd(data, prior), alpha)
        elif method == "full":
            spec = make_score(score, alpha if score == "qbres" else None)
            ps, diag = full_cp_grid(
                data, model, prior, spec, grid, alpha, return_diagnostics=True
            )
            diagnostics = diag.to_dict()
        elif method == "split":
            scfg = SplitConfig(train_fraction=args.train_frac, seed=seed)
            if score == "bres":
                ps = split_cp_bres(data, model, prior, scfg, alpha)
            elif score == "qbres":
                ps = split_cp_qbres(data, model, prior, scfg, alpha)
            else:
                ps = split_cp_density(data, model, prior, scfg, alpha, score, grid)
        else:  # pragma: no cover - argparse restricts choices
            raise ValueError(method)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConfBayesError, FloatingPointError, OverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    result = {
        "model": args.model,
        "method": method,
        "score": score if method in ("full", "split") else ("bres" if method == "analytic" else ""),
        "alpha": alpha,
        "n": data.n,
        "seed": seed,
        "set": _set_to_dict(ps),
    }
    if diagnostics is not None:
        result["diagnostics"] = diagnostics
    if args.out:
        _atomic_write(args.out, json.dumps(result, indent=2) + "\n")
        write_manifest(
            args.out + ".manifest.json",
            "interval",
            {k: v for k, v in vars(args).items() if k != "func"},
            {"seed": seed},
            [args.out],
            t0,
        )
    if args.json:
        print(json.dumps(result, indent=2))
    else:
        kind = result["set"]
        if kind["type"] == "discrete":
            print(f"{method} prediction set ({100 * (1 - alpha):g}%): {kind['members']}")
        else:
            print(
                f"{method} prediction interval ({100 * (1 - alpha):g}%): "
                f"[{kind['lower']:.6g}, {kind['upper']:.6g}]"
            )
        print(f"size: {kind['size']:g}" + (f"  flags: {kind['flags']}" if kind["flags"] else ""))
    return EXIT_OK


def _study_config_from_args(args) -> StudyConfig:
    cfg_file = _load_config_file(args.config)
    methods = _resolve(args.methods, cfg_file, "methods", None)
    if isinstance(methods, str):
        methods = tuple(s.strip() for s in methods.split(",") if s.strip())
    kwargs = dict(
        n=int(_resolve(args.n, cfg_file, "n", 20)),
        m=int(_resolve(args.m, cfg_file, "m", 20)),
        theta_true=float(_resolve(args.theta, cfg_file, "theta_true", 0.7)),
        prior=BetaPrior(
            float(_resolve(args.prior_a, cfg_file, "prior_a", 0.5)),
            float(_resolve(args.prior_b, cfg_file, "prior_b", 0.5)),
        ),
        alpha=float(_resolve(args.alpha, cfg_file, "alpha", 0.1)),
        n_rep=int(_resolve(args.reps, cfg_file, "n_rep", 1000)),
        master_seed=_resolve_seed(args.seed, cfg_file, 20240817),
    )
    if methods:
        kwargs["methods"] = tuple(methods)
    return StudyConfig(**kwargs)


def cmd_simulate(args) -> int:
    t0 = time.time()
    try:
        cfg = _study_config_from_args(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run_study(cfg, workers=args.workers)
        rows = report_rows(report, include_timings=args.timings)
    except ConfBayesError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    out = args.out or f"study-{study_id(cfg)}.csv"
    write_csv(out, rows)
    _atomic_write(out + ".config.json", json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
    write_manifest(
        out + ".manifest.json",
        "simulate",
        cfg.to_dict(),
        {"master_seed": cfg.master_seed},
        [out, out + ".config.json"],
        t0,
    )
    if args.json:
        print(
            json.dumps(
                {
                    "study_id": study_id(cfg),
                    "csv": out,
                    "methods": {
                        mid: vars(s) for mid, s in report.methods.items()
                    },
                    "extras": report.extras,
                },
                indent=2,
            )
        )
    else:
        print(f"study {study_id(cfg)}: {cfg.n_rep} replications -> {out}")
        for mid in cfg.methods:
            s = report.methods[mid]
            print(
                f"  {mid:12s} coverage={s.coverage:.3f} (se {s.coverage_se:.3f})  "
                f"rel_width={s.mean_rel_width:.3f}  errors={s.n_err}"
            )
        if report.extras:
            print(f"  extras: {report.extras}")
    return EXIT_OK


def _parse_grid(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    return [float(v) for v in text.split(",") if v.strip() != ""]


def cmd_sweep(args) -> int:
    t0 = time.time()
    try:
        cfg = _study_config_from_args(args)
        a_grid = _parse_grid(args.a_grid) or list(DEFAULT_SWEEP_GRID)
        b_grid = _parse_grid(args.b_grid) or list(DEFAULT_SWEEP_GRID)
        methods = tuple(
            s.strip() for s in (args.sweep_methods or "hppd,analytic").split(",") if s.strip()
        )
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cells = prior_sweep(cfg, a_grid, b_grid, methods=methods, workers=args.workers)
    except ConfBayesError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    rows: List[List[str]] = []
    for _a, _b, rep in cells:
        rows.extend(report_rows(rep, include_timings=args.timings))
    out = args.out or "sweep.csv"
    write_csv(out, rows)
    resolved = dict(cfg.to_dict(), a_grid=a_grid, b_grid=b_grid, sweep_methods=list(methods))
    _atomic_write(out + ".config.json", json.dumps(resolved, indent=2, sort_keys=True) + "\n")
    write_manifest(
        out + ".manifest.json", "sweep", resolved, {"master_seed": cfg.master_seed}, [out], t0
    )
    if args.json:
        print(json.dumps({"csv": out, "cells": len(cells), "rows": len(rows)}, indent=2))
    else:
        print(f"sweep: {len(cells)} cells x {len(methods)} methods -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="confbayes",
        description="Bayesian conformal prediction intervals and coverage studies",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    pi = sub.add_parser("interval", help="prediction set for supplied data")
    pi.add_argument("--model", choices=["binomial", "normal"], required=True)
    pi.add_argument("--m", type=int, help="trial count (binomial)")
    pi.add_argument("--prior-a", type=float, default=0.5)
    pi.add_argument("--prior-b", type=float, default=0.5)
    pi.add_argument("--prior-mu", type=float, default=0.0, help="prior mean (normal)")
    pi.add_argument("--prior-tau2", type=float, default=1.0, help="prior mean scale (normal)")
    pi.add_argument("--alpha", type=float)
    pi.add_argument(
        "--method", choices=["full", "split", "analytic", "hppd"], default="analytic"
    )
    pi.add_argument("--score", choices=["ppd", "bres", "qbres", "dbres"], default="bres")
    pi.add_argument("--data", help="CSV file, one outcome per line (header optional)")
    pi.add_argument("--y", help="inline outcomes: 'v1,v2,...'")
    pi.add_argument("--train-frac", type=float, default=0.5)
    pi.add_argument("--seed", type=int)
    pi.add_argument("--grid-lo", type=float)
    pi.add_argument("--grid-hi", type=float)
    pi.add_argument("--grid-points", type=int, default=2001)
    pi.add_argument("--config", help="JSON config file (flags win)")
    pi.add_argument("--out", help="write the JSON result here as well")
    pi.add_argument("--json", action="store_true", help="machine-readable stdout")
    pi.set_defaults(func=cmd_interval)

    for name, fn in (("simulate", cmd_simulate), ("sweep", cmd_sweep)):
        ps = sub.add_parser(name, help=f"{name} study")
        ps.add_argument("--n", type=int)
        ps.add_argument("--m", type=int)
        ps.add_argument("--theta", type=float)
        ps.add_argument("--prior-a", type=float)
        ps.add_argument("--prior-b", type=float)
        ps.add_argument("--alpha", type=float)
        ps.add_argument("--reps", type=int)
        ps.add_argument("--methods", help="comma list, e.g. full:ppd,analytic,hppd")
        ps.add_argument("--seed", type=int)
        ps.add_argument("--workers", type=int, default=0)
        ps.add_argument("--timings", action="store_true", help="write wall-clock runtime_ms")
        ps.add_argument("--config", help="JSON config file (flags win)")
        ps.add_argument("--out")
        ps.add_argument("--json", action="store_true")
        if name == "sweep":
            ps.add_argument("--a-grid", help="comma list of prior a values")
            ps.add_argument("--b-grid", help="comma list of prior b values")
            ps.add_argument(
                "--sweep-methods", help="methods per cell (default hppd,analytic)"
            )
        ps.set_defaults(func=fn)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
