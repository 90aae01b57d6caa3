"""Command-line driver.

Exit codes: 0 success, 1 a diagnostic ran and failed, 2 bad parameters or
usage, 3 domain failure (e.g. zero-measure cylinder), 4 capacity guard
(a partial report is still written).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import dist
from .errors import CapacityError, ParameterError, ReturnStatError
from .experiments import (
    ExperimentReport,
    convergence_experiment,
    oscillation_report,
    poisson_limit_report,
    tightness_diagnostic,
    write_report,
)
from .models import model_from_config
from .returns import cluster_stats, default_workers
from .symbolic import ReturnSetup, format_word, parse_word, period

SEED_ENV = "RETURNSTAT_SEED"
RESIDUE_POINTS = (0.1, 0.7, 1.3, 2.9)


# ---------------------------------------------------------------------------
# helpers


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ParameterError(f"expected comma-separated integers, got {text!r}") from None


def _load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}") from None


def _model_spec(args, config) -> dict[str, Any]:
    spec = config.get("model")
    if getattr(args, "model", None):
        text = args.model.strip()
        if text.startswith("{"):
            try:
                spec = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParameterError(f"--model is not valid JSON: {exc}") from None
        else:
            spec = {"model": text}
    if spec is None:
        raise ParameterError("no model given (use --model or a config with a 'model' entry)")
    if isinstance(spec, str):
        spec = {"model": spec}
    return spec


def _pick(args, config, name, default=None, key=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return config.get(key or name, default)


def _resolve_seed(args, config) -> int:
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ParameterError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return int(config.get("seed", 0))


def _setup(args, config) -> ReturnSetup:
    t = _pick(args, config, "t", 1.0)
    d = args.d if getattr(args, "d", None) is not None else config.get("d", [1])
    if isinstance(d, str):
        d = _ints(d)
    return ReturnSetup(float(t), tuple(d))


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


# ---------------------------------------------------------------------------
# dist


def _family_dist(args):
    fam = args.family
    if fam in ("pois", "pa"):
        p = 0.0 if fam == "pois" else args.p
        d = dist.polya_aeppli(args.t, p)
        nu_char = lambda x: dist.geometric_characteristic(p, x)  # noqa: E731
        return d, lambda x: np.exp(args.t * (nu_char(x) - 1.0))
    if fam == "geo":
        d = dist.geometric(args.p)
        return d, lambda x: dist.geometric_characteristic(args.p, x)
    nu_masses = _floats(args.nu)
    nu = dist.DistributionOnN(np.array(nu_masses), max(0.0, 1.0 - math.fsum(nu_masses)), "generic", {})
    kmax = max(args.kmax, 60)
    d = dist.compound_poisson(args.t, nu, kmax)
    return d, lambda x: np.exp(args.t * (dist.characteristic_function(nu, x) - 1.0))


def cmd_dist(args) -> int:
    if args.kmax < 0:
        raise ParameterError("kmax must be >= 0")
    d, closed = _family_dist(args)
    x = np.array(RESIDUE_POINTS)
    residual = float(np.max(np.abs(dist.characteristic_function(d, x) - closed(x))))
    masses = d.padded(args.kmax)
    if args.format == "json":
        print(json.dumps({"pmf": masses.tolist(), "char_residual": residual, "tail_mass": d.tail_mass}))
        return 0
    print(f"{'k':>4}  pmf")
    for k, m in enumerate(masses):
        print(f"{k:>4}  {m:.15e}")
    print(f"characteristic identity residual: {residual:.3e}")
    return 0


# ---------------------------------------------------------------------------
# cluster


def cmd_cluster(args) -> int:
    config = _load_config(args.config)
    model = model_from_config(_model_spec(args, config))
    setup = _setup(args, config)
    if args.word is not None:
        w = parse_word(args.word)
        block, n = w[: period(w)], len(w)
    else:
        block_text = args.block if args.block is not None else config.get("block")
        if block_text is None:
            raise ParameterError("give --word, or --block with --n")
        block = parse_word(block_text) if isinstance(block_text, str) else tuple(block_text)
        n = _pick(args, config, "n")
        if n is None:
            raise ParameterError("--block needs --n")
    stats = cluster_stats(model, block, int(n), setup)
    out = stats.to_dict()
    if args.format == "json":
        print(json.dumps(out, sort_keys=True))
        return 0
    rows = [
        ("word", format_word(stats.word)),
        ("n", stats.n),
        ("P[w]", stats.prob),
        ("period", stats.period_r),
        ("kappa", stats.kappa),
        ("a", str(stats.exponent_a)),
        ("beta", stats.beta),
        ("rho_A", stats.rho),
        ("N", stats.trials_N),
        ("rho_pred", stats.predicted_rho),
        ("PA params", None if stats.predicted_pa is None else f"({stats.predicted_pa[0]:.10g}, {stats.predicted_pa[1]:.10g})"),
    ]
    for name, value in rows:
        print(f"{name:>10}  {_fmt(value)}")
    return 0


# ---------------------------------------------------------------------------
# experiments


def _formats(fmt: str) -> tuple[str, ...]:
    return ("json", "csv") if fmt == "both" else (fmt,)


def _print_report(report: ExperimentReport) -> None:
    header, rows = report.csv_rows()
    print("  ".join(f"{h:>12}" for h in header))
    for row in rows:
        print("  ".join(f"{_fmt(v):>12}" for v in row))
    for rec in report.records:
        if rec.error:
            print(f"n={rec.n}: {rec.error}", file=sys.stderr)


def _run_converge(args, config):
    block = _pick(args, config, "block")
    if block is None:
        raise ParameterError("converge needs a block (--block or config 'block')")
    if isinstance(block, str):
        block = parse_word(block)
    n_list = _pick(args, config, "n_list")
    if n_list is None:
        raise ParameterError("converge needs n_list")
    if isinstance(n_list, str):
        n_list = _ints(n_list)
    M = int(_pick(args, config, "M", 10_000))
    rho = config.get("rho")
    return convergence_experiment(
        model_from_config(_model_spec(args, config)),
        block,
        _setup(args, config),
        n_list,
        M,
        _resolve_seed(args, config),
        rho_override=rho,
        workers=args.workers,
    )


def cmd_experiment(args) -> int:
    config = _load_config(args.config)
    kind = args.kind
    if kind == "converge":
        report = _run_converge(args, config)
    elif kind == "oscillate":
        n_list = _pick(args, config, "n_list", [])
        if isinstance(n_list, str):
            n_list = _ints(n_list)
        report = oscillation_report(
            _model_spec(args, config),
            int(_pick(args, config, "n_max", 30)),
            strict=bool(config.get("strict", False)),
            n_list=n_list,
            t=float(_pick(args, config, "t", 1.0)),
            M=int(_pick(args, config, "M", 0)),
            seed=_resolve_seed(args, config),
            workers=args.workers,
        )
    elif kind == "poisson-limit":
        n_list = _pick(args, config, "n_list", [2, 3, 4])
        if isinstance(n_list, str):
            n_list = _ints(n_list)
        report = poisson_limit_report(
            _model_spec(args, config),
            n_list,
            float(_pick(args, config, "t", 1.0)),
            int(_pick(args, config, "M", 20_000)),
            _resolve_seed(args, config),
            beta_n_max=int(config.get("beta_n_max", 20)),
            workers=args.workers,
        )
    else:  # tightness
        if args.report:
            try:
                report = ExperimentReport.from_json(Path(args.report).read_text())
            except OSError as exc:
                raise ParameterError(f"cannot read report {args.report}: {exc.strerror}") from None
        else:
            report = _run_converge(args, config)
        result = tightness_diagnostic(report)
        report.extras["tightness"] = result.to_dict()
        paths = write_report(report, args.out, _formats(args.format))
        for c in result.mean_checks:
            print(f"mean  n={c['n']:<4} {c['mean']:.4f} <= {c['envelope']:.4f} (+5se)  {'ok' if c['ok'] else 'FAIL'}")
        for c in result.tail_checks:
            print(f"tail  n={c['n']:<4} P(S>={result.tail_b}) = {c['tail']:.4f} <= {c['limit']:.4f}  {'ok' if c['ok'] else 'FAIL'}")
        for note in result.notes:
            print(f"note: {note}")
        print("tightness: " + ("pass" if result.passed else "FAIL"))
        for p in paths:
            print(f"wrote {p}")
        if report.failed:
            return CapacityError.exit_code
        return 0 if result.passed else 1

    paths = write_report(report, args.out, _formats(args.format))
    _print_report(report)
    for p in paths:
        print(f"wrote {p}")
    return CapacityError.exit_code if report.failed else 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="returnstat", description="Return-time statistics of periodic cylinders.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_dist = sub.add_parser("dist", help="tabulate a distribution on the naturals")
    p_dist.add_argument("family", choices=["pois", "geo", "pa", "cp"])
    p_dist.add_argument("--t", type=float, default=1.0, help="Poisson rate")
    p_dist.add_argument("--p", type=float, default=0.0, help="geometric parameter in [0,1)")
    p_dist.add_argument("--nu", default="0,1", help="compounding masses for cp, comma-separated from k=0")
    p_dist.add_argument("--kmax", type=int, default=10)
    p_dist.add_argument("--format", choices=["text", "json"], default="text")
    p_dist.set_defaults(func=cmd_dist)

    def add_model_args(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--model", help="model name or JSON spec, overrides the config")
        p.add_argument("--t", type=float)
        p.add_argument("--d", help="return times, comma-separated (default 1)")

    p_cl = sub.add_parser("cluster", help="cluster quantities of one cylinder")
    add_model_args(p_cl)
    p_cl.add_argument("--word", help="the cylinder word, e.g. 0,1,0 or abab")
    p_cl.add_argument("--block", help="primitive periodic block (with --n)")
    p_cl.add_argument("--n", type=int)
    p_cl.add_argument("--format", choices=["text", "json"], default="text")
    p_cl.set_defaults(func=cmd_cluster)

    p_ex = sub.add_parser("experiment", help="run a seeded experiment and write a report")
    p_ex.add_argument("kind", choices=["converge", "oscillate", "poisson-limit", "tightness"])
    add_model_args(p_ex)
    p_ex.add_argument("--block")
    p_ex.add_argument("--n-list", dest="n_list")
    p_ex.add_argument("--n-max", dest="n_max", type=int)
    p_ex.add_argument("--M", type=int)
    p_ex.add_argument("--seed", type=int, help=f"master seed (overrides ${SEED_ENV} and the config)")
    p_ex.add_argument("--workers", type=int, default=default_workers())
    p_ex.add_argument("--out", default="reports", help="output directory")
    p_ex.add_argument("--format", choices=["json", "csv", "both"], default="both")
    p_ex.add_argument("--report", help="tightness: existing JSON report to diagnose")
    p_ex.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ReturnStatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
