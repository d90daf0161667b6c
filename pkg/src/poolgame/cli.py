"""``poolgame`` command line: sweeps, figure data, simulation and self-checks.

Exit codes: 0 success, 2 usage or configuration error, 3 too few samples for
a Monte Carlo statistic, 4 a validation check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

from . import __version__
from .analytic import Strategy
from .core import InsufficientSampleError, UndefinedPoolError, ValidationError
from .sweeps import (
    COLUMNS,
    FIGURE_ALIASES,
    FIGURES,
    FigureJob,
    Params,
    SweepSpec,
    crossover_rows,
    expand_range,
    parse_range,
    reward_rows,
    run_figure,
    run_sweep,
)
from .validation import run_validation

EXIT_OK, EXIT_USAGE, EXIT_SAMPLES, EXIT_FAILED = 0, 2, 3, 4

# config-file keys are the long flag names; value is the Params field (if any)
PARAM_FLAGS = {
    "alpha": "alpha",
    "beta": "beta",
    "tau": "tau",
    "c": "c",
    "cprime": "c_prime",
    "gamma": "gamma",
    "d": "d",
    "kappa": "kappa",
    "scheme": "scheme",
    "rounds": "rounds",
    "seed": "seed",
}
OTHER_FLAGS = ("alpha-range", "optimize-tau", "strategy", "format", "out", "workers", "sweep", "range")
# non-parameter options that still shape the data, echoed in the header
ECHOED = ("alpha-range", "strategy", "sweep", "range")


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("parameters")
    g.add_argument("--alpha", type=float, help="attacker power")
    g.add_argument("--alpha-range", metavar="S:E:STEP", help="sweep alpha over an inclusive grid")
    g.add_argument("--beta", type=float, help="victim pool power (default 0.24)")
    g.add_argument("--tau", type=float, help="fixed infiltration fraction")
    g.add_argument("--optimize-tau", action="store_const", const=True, help="maximize the reward over tau (default)")
    g.add_argument("--c", type=float, help="fork-race win probability")
    g.add_argument("--cprime", type=float, help="salvaged fraction of withheld-share score")
    g.add_argument("--gamma", type=float, help="expected shares per block")
    g.add_argument("--d", type=float, help="score decay constant")
    g.add_argument("--kappa", type=float, help="uncle reward fraction (default 7/8)")
    g.add_argument("--strategy", help="comma-separated strategies, or 'all'")
    g.add_argument("--scheme", help="pps | proportional | pplns:N | score[:D]")
    g.add_argument("--rounds", type=int, help="Monte Carlo rounds (omit for analytic only)")
    g.add_argument("--seed", type=int, help="64-bit seed")
    g.add_argument("--sweep", help="swept variable: alpha, beta, tau, c, cprime, gamma, d, kappa")
    g.add_argument("--range", metavar="S:E:STEP", help="grid for --sweep (or a figure's x axis)")
    o = common.add_argument_group("output")
    o.add_argument("--config", metavar="PATH", help="JSON file whose keys are flag names")
    o.add_argument("--format", choices=("csv", "json"))
    o.add_argument("--out", metavar="PATH")
    o.add_argument("--workers", type=int, help="processes; never changes the output")

    p = argparse.ArgumentParser(prog="poolgame", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"poolgame {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("reward-curve", parents=[common], help="optimized rewards along a sweep")
    sub.add_parser("payout-curve", parents=[common], help="in-pool payout fractions along a sweep")
    sub.add_parser("crossover", parents=[common], help="c' at which SWH-UBA overtakes a rival")
    fig = sub.add_parser("figure", parents=[common], help="data and summary of a canned figure")
    fig.add_argument("figure_id", help=", ".join(FIGURES + tuple(FIGURE_ALIASES)))
    sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate at one point")
    sub.add_parser("validate", parents=[common], help="analytic vs simulation and property checks")
    return p


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    out = {}
    for key, value in raw.items():
        norm = key.replace("_", "-")
        if norm == "c-prime":
            norm = "cprime"
        if norm not in PARAM_FLAGS and norm not in OTHER_FLAGS:
            raise UsageError(f"unknown config key {key!r}")
        out[norm] = value
    return out


def effective_options(args: argparse.Namespace) -> dict:
    """Config file first, then every flag given on the command line on top."""
    opts = _load_config(args.config) if args.config else {}
    for key in tuple(PARAM_FLAGS) + OTHER_FLAGS:
        value = getattr(args, key.replace("-", "_"), None)
        if value is not None:
            opts[key] = value
    if opts.get("tau") is not None and opts.get("optimize-tau"):
        raise UsageError("--tau and --optimize-tau are mutually exclusive")
    return opts


def make_params(opts: dict, **defaults) -> Params:
    kw = dict(defaults)
    for flag, name in PARAM_FLAGS.items():
        if opts.get(flag) is not None:
            kw[name] = opts[flag]
    if opts.get("optimize-tau"):
        kw["tau"] = None
    for name in ("alpha", "beta", "tau", "c", "c_prime", "gamma", "d", "kappa"):
        if kw.get(name) is not None:
            kw[name] = float(kw[name])
    return Params(**kw)


def _strategies(opts: dict, default: Sequence[Strategy]) -> tuple[Strategy, ...]:
    text = opts.get("strategy")
    if not text or text == "all":
        return tuple(default)
    return tuple(Strategy.parse(s) for s in str(text).split(","))


def _sweep_axis(opts: dict, default_range: tuple[float, float, float]) -> tuple[str, tuple[float, ...]]:
    if opts.get("sweep"):
        var = {"cprime": "c_prime", "c-prime": "c_prime"}.get(opts["sweep"], opts["sweep"])
        if not opts.get("range"):
            raise UsageError("--sweep needs --range S:E:STEP")
        return var, tuple(expand_range(*parse_range(opts["range"])))
    if opts.get("alpha-range"):
        return "alpha", tuple(expand_range(*parse_range(opts["alpha-range"])))
    if opts.get("alpha") is not None:
        return "alpha", (float(opts["alpha"]),)
    return "alpha", tuple(expand_range(*default_range))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    return v


def header_params(params: Params, opts: dict) -> dict:
    """Effective configuration (worker count and output options excluded)."""
    out = {flag: getattr(params, name) for flag, name in PARAM_FLAGS.items() if flag != "seed"}
    if out["tau"] is None:
        out["tau"] = "optimize"
    out.update({k: opts[k] for k in ECHOED if opts.get(k) is not None})
    return out


def render(command: str, params: dict, seed: int, columns: Sequence[str], rows: list[tuple], summary: dict, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "version": __version__,
            "command": command,
            "params": params,
            "seed": seed,
            "summary": {k: _jsonable(v) for k, v in summary.items()},
            "rows": [{c: _jsonable(v) for c, v in zip(columns, r)} for r in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# poolgame {__version__}\n# command: {command}\n")
    for k in sorted(params):
        buf.write(f"# {k}: {_fmt(params[k])}\n")
    buf.write(f"# seed: {seed}\n")
    for k, v in summary.items():
        buf.write(f"# summary.{k}: {_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _emit(text: str, opts: dict) -> None:
    if opts.get("out"):
        with open(opts["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args: argparse.Namespace) -> int:
    opts = effective_options(args)
    fmt = opts.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise UsageError(f"unknown format {fmt!r}")
    workers = int(opts.get("workers") or 1)
    cmd = args.command
    summary: dict = {}
    status = EXIT_OK

    if cmd == "validate":
        params = make_params(opts, rounds=100_000)
        results = run_validation(params.rounds, params.seed, workers)
        rows = [(r.name, r.passed, r.value, r.expected, r.tolerance) for r in results]
        summary = {"passed": sum(r.passed for r in results), "failed": sum(not r.passed for r in results)}
        _emit(render(cmd, header_params(params, opts), params.seed, ("check", "passed", "value", "expected", "tolerance"), rows, summary, fmt), opts)
        return EXIT_OK if summary["failed"] == 0 else EXIT_FAILED

    if cmd == "reward-curve":
        params = make_params(opts)
        var, values = _sweep_axis(opts, (0.0, 0.5, 0.01))
        spec = SweepSpec(var, values, params, _strategies(opts, tuple(Strategy)))
        out = run_sweep(spec, workers)
    elif cmd == "payout-curve":
        params = make_params(opts, tau=1.0)
        var, values = _sweep_axis(opts, (0.01, 0.5, 0.01))
        out = run_sweep(SweepSpec(var, values, params, kind="payout"), workers)
    elif cmd == "crossover":
        params = make_params(opts, c=0.0)
        _, alphas = _sweep_axis(opts, (0.1, 0.24, 0.14))
        out = crossover_rows(params, alphas, _strategies(opts, (Strategy.HONEST, Strategy.UBA)))
        summary = {"kappa": params.kappa, "c": params.c}
    elif cmd == "figure":
        params = make_params(opts)
        grid = tuple(expand_range(*parse_range(opts["range"]))) if opts.get("range") else None
        out, summary = run_figure(FigureJob(args.figure_id, params, grid), workers)
    else:  # simulate
        params = make_params(opts, rounds=100_000)
        out = reward_rows(params, params.alpha, _strategies(opts, tuple(Strategy)))

    if any(r.flagged for r in out):
        status = EXIT_SAMPLES
    _emit(render(cmd, header_params(params, opts), params.seed, COLUMNS, [r.values() for r in out], summary, fmt), opts)
    return status


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except (UsageError, ValidationError, UndefinedPoolError) as exc:
        print(f"poolgame: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InsufficientSampleError as exc:
        print(f"poolgame: insufficient samples: {exc}", file=sys.stderr)
        return EXIT_SAMPLES


if __name__ == "__main__":
    sys.exit(main())
