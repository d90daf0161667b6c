"""Parameter sweeps and the canned figure jobs behind the CLI.

Every job reduces to a list of independent row blocks (one per swept value),
evaluated in order, optionally across processes.  All rows share one
column layout::

    swept_var, strategy, tau_star, reward_analytic, reward_mc, stderr, n_rounds

Payout sweeps put the payout fraction in ``reward_analytic``.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analytic import Strategy, expected_reward, gamma_honest, gamma_swh_approx, gamma_swh_lb
from .core import InsufficientSampleError, PowerProfile, SystemParams, ValidationError
from .lab import CrossoverCase, crossover_cprime, optimal_tau
from .payouts import PayoutScheme
from .simulator import SimConfig, estimate_payout, estimate_reward

COLUMNS = ("swept_var", "strategy", "tau_star", "reward_analytic", "reward_mc", "stderr", "n_rounds")
SWEEP_VARIABLES = ("alpha", "beta", "tau", "c", "c_prime", "gamma", "d", "kappa")


@dataclass(frozen=True)
class Params:
    """Every tunable of a run; ``tau=None`` means optimize it per strategy."""

    alpha: float = 0.1
    beta: float = 0.24
    tau: float | None = None
    c: float = 0.0
    c_prime: float = 1.0
    gamma: float = 32.0
    d: float = 32.0
    kappa: float = 7 / 8
    scheme: str = "score"
    rounds: int | None = None
    seed: int = 0

    def __post_init__(self):
        self.system()
        PowerProfile(self.alpha, self.beta, 0.0 if self.tau is None else self.tau)
        if self.rounds is not None and self.rounds < 1:
            raise ValidationError("rounds", f"{self.rounds} < 1")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed", "must be a 64-bit unsigned integer")
        self.payout_scheme()

    def system(self) -> SystemParams:
        return SystemParams(gamma=self.gamma, d=self.d, kappa=self.kappa, c=self.c, c_prime=self.c_prime)

    def profile(self, tau: float | None = None) -> PowerProfile:
        t = self.tau if tau is None else tau
        return PowerProfile(self.alpha, self.beta, 0.0 if t is None else t)

    def payout_scheme(self) -> PayoutScheme:
        return PayoutScheme.parse(self.scheme, default_d=self.d)

    def with_value(self, variable: str, value: float) -> "Params":
        return dataclasses.replace(self, **{variable: float(value)})


@dataclass(frozen=True)
class Row:
    swept_var: float
    strategy: str
    tau_star: float
    reward_analytic: float
    reward_mc: float | None = None
    stderr: float | None = None
    n_rounds: int | None = None
    flagged: bool = field(default=False, compare=False)

    def values(self) -> tuple:
        return tuple(getattr(self, c) for c in COLUMNS)


def parse_range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError("range", f"expected START:STOP:STEP, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValidationError("range", f"non-numeric range {text!r}") from None
    return start, stop, step


def expand_range(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid; values are rounded so 0.1 + 0.2 prints as 0.3."""
    if not step > 0:
        raise ValidationError("range", f"step {step} must be positive")
    if start > stop:
        raise ValidationError("range", f"start {start} > stop {stop}")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(n + 1)]


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple[float, ...]
    fixed: Params = Params()
    strategies: tuple[Strategy, ...] = tuple(Strategy)
    kind: str = "reward"  # or "payout"

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValidationError("sweep", f"unknown sweep variable {self.variable!r}")
        if self.kind not in ("reward", "payout"):
            raise ValidationError("kind", self.kind)
        # every point must be a valid configuration before any work starts
        for v in self.values:
            self.fixed.with_value(self.variable, v)

    @classmethod
    def from_range(cls, variable: str, rng: tuple[float, float, float], **kw) -> "SweepSpec":
        return cls(variable, tuple(expand_range(*rng)), **kw)


def _mc_reward(q: Params, strategy: Strategy, tau: float):
    cfg = SimConfig(q.profile(tau), q.system(), strategy, q.payout_scheme(), q.rounds, q.seed)
    return estimate_reward(cfg)


def reward_rows(q: Params, x: float, strategies: Sequence[Strategy], label: str = "") -> list[Row]:
    rows = []
    sys = q.system()
    for s in strategies:
        if q.tau is None:
            opt = optimal_tau(s, q.profile(0.0), sys)
            tau, value = opt.tau_star, opt.reward_star
        else:
            tau, value = q.tau, expected_reward(s, q.profile(), sys)
        row = Row(x, s.value + label, tau, value)
        if q.rounds:
            est = _mc_reward(q, s, tau)
            row = dataclasses.replace(row, reward_mc=est.mean, stderr=est.stderr, n_rounds=est.n_rounds)
        rows.append(row)
    return rows


def payout_rows(q: Params, x: float, label: str = "") -> list[Row]:
    """Honest and share-withholding payout fractions inside the victim pool."""
    tau = 1.0 if q.tau is None else q.tau
    ap = q.alpha * tau
    rows = [
        Row(x, "Honest" + label, tau, gamma_honest(ap, q.beta)),
        Row(x, "SWH-lb" + label, tau, gamma_swh_lb(ap, q.beta, q.gamma, q.d)),
        Row(x, "SWH-approx" + label, tau, gamma_swh_approx(ap, q.beta, q.d)),
    ]
    if q.rounds:
        for i, strategy in ((0, Strategy.HONEST), (1, Strategy.SWH_FAW)):
            cfg = SimConfig(q.profile(tau), q.system(), strategy, q.payout_scheme(), q.rounds, q.seed)
            try:
                est = estimate_payout(cfg)
                rows[i] = dataclasses.replace(rows[i], reward_mc=est.mean, stderr=est.stderr, n_rounds=est.n_rounds)
            except InsufficientSampleError:
                rows[i] = dataclasses.replace(rows[i], n_rounds=0, flagged=True)
    return rows


def _sweep_block(args) -> list[Row]:
    spec, value = args
    q = spec.fixed.with_value(spec.variable, value)
    if spec.kind == "payout":
        return payout_rows(q, value)
    return reward_rows(q, value, spec.strategies)


def ordered_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """``map`` that keeps input order whatever the worker count."""
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[Row]:
    blocks = ordered_map(_sweep_block, [(spec, v) for v in spec.values], workers)
    return [row for block in blocks for row in block]


# --- figure jobs ----------------------------------------------------------------

SETUP_DEFAULTS = Params(beta=0.24, gamma=32.0, d=32.0)
REWARD_CPRIMES = (0.0, 1 / 3, 1.0)
PAYOUT_POWERS = tuple(float(2**k) for k in range(11))
CROSSOVER_CASES = (
    CrossoverCase(Strategy.HONEST, 0.1, 0.153),
    CrossoverCase(Strategy.UBA, 0.1, 0.201),
    CrossoverCase(Strategy.UBA, 0.24, 0.304),
)
FIGURE_ALIASES = {"payout-gap": "payout-vs-alpha", "approximation-gap": "payout-vs-alpha"}
FIGURES = ("reward-vs-alpha", "payout-vs-alpha", "payout-vs-gamma", "payout-vs-d", "gain-vs-cprime")


@dataclass(frozen=True)
class FigureJob:
    figure_id: str
    params: Params = SETUP_DEFAULTS
    values: tuple[float, ...] | None = None  # overrides the figure's default grid

    def __post_init__(self):
        fid = FIGURE_ALIASES.get(self.figure_id, self.figure_id)
        if fid not in FIGURES:
            raise ValidationError("figure", f"unknown figure {self.figure_id!r}; choose from {', '.join(FIGURES)}")
        object.__setattr__(self, "figure_id", fid)

    def grid(self) -> tuple[float, ...]:
        if self.values is not None:
            return tuple(self.values)
        return {
            "reward-vs-alpha": tuple(expand_range(0.0, 0.5, 0.01)),
            "payout-vs-alpha": tuple(expand_range(0.001, 0.5, 0.001)),
            "payout-vs-gamma": PAYOUT_POWERS,
            "payout-vs-d": PAYOUT_POWERS,
            "gain-vs-cprime": tuple(expand_range(0.0, 1.0, 0.02)),
        }[self.figure_id]


def _cp_label(cp: float) -> str:
    return f"|cprime={cp:.4g}"


def _reward_vs_alpha_block(args) -> list[Row]:
    q, alpha = args
    rows = []
    for cp in REWARD_CPRIMES:
        base = dataclasses.replace(q, alpha=alpha, c_prime=cp, tau=None)
        rows += reward_rows(base, alpha, (Strategy.HONEST, Strategy.UBA), _cp_label(cp))
        for c in (0.0, 1.0):
            rows += reward_rows(
                dataclasses.replace(base, c=c), alpha, (Strategy.SWH_FAW, Strategy.SWH_UBA), _cp_label(cp) + f"|c={c:g}"
            )
    return rows


def _gain_block(args) -> list[Row]:
    q, cp = args
    rows = []
    for alpha in sorted({case.alpha for case in CROSSOVER_CASES}):
        base = dataclasses.replace(q, alpha=alpha, c_prime=cp, tau=None, c=0.0)
        rows += reward_rows(base, cp, (Strategy.HONEST, Strategy.UBA, Strategy.SWH_UBA), f"|alpha={alpha:g}")
    return rows


def _payout_block(args) -> list[Row]:
    q, variable, value = args
    return payout_rows(q.with_value(variable, value), value)


def _series(rows: Sequence[Row], name: str) -> tuple[np.ndarray, np.ndarray]:
    sel = [r for r in rows if r.strategy == name]
    return np.array([r.swept_var for r in sel]), np.array([r.reward_analytic for r in sel])


def _argmax_summary(x: np.ndarray, y: np.ndarray, prefix: str) -> dict:
    i = int(np.argmax(y))
    return {f"{prefix}_max": float(y[i]), f"{prefix}_argmax": float(x[i])}


def run_figure(job: FigureJob, workers: int = 1) -> tuple[list[Row], dict]:
    q, grid, fid = job.params, job.grid(), job.figure_id
    summary: dict = {"figure": fid}

    if fid == "reward-vs-alpha":
        rows = [r for b in ordered_map(_reward_vs_alpha_block, [(q, a) for a in grid], workers) for r in b]
        for cp in REWARD_CPRIMES:
            lab = _cp_label(cp)
            _, honest = _series(rows, "Honest" + lab)
            _, uba = _series(rows, "UBA" + lab)
            _, swh_uba = _series(rows, "SWH-UBA" + lab + "|c=0")
            _, swh_faw = _series(rows, "SWH-FAW" + lab + "|c=0")
            fallback = np.maximum(honest, uba)
            key = f"cprime={cp:.4g}"
            summary[f"{key}:max_swh_minus_fallback"] = float(np.max(np.maximum(swh_uba, swh_faw) - fallback))
            summary[f"{key}:min_swh_uba_minus_uba"] = float(np.min(swh_uba - uba))
        return rows, summary

    if fid == "gain-vs-cprime":
        rows = [r for b in ordered_map(_gain_block, [(q, cp) for cp in grid], workers) for r in b]
        summary["kappa"] = q.kappa
        summary["c"] = 0.0
        for case in CROSSOVER_CASES:
            res = crossover_cprime(
                Strategy.SWH_UBA, case.rival, PowerProfile(case.alpha, q.beta), q.system().replace(c=0.0)
            )
            summary[f"crossover:SWH-UBA/{case.rival.value}|alpha={case.alpha:g}"] = res.c_prime_star
        return rows, summary

    variable = {"payout-vs-alpha": "alpha", "payout-vs-gamma": "gamma", "payout-vs-d": "d"}[fid]
    rows = [r for b in ordered_map(_payout_block, [(q, variable, v) for v in grid], workers) for r in b]
    x, honest = _series(rows, "Honest")
    _, lb = _series(rows, "SWH-lb")
    _, approx = _series(rows, "SWH-approx")
    if fid == "payout-vs-alpha":
        summary.update(_argmax_summary(x, lb - honest, "swh_gap"))
        summary["swh_gap_at_last"] = float(lb[-1] - honest[-1])
        summary.update(_argmax_summary(x, approx - lb, "approx_gap"))
        summary["approx_gap_at_first"] = float(approx[0] - lb[0])
        summary.update(_argmax_summary(x, (approx - lb) / lb, "approx_rel_gap"))
    else:
        summary["swh_lb_nondecreasing"] = bool(np.all(np.diff(lb) >= -1e-12))
        summary["swh_lb_first"], summary["swh_lb_last"] = float(lb[0]), float(lb[-1])
    return rows, summary


def crossover_rows(q: Params, alphas: Sequence[float], rivals: Sequence[Strategy], tol: float = 1e-4) -> list[Row]:
    """``reward_analytic`` holds the crossover ``c'`` (empty when none exists)."""
    rows = []
    for alpha in alphas:
        for rival in rivals:
            res = crossover_cprime(Strategy.SWH_UBA, rival, PowerProfile(alpha, q.beta), q.system(), tol)
            value = res.c_prime_star if res.found else math.nan
            rows.append(Row(alpha, f"crossover:SWH-UBA/{rival.value}", math.nan, value))
    return rows
