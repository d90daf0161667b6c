"""Attacker-side optimization on top of the closed forms.

The reward of every strategy is maximized over the infiltration fraction
``tau``; strategies are ranked by their optimized rewards, and the salvage
fraction ``c'`` at which one strategy overtakes another is located by
bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .analytic import Strategy, expected_reward
from .core import PowerProfile, RewardEstimate, SystemParams, ValidationError
from .payouts import PayoutScheme

GRID_POINTS = 33
DENSE_POINTS = 129
TIE_EPS = 1e-12
# g(c') must beat this margin to count as "a strictly better than b"; absorbs
# rounding where the SWH variant collapses onto its fallback at tiny c'
CROSSOVER_MARGIN = 1e-12
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizationResult:
    strategy: Strategy
    tau_star: float
    reward_star: float
    method: str  # "fixed", "grid", "golden", "dense-grid"
    evaluations: int
    mc: RewardEstimate | None = field(default=None, compare=False)


@dataclass(frozen=True)
class CrossoverResult:
    pair: tuple[Strategy, Strategy]
    found: bool
    c_prime_star: float | None
    bracket: float
    g_low: float  # g at the lower end of the final bracket
    g_high: float
    evaluations: int


def _golden_max(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float, int]:
    x1, x2 = b - _INV_PHI * (b - a), a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    n = 2
    while b - a > tol:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        n += 1
    return (x1, f1, n) if f1 >= f2 else (x2, f2, n)


def _local_maxima(values: np.ndarray) -> int:
    padded = np.concatenate(([-np.inf], values, [-np.inf]))
    mid = padded[1:-1]
    rising = mid > padded[:-2] + TIE_EPS
    not_falling = mid >= padded[2:] - TIE_EPS
    return int(np.count_nonzero(rising & not_falling))


def optimal_tau(
    strategy: Strategy,
    profile: PowerProfile,
    sys: SystemParams,
    tol: float = 1e-4,
    mc_rounds: int | None = None,
    seed: int = 0,
) -> OptimizationResult:
    """Best infiltration fraction; ``profile.tau`` is ignored.

    With ``mc_rounds`` the returned ``tau_star`` is re-checked by simulation
    and the estimate is attached as ``mc``.
    """
    if not 0 < tol <= 0.1:
        raise ValidationError("tol", f"{tol} not in (0, 0.1]")
    if strategy is Strategy.HONEST:
        res = OptimizationResult(strategy, 0.0, profile.alpha, "fixed", 1)
        return _attach_mc(res, profile, sys, mc_rounds, seed)

    def f(tau: float) -> float:
        return expected_reward(strategy, profile.with_tau(min(1.0, max(0.0, tau))), sys)

    taus = np.linspace(0.0, 1.0, GRID_POINTS)
    values = np.array([f(t) for t in taus])
    evals = GRID_POINTS
    method = "golden"
    if _local_maxima(values) > 1:
        taus = np.linspace(0.0, 1.0, DENSE_POINTS)
        values = np.array([f(t) for t in taus])
        evals += DENSE_POINTS
        method = "dense-grid"
    i = int(np.argmax(values))
    best_tau, best = float(taus[i]), float(values[i])
    lo, hi = float(taus[max(i - 1, 0)]), float(taus[min(i + 1, taus.size - 1)])
    if method == "golden" and hi > lo:
        t, v, n = _golden_max(f, lo, hi, tol)
        evals += n
        if v > best:
            best_tau, best = t, v
        else:
            method = "grid"
    res = OptimizationResult(strategy, best_tau, best, method, evals)
    return _attach_mc(res, profile, sys, mc_rounds, seed)


def _attach_mc(res, profile, sys, mc_rounds, seed) -> OptimizationResult:
    if mc_rounds is None:
        return res
    from .simulator import SimConfig, estimate_reward

    cfg = SimConfig(
        profile.with_tau(res.tau_star), sys, res.strategy, PayoutScheme.score_decay(sys.d), mc_rounds, seed
    )
    return OptimizationResult(res.strategy, res.tau_star, res.reward_star, res.method, res.evaluations, estimate_reward(cfg))


def best_strategy(
    profile: PowerProfile,
    sys: SystemParams,
    strategies: Sequence[Strategy] = tuple(Strategy),
    tol: float = 1e-4,
) -> list[OptimizationResult]:
    """Optimized strategies, best first; near-ties go to the simpler attack."""
    results = [optimal_tau(s, profile, sys, tol) for s in strategies]
    top = max(r.reward_star for r in results)

    def key(r: OptimizationResult):
        # bucket by distance from the best so float noise cannot reorder ties
        return (round((top - r.reward_star) / TIE_EPS), r.strategy.rank)

    return sorted(results, key=key)


def crossover_cprime(
    strategy_a: Strategy,
    strategy_b: Strategy,
    profile: PowerProfile,
    sys: SystemParams,
    tol: float = 1e-4,
) -> CrossoverResult:
    """Smallest ``c'`` above which optimized ``a`` strictly beats optimized ``b``.

    ``g(c') = reward_a*(c') - reward_b*(c')``.  The crossing is searched only
    if ``g`` is not above the margin at ``c'=0`` and is above it at ``c'=1``.
    """
    evals = 0

    def g(cp: float) -> float:
        nonlocal evals
        evals += 1
        s = sys.replace(c_prime=cp)
        return optimal_tau(strategy_a, profile, s).reward_star - optimal_tau(strategy_b, profile, s).reward_star

    lo, hi = 0.0, 1.0
    g_lo, g_hi = g(lo), g(hi)
    pair = (strategy_a, strategy_b)
    if g_lo > CROSSOVER_MARGIN or g_hi <= CROSSOVER_MARGIN:
        return CrossoverResult(pair, False, None, hi - lo, g_lo, g_hi, evals)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm > CROSSOVER_MARGIN:
            hi, g_hi = mid, gm
        else:
            lo, g_lo = mid, gm
    return CrossoverResult(pair, True, 0.5 * (lo + hi), hi - lo, g_lo, g_hi, evals)


@dataclass(frozen=True)
class CrossoverCase:
    """One crossover to reproduce: ``SWH-UBA`` versus ``rival`` at ``alpha``."""

    rival: Strategy
    alpha: float
    target: float


def kappa_disclosure_sweep(
    cases: Sequence[CrossoverCase],
    kappas: Sequence[float],
    beta: float = 0.24,
    sys: SystemParams = SystemParams(),
    tol: float = 1e-4,
) -> list[dict]:
    """Crossover values for each uncle fraction, with the worst miss per row."""
    rows = []
    for kappa in kappas:
        s = sys.replace(kappa=float(kappa))
        row = {"kappa": float(kappa), "crossovers": [], "max_abs_error": 0.0}
        for case in cases:
            res = crossover_cprime(Strategy.SWH_UBA, case.rival, PowerProfile(case.alpha, beta), s, tol)
            err = abs(res.c_prime_star - case.target) if res.found else math.inf
            row["crossovers"].append(res.c_prime_star)
            row["max_abs_error"] = max(row["max_abs_error"], err)
        rows.append(row)
    return rows
