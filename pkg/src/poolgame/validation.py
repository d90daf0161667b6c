"""Self-check suite: closed forms against simulation, plus payout properties."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytic import Strategy, expected_reward, gamma_honest, gamma_swh_lb, r_bwh, r_faw, r_uba_lb
from .core import PowerProfile, ShareLedger, SystemParams, ValidationError
from .payouts import PayoutScheme, RoundContext, check_delay_gain, delayed_submission_payouts
from .simulator import SimConfig, estimate_payout, estimate_reward

MIN_ROUNDS = 10_000
MC_FLOOR = 1e-3
_PROFILE = PowerProfile(0.2, 0.24, 0.6)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    expected: float
    tolerance: float


def _close(name, value, expected, stderr) -> CheckResult:
    tol = max(3.0 * stderr, MC_FLOOR)
    return CheckResult(name, abs(value - expected) <= tol, value, expected, tol)


def random_ledger(gen: np.random.Generator, pool_size: int = 4, max_len: int = 20, scale: float = 0.005) -> ShareLedger:
    # short gaps keep d * age moderate, so score ratios stay representable
    n = int(gen.integers(0, max_len + 1))
    times = gen.exponential(scale, size=n).cumsum() if n else np.array([])
    miners = gen.integers(0, pool_size, size=n)
    return ShareLedger.from_pairs(pool_size, list(zip(miners.tolist(), times.tolist())))


def _reduction_check() -> CheckResult:
    worst = 0.0
    for a in np.linspace(0.01, 0.5, 5):
        for b in np.linspace(0.05, 0.45, 4):
            for t in np.linspace(0.0, 1.0, 5):
                p = PowerProfile(float(a), float(b), float(t))
                worst = max(worst, abs(r_faw(p, 0.0) - r_bwh(p)), abs(r_uba_lb(p, 0.0) - r_bwh(p)))
                p0 = p.with_tau(0.0)
                for s in Strategy:
                    worst = max(worst, abs(expected_reward(s, p0, SystemParams()) - p0.alpha))
    return CheckResult("analytic-reductions", worst <= 1e-12, worst, 0.0, 1e-12)


def _property_checks(seed: int, n_ledgers: int = 300) -> list[CheckResult]:
    gen = np.random.default_rng(seed)
    fixed = (PayoutScheme.pps(), PayoutScheme.proportional(), PayoutScheme.pplns(5))
    decay = PayoutScheme.score_decay(32.0)
    worst_fixed, worst_decay, at_block_fail = 0.0, math.inf, 0
    for _ in range(n_ledgers):
        ledger = random_ledger(gen)
        miner = int(gen.integers(0, ledger.pool_size))
        t = ledger.last_time + float(gen.exponential(0.005))
        span = float(gen.exponential(0.02)) + 1e-6
        t_b = t + span  # so that a delay of exactly `span` lands on t_b
        delta = float(gen.uniform(0.0, span))
        ctx = RoundContext(t_b)
        for s in fixed:
            worst_fixed = max(worst_fixed, abs(check_delay_gain(s, ledger, miner, t, delta, ctx)))
        if any(ev.miner != miner for ev in ledger.events):
            worst_decay = min(worst_decay, check_delay_gain(decay, ledger, miner, t, max(delta, 1e-3 * span), ctx))
        if check_delay_gain(decay, ledger, miner, t, span, ctx) < check_delay_gain(decay, ledger, miner, t, delta, ctx):
            at_block_fail += 1

    # delaying under a fixed scheme risks staleness and never pays more on average
    ledger = random_ledger(gen, max_len=10)
    prompt, delayed = delayed_submission_payouts(PayoutScheme.proportional(), ledger, 0, ledger.last_time, 0.3, 20_000, seed)
    se = float(delayed.std(ddof=1) / math.sqrt(delayed.size))
    return [
        CheckResult("fixed-zero-delay-gain", worst_fixed == 0.0, worst_fixed, 0.0, 0.0),
        CheckResult("decaying-positive-delay-gain", worst_decay > 0.0, worst_decay, 0.0, 0.0),
        CheckResult("submit-at-block-dominates", at_block_fail == 0, float(at_block_fail), 0.0, 0.0),
        CheckResult("prompt-submission-dominates", float(delayed.mean()) <= prompt + 3 * se, float(delayed.mean()), prompt, 3 * se),
    ]


def run_validation(n_rounds: int = 100_000, seed: int = 0, workers: int = 1) -> list[CheckResult]:
    if n_rounds < MIN_ROUNDS:
        raise ValidationError("rounds", f"validate needs at least {MIN_ROUNDS} rounds")
    results = [_reduction_check()]
    sys = SystemParams(c=0.5)
    score = PayoutScheme.score_decay(sys.d)
    for strategy, profile in (
        (Strategy.HONEST, _PROFILE),
        (Strategy.BWH, _PROFILE),
        (Strategy.BWH, PowerProfile(0.2, 0.24, 1.0)),
        (Strategy.FAW, _PROFILE),
    ):
        est = estimate_reward(SimConfig(profile, sys, strategy, score, n_rounds, seed), workers)
        name = f"mc-reward:{strategy.value}:tau={profile.tau:g}"
        results.append(_close(name, est.mean, expected_reward(strategy, profile, sys), est.stderr))

    est = estimate_reward(SimConfig(_PROFILE, sys, Strategy.BWH, score, n_rounds, seed), workers)
    live = 1.0 - _PROFILE.alpha_prime
    for event, prob in (
        ("A", (1 - _PROFILE.tau) * _PROFILE.alpha / live),
        ("B", _PROFILE.beta / live),
        ("C", _PROFILE.others / live),
    ):
        freq = est.extra["events"][event] / n_rounds
        se = math.sqrt(prob * (1 - prob) / n_rounds)
        results.append(CheckResult(f"event-frequency:{event}", abs(freq - prob) <= 3 * se, freq, prob, 3 * se))

    victim = PowerProfile(0.1, 0.24, 1.0)
    for d in (1.0, 32.0, 256.0):
        cfg = SimConfig(victim, sys.replace(d=d), Strategy.HONEST, PayoutScheme.score_decay(d), n_rounds, seed)
        est = estimate_payout(cfg, workers)
        results.append(_close(f"honest-payout:d={d:g}", est.mean, gamma_honest(0.1, 0.24), est.stderr))

    est = estimate_payout(SimConfig(victim, SystemParams(), Strategy.SWH_FAW, score, n_rounds, seed), workers)
    lb = gamma_swh_lb(0.1, 0.24, 32.0, 32.0)
    results.append(CheckResult("swh-payout-above-bound", est.mean >= lb - 3 * est.stderr, est.mean, lb, 3 * est.stderr))

    results += _property_checks(seed)

    cfg = SimConfig(_PROFILE, sys, Strategy.SWH_UBA, score, min(n_rounds, 70_000), seed)
    a, b = estimate_reward(cfg, 1), estimate_reward(cfg, max(2, workers))
    results.append(CheckResult("cross-worker-determinism", a == b, b.mean, a.mean, 0.0))
    return results
