"""Monte Carlo mining rounds, independent of the closed forms.

One round:

1. The round-ending entity is drawn: attacker's main pool (event A), another
   victim-pool miner (B) or a third party (C).  Under block withholding the
   attacker's in-pool power finds no blocks that end the round, so the
   weights are ``(1-tau)alpha : beta : 1-alpha-beta``; honest mining adds
   ``tau*alpha`` to the victim side.
2. Independently, a withholding attacker holds a victim-pool block with
   probability ``tau*alpha`` (the chance its first in-pool discovery beats
   every other block).
3. If the victim pool is paid anything this round, its share list is drawn:
   a geometric count with mean ``gamma``, each share the attacker's with
   probability ``alpha'/(alpha'+beta)``, each aged ``Exp(1)`` at the block
   (round end is memoryless with rate 1).
4. Strategy logic decides what the pool receives and how the attacker's
   shares are scored; the split comes from ``payouts``.

Every draw is keyed by ``(seed, round_index, slot)``, so any subset of rounds
can be simulated anywhere and agrees bit for bit with a full run.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng
from .analytic import Strategy
from .core import (
    InsufficientSampleError,
    PowerProfile,
    RewardEstimate,
    ShareLedger,
    SystemParams,
    ValidationError,
)
from .payouts import PayoutClass, PayoutScheme, attacker_payout_fractions, classify

SLOT_END, SLOT_WITHHELD, SLOT_FORK, SLOT_COUNT, SLOT_SHARE0 = range(5)
CHUNK_ROUNDS = 1 << 15
ATTACKER, OTHERS = 0, 1


class EventClass(enum.IntEnum):
    NONE = 0
    A = 1
    B = 2
    C = 3


@dataclass(frozen=True)
class SimConfig:
    profile: PowerProfile
    sys: SystemParams
    strategy: Strategy
    scheme: PayoutScheme
    n_rounds: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.n_rounds < 1:
            raise ValidationError("n_rounds", f"{self.n_rounds} < 1")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed", "must be a 64-bit unsigned integer")
        if self.strategy.uses_swh and classify(self.scheme) is not PayoutClass.DECAYING:
            raise ValidationError("scheme", f"{self.strategy.value} needs a decaying-payout victim pool")


@dataclass(frozen=True)
class ShareStats:
    """Shares the victim pool saw in one round, in discovery order.

    Times run from the round's first share (time 0) to ``block_time``.
    """

    block_time: float
    miners: tuple[int, ...]
    found_times: tuple[float, ...]
    submit_times: tuple[float, ...]

    @property
    def counts(self) -> tuple[int, int]:
        att = sum(1 for m in self.miners if m == ATTACKER)
        return att, len(self.miners) - att


@dataclass(frozen=True)
class RoundOutcome:
    event_class: EventClass
    attacker_reward: float
    victim_pool_won: bool
    withheld_block: bool
    payout_fraction: float | None
    share_stats: ShareStats


@dataclass
class RoundBatch:
    """Per-round arrays for ``count`` consecutive rounds starting at ``first``."""

    first: int
    event: np.ndarray
    withheld: np.ndarray
    fork_won: np.ndarray
    pool_paid: np.ndarray
    pool_won: np.ndarray
    payout_fraction: np.ndarray  # NaN where the pool was paid nothing
    share_count: np.ndarray  # 0 where no share list was drawn
    attacker_shares: np.ndarray
    reward: np.ndarray


def _event_cutoffs(cfg: SimConfig) -> tuple[float, float]:
    p = cfg.profile
    if cfg.strategy is Strategy.HONEST:
        return (1 - p.tau) * p.alpha, (1 - p.tau) * p.alpha + p.victim_power
    live = 1.0 - p.alpha_prime
    a = (1 - p.tau) * p.alpha / live
    return a, a + p.beta / live


def _share_counts(u: np.ndarray, gamma: float) -> np.ndarray:
    if gamma <= 1.0:
        return np.ones(u.shape, dtype=np.int64)
    return 1 + np.floor(np.log(u) / math.log1p(-1.0 / gamma)).astype(np.int64)


def _draw_shares(cfg: SimConfig, keys: np.ndarray):
    """Flattened share lists for the rounds behind ``keys``."""
    y = _share_counts(rng.uniform(keys, SLOT_COUNT), cfg.sys.gamma)
    starts = np.concatenate(([0], np.cumsum(y)[:-1])).astype(np.int64)
    seg = np.repeat(np.arange(y.size), y)
    j = np.arange(seg.size) - starts[seg]
    u_label, u_age = rng.uniform_pair(keys[seg], SLOT_SHARE0 + j)
    vp = cfg.profile.victim_power
    p_att = cfg.profile.alpha_prime / vp if vp > 0 else 0.0
    return y, starts, u_label < p_att, -np.log(u_age)


def simulate_batch(cfg: SimConfig, first: int, count: int) -> RoundBatch:
    strat, sys, p = cfg.strategy, cfg.sys, cfg.profile
    keys = rng.round_keys(cfg.seed, np.arange(first, first + count, dtype=np.uint64))

    cut_a, cut_b = _event_cutoffs(cfg)
    u_end = rng.uniform(keys, SLOT_END)
    event = np.where(u_end < cut_a, EventClass.A, np.where(u_end < cut_b, EventClass.B, EventClass.C)).astype(np.int8)
    if strat.withholds_blocks:
        withheld = rng.uniform(keys, SLOT_WITHHELD) < p.alpha_prime
    else:
        withheld = np.zeros(count, dtype=bool)
    fork_won = rng.uniform(keys, SLOT_FORK) < sys.c

    is_a, is_b, is_c = event == EventClass.A, event == EventClass.B, event == EventClass.C
    uncles = strat in (Strategy.UBA, Strategy.SWH_UBA)
    forks = strat is not Strategy.HONEST and strat is not Strategy.BWH

    # amount of block reward the victim pool collects this round
    pool_take = np.where(is_b, 1.0, 0.0)
    pool_won = is_b.copy()
    if uncles:
        pool_take += np.where(is_b & withheld, sys.kappa, 0.0)
        pool_take += np.where(is_a & withheld, sys.kappa, 0.0)
    if forks:
        c_won = is_c & withheld & fork_won
        pool_won |= c_won
        pool_take += np.where(c_won, 1.0, 0.0)
        if uncles:
            pool_take += np.where(is_c & withheld & ~fork_won, sys.kappa, 0.0)
    paid = pool_take > 0

    fraction = np.full(count, np.nan)
    share_count = np.zeros(count, dtype=np.int64)
    attacker_shares = np.zeros(count, dtype=np.int64)
    idx = np.flatnonzero(paid)
    if idx.size:
        y, starts, is_att, ages = _draw_shares(cfg, keys[idx])
        logw = None
        if strat.uses_swh:
            # withheld shares go in right before a block the attacker releases;
            # when another victim miner ends the round only c' of their score survives
            salvage = math.log(sys.c_prime) if sys.c_prime > 0 else -np.inf
            logw = np.where(is_b[idx], salvage, 0.0)
        fraction[idx] = attacker_payout_fractions(cfg.scheme, starts, is_att, ages, logw)
        share_count[idx] = y
        attacker_shares[idx] = np.add.reduceat(is_att.astype(np.int64), starts)

    reward = np.where(is_a, 1.0, 0.0) + np.where(paid, pool_take * np.nan_to_num(fraction), 0.0)
    return RoundBatch(first, event, withheld, fork_won, paid, pool_won, fraction, share_count, attacker_shares, reward)


def simulate_round(cfg: SimConfig, round_index: int) -> RoundOutcome:
    b = simulate_batch(cfg, round_index, 1)
    keys = rng.round_keys(cfg.seed, np.array([round_index], dtype=np.uint64))
    _, _, is_att, ages = _draw_shares(cfg, keys)
    t_block = float(ages.max())
    order = np.argsort(-ages, kind="stable")
    found = tuple(float(t_block - ages[k]) for k in order)
    miners = tuple(ATTACKER if is_att[k] else OTHERS for k in order)
    if cfg.strategy.uses_swh:
        submit = tuple(t_block if m == ATTACKER else t for m, t in zip(miners, found))
    else:
        submit = found
    frac = float(b.payout_fraction[0])
    return RoundOutcome(
        event_class=EventClass(int(b.event[0])),
        attacker_reward=float(b.reward[0]),
        victim_pool_won=bool(b.pool_won[0]),
        withheld_block=bool(b.withheld[0]),
        payout_fraction=None if math.isnan(frac) else frac,
        share_stats=ShareStats(t_block, miners, found, submit),
    )


def round_ledger(stats: ShareStats) -> ShareLedger:
    """The ledger the pool manager records, ordered by submission time."""
    pairs = sorted(zip(stats.submit_times, stats.miners), key=lambda tm: tm[0])
    return ShareLedger.from_pairs(2, [(m, t) for t, m in pairs])


def _chunk_bounds(n_rounds: int) -> list[tuple[int, int]]:
    return [(s, min(CHUNK_ROUNDS, n_rounds - s)) for s in range(0, n_rounds, CHUNK_ROUNDS)]


def _run_chunk(args) -> RoundBatch:
    cfg, first, count = args
    return simulate_batch(cfg, first, count)


def _batches(cfg: SimConfig, workers: int):
    jobs = [(cfg, first, count) for first, count in _chunk_bounds(cfg.n_rounds)]
    if workers <= 1 or len(jobs) == 1:
        return [_run_chunk(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_chunk, jobs))


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    # exactly rounded sums: the result cannot depend on how rounds were partitioned
    n = values.size
    mean = math.fsum(values.tolist()) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum(((values - mean) ** 2).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)


def estimate_reward(cfg: SimConfig, workers: int = 1) -> RewardEstimate:
    batches = _batches(cfg, workers)
    rewards = np.concatenate([b.reward for b in batches])
    events = np.concatenate([b.event for b in batches])
    mean, se = _mean_stderr(rewards)
    extra = {
        "events": {e.name: int(np.count_nonzero(events == e)) for e in (EventClass.A, EventClass.B, EventClass.C)},
        "withheld": int(sum(int(b.withheld.sum()) for b in batches)),
    }
    return RewardEstimate(mean, se, cfg.n_rounds, cfg.seed, extra)


def estimate_payout(cfg: SimConfig, workers: int = 1) -> RewardEstimate:
    """Attacker's mean payout fraction over the rounds the victim pool won."""
    batches = _batches(cfg, workers)
    won = np.concatenate([b.pool_won for b in batches])
    fractions = np.concatenate([b.payout_fraction for b in batches])[won]
    if fractions.size == 0:
        raise InsufficientSampleError(f"no victim-won rounds in {cfg.n_rounds} rounds")
    mean, se = _mean_stderr(fractions)
    return RewardEstimate(mean, se, int(fractions.size), cfg.seed, {"total_rounds": cfg.n_rounds})
