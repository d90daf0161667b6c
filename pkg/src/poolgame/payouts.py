"""Intra-pool payout functions and the share-timing properties they satisfy.

``payout`` maps one round's share ledger to a normalized reward split.  The
``check_*`` helpers turn the fixed/decaying classification into executable
predicates that the test suite drives with random ledgers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DegenerateRoundError,
    PayoutVector,
    ShareEvent,
    ShareLedger,
    StaleShareError,
    ValidationError,
    append_share,
)


class SchemeKind(enum.Enum):
    PPS = "pps"
    PROPORTIONAL = "proportional"
    PPLNS = "pplns"
    SCORE_DECAY = "score"


class PayoutClass(enum.Enum):
    FIXED = "fixed"
    DECAYING = "decaying"


@dataclass(frozen=True)
class PayoutScheme:
    kind: SchemeKind
    window: int | None = None
    d: float | None = None

    def __post_init__(self):
        if self.kind is SchemeKind.PPLNS and (self.window is None or self.window < 1):
            raise ValidationError("window", f"PPLNS window must be >= 1, got {self.window}")
        if self.kind is SchemeKind.SCORE_DECAY and not (self.d is not None and self.d > 0):
            raise ValidationError("d", f"score decay must be positive, got {self.d}")

    @classmethod
    def pps(cls) -> "PayoutScheme":
        return cls(SchemeKind.PPS)

    @classmethod
    def proportional(cls) -> "PayoutScheme":
        return cls(SchemeKind.PROPORTIONAL)

    @classmethod
    def pplns(cls, window: int) -> "PayoutScheme":
        return cls(SchemeKind.PPLNS, window=int(window))

    @classmethod
    def score_decay(cls, d: float) -> "PayoutScheme":
        return cls(SchemeKind.SCORE_DECAY, d=float(d))

    @classmethod
    def parse(cls, text: str, default_d: float = 32.0) -> "PayoutScheme":
        """Parse ``pps``, ``proportional``, ``pplns:N``, ``score`` or ``score:D``."""
        name, _, arg = text.strip().lower().partition(":")
        if name == "pps":
            return cls.pps()
        if name in ("prop", "proportional"):
            return cls.proportional()
        if name == "pplns":
            if not arg:
                raise ValidationError("scheme", "pplns needs a window, e.g. pplns:1000")
            return cls.pplns(int(arg))
        if name in ("score", "slush", "decay"):
            return cls.score_decay(float(arg) if arg else default_d)
        raise ValidationError("scheme", f"unknown payout scheme {text!r}")

    def __str__(self) -> str:
        if self.kind is SchemeKind.PPLNS:
            return f"pplns:{self.window}"
        if self.kind is SchemeKind.SCORE_DECAY:
            return f"score:{self.d:g}"
        return self.kind.value


@dataclass(frozen=True)
class RoundContext:
    block_time: float
    pool_won: bool = True


def classify(scheme: PayoutScheme) -> PayoutClass:
    if scheme.kind is SchemeKind.SCORE_DECAY:
        return PayoutClass.DECAYING
    return PayoutClass.FIXED


def _normalize(weights: list[float]) -> PayoutVector:
    total = math.fsum(weights)
    return PayoutVector(tuple(w / total for w in weights))


def payout(scheme: PayoutScheme, ledger: ShareLedger, ctx: RoundContext) -> PayoutVector:
    n = ledger.pool_size
    if not ctx.pool_won:
        return PayoutVector((0.0,) * n)
    if not ledger.events:
        raise DegenerateRoundError("pool won a round with an empty share ledger")
    if ctx.block_time < ledger.last_time:
        raise ValidationError("block_time", f"{ctx.block_time} precedes last share {ledger.last_time}")

    if scheme.kind is SchemeKind.SCORE_DECAY:
        # shift by the freshest share so exp() cannot underflow to an all-zero vector
        logs = [-scheme.d * (ctx.block_time - ev.time) for ev in ledger.events]
        top = max(logs)
        per_miner: list[list[float]] = [[] for _ in range(n)]
        for ev, lw in zip(ledger.events, logs):
            per_miner[ev.miner].append(math.exp(lw - top))
        return _normalize([math.fsum(ws) for ws in per_miner])

    events = ledger.events
    if scheme.kind is SchemeKind.PPLNS:
        events = events[-scheme.window:]
    counts = [0] * n
    for ev in events:
        counts[ev.miner] += 1
    return _normalize([float(c) for c in counts])


def _share_of(scheme: PayoutScheme, ledger: ShareLedger, miner: int, block_time: float) -> float:
    # f_j of an empty ledger is taken as 0: nothing to attribute
    if not ledger.events:
        return 0.0
    return payout(scheme, ledger, RoundContext(block_time, True))[miner]


def check_unilateral_increase(scheme: PayoutScheme, ledger: ShareLedger, miner: int, t: float) -> bool:
    """Does adding ``(miner, t)`` leave the miner's payout no smaller?"""
    block_time = max(t, ledger.last_time)
    before = _share_of(scheme, ledger, miner, block_time)
    after = _share_of(scheme, append_share(ledger, ShareEvent(miner, t)), miner, block_time)
    return after - before >= 0.0


def check_delay_gain(
    scheme: PayoutScheme,
    ledger: ShareLedger,
    miner: int,
    t: float,
    delta_t: float,
    ctx: RoundContext,
) -> float:
    """Payout change from submitting a share found at ``t`` at ``t + delta_t`` instead.

    Exactly 0 for fixed schemes; strictly positive for score decay whenever
    ``delta_t > 0`` and someone else holds score in the round.
    """
    if delta_t < 0:
        raise ValidationError("delta_t", f"{delta_t} < 0")
    if t + delta_t > ctx.block_time:
        raise StaleShareError(f"share delayed to {t + delta_t} after the block at {ctx.block_time}")
    if not ctx.pool_won:
        return 0.0
    late = payout(scheme, append_share(ledger, ShareEvent(miner, t + delta_t)), ctx)[miner]
    prompt = payout(scheme, append_share(ledger, ShareEvent(miner, t)), ctx)[miner]
    return late - prompt


def delayed_submission_payouts(
    scheme: PayoutScheme,
    ledger: ShareLedger,
    miner: int,
    t: float,
    delta_t: float,
    n_samples: int,
    seed: int,
) -> tuple[float, np.ndarray]:
    """Immediate payout and sampled delayed payouts over random round ends.

    The round ends ``Exp(1)`` after ``t``.  A share held past the round end is
    stale and the miner keeps only ``f(ledger)``.  Fixed-payout schemes only,
    since their payouts do not depend on the block time.
    """
    if classify(scheme) is not PayoutClass.FIXED:
        raise ValidationError("scheme", "delayed-submission sampling is defined for fixed-payout schemes")
    prompt = _share_of(scheme, append_share(ledger, ShareEvent(miner, t)), miner, t)
    late = _share_of(scheme, append_share(ledger, ShareEvent(miner, t + delta_t)), miner, t + delta_t)
    stale = _share_of(scheme, ledger, miner, max(t, ledger.last_time))
    rng = np.random.Generator(np.random.Philox(seed))
    remaining = rng.exponential(1.0, size=n_samples)
    return prompt, np.where(remaining < delta_t, stale, late)


# --- vectorized path used by the round simulator -----------------------------


def attacker_payout_fractions(
    scheme: PayoutScheme,
    starts: np.ndarray,
    is_attacker: np.ndarray,
    ages: np.ndarray | None,
    attacker_log_weight: np.ndarray | None = None,
) -> np.ndarray:
    """Attacker's payout fraction for many won rounds at once.

    Shares of round ``k`` occupy ``[starts[k], starts[k+1])`` of the flat
    arrays; every round has at least one share.  ``ages`` is the time from
    each share to the block.  ``attacker_log_weight`` (one per round)
    overrides the score of withheld attacker shares, e.g. ``0`` for shares
    submitted right before the block or ``log(c')`` for salvaged ones.
    Matches ``payout(...)[attacker]`` on the equivalent ledger.
    """
    starts = np.asarray(starts, dtype=np.int64)
    is_attacker = np.asarray(is_attacker, dtype=bool)
    n_shares = is_attacker.size
    counts = np.diff(np.append(starts, n_shares))
    seg = np.repeat(np.arange(starts.size), counts)

    if scheme.kind is SchemeKind.SCORE_DECAY:
        logw = -scheme.d * np.asarray(ages, dtype=float)
        if attacker_log_weight is not None:
            logw = np.where(is_attacker, np.asarray(attacker_log_weight, dtype=float)[seg], logw)
        top = np.maximum.reduceat(logw, starts)
        top = np.where(np.isfinite(top), top, 0.0)
        w = np.exp(logw - top[seg])
        total = np.add.reduceat(w, starts)
        mine = np.add.reduceat(np.where(is_attacker, w, 0.0), starts)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(total > 0, mine / np.where(total > 0, total, 1.0), 0.0)

    if attacker_log_weight is not None:
        raise ValidationError("scheme", "withheld-share scoring needs a decaying-payout scheme")
    if scheme.kind is SchemeKind.PPLNS:
        # keep the `window` freshest shares of each round
        order = np.lexsort((np.asarray(ages, dtype=float), seg))
        rank = np.arange(n_shares) - starts[seg]
        keep = np.zeros(n_shares, dtype=bool)
        keep[order[rank < scheme.window]] = True
        mine = np.add.reduceat((is_attacker & keep).astype(float), starts)
        return mine / np.minimum(counts, scheme.window)
    mine = np.add.reduceat(is_attacker.astype(float), starts)
    return mine / counts
