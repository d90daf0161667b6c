"""Domain types shared by the payout, analytic, simulation and sweep layers.

Powers are fractions of the whole network's hash rate.  Time is measured in
expected network block intervals, so the round-ending process has rate 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

ALPHA_MAX = 0.5
_EPS = 1e-12


class ValidationError(ValueError):
    """A parameter is outside its domain.  ``field`` names the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class OrderingError(ValueError):
    pass


class MinerIndexError(IndexError):
    pass


class DegenerateRoundError(ValueError):
    """The pool won a round but no share exists to attribute the reward to."""


class StaleShareError(ValueError):
    """A share was delayed past the end of its round."""


class UndefinedPoolError(ZeroDivisionError):
    """The victim pool has no power at all, so a payout fraction is undefined."""


class InsufficientSampleError(RuntimeError):
    pass


def _check_range(name: str, value: float, lo: float, hi: float, *, hi_open: bool = False) -> float:
    value = float(value)
    if math.isnan(value):
        raise ValidationError(name, "is NaN")
    if value < lo - _EPS:
        raise ValidationError(name, f"{value} < {lo}")
    if hi_open and value >= hi:
        raise ValidationError(name, f"{value} >= {hi}")
    if not hi_open and value > hi + _EPS:
        raise ValidationError(name, f"{value} > {hi}")
    return value


@dataclass(frozen=True)
class PowerProfile:
    """Attacker power ``alpha``, victim pool power ``beta`` and infiltration ``tau``."""

    alpha: float
    beta: float
    tau: float = 0.0

    def __post_init__(self):
        _check_range("alpha", self.alpha, 0.0, ALPHA_MAX)
        _check_range("beta", self.beta, 0.0, 1.0)
        if self.alpha + self.beta > 1.0 + _EPS:
            raise ValidationError("beta", f"alpha + beta = {self.alpha + self.beta} > 1")
        _check_range("tau", self.tau, 0.0, 1.0)

    @property
    def alpha_prime(self) -> float:
        """Attacker power inside the victim pool."""
        return self.tau * self.alpha

    @property
    def victim_power(self) -> float:
        return self.alpha_prime + self.beta

    @property
    def others(self) -> float:
        """Power of third-party miners."""
        return max(0.0, 1.0 - self.alpha - self.beta)

    def with_tau(self, tau: float) -> "PowerProfile":
        return PowerProfile(self.alpha, self.beta, tau)


def new_power_profile(alpha: float, beta: float, tau: float) -> PowerProfile:
    return PowerProfile(alpha, beta, tau)


@dataclass(frozen=True)
class SystemParams:
    """Pool and environment knobs.

    gamma    expected shares per block (block/share difficulty ratio)
    d        decay constant of the share score, per unit time
    kappa    uncle reward fraction
    c        probability the attacker wins a fork race
    c_prime  fraction of withheld-share score salvaged when another victim
             miner ends the round
    """

    gamma: float = 32.0
    d: float = 32.0
    kappa: float = 7 / 8
    c: float = 0.0
    c_prime: float = 1.0

    def __post_init__(self):
        if not self.gamma >= 1.0:
            raise ValidationError("gamma", f"{self.gamma} < 1")
        if not self.d > 0.0:
            raise ValidationError("d", f"{self.d} must be positive")
        _check_range("kappa", self.kappa, 0.0, 1.0, hi_open=True)
        _check_range("c", self.c, 0.0, 1.0)
        _check_range("c_prime", self.c_prime, 0.0, 1.0)

    def replace(self, **changes) -> "SystemParams":
        values = {k: getattr(self, k) for k in ("gamma", "d", "kappa", "c", "c_prime")}
        values.update(changes)
        return SystemParams(**values)


@dataclass(frozen=True)
class ShareEvent:
    miner: int
    time: float

    def __post_init__(self):
        if self.miner < 0:
            raise MinerIndexError(f"negative miner index {self.miner}")
        if not self.time >= 0.0:
            raise ValidationError("time", f"{self.time} must be non-negative")


@dataclass(frozen=True)
class ShareLedger:
    """Time-ordered share list of one round.  Never mutated; see ``append_share``."""

    pool_size: int
    events: tuple[ShareEvent, ...] = ()

    def __post_init__(self):
        if self.pool_size < 1:
            raise ValidationError("pool_size", f"{self.pool_size} < 1")
        object.__setattr__(self, "events", tuple(self.events))
        last = 0.0
        for ev in self.events:
            if ev.miner >= self.pool_size:
                raise MinerIndexError(f"miner {ev.miner} >= pool size {self.pool_size}")
            if ev.time < last:
                raise OrderingError(f"share at {ev.time} precedes {last}")
            last = ev.time

    def __len__(self) -> int:
        return len(self.events)

    @property
    def last_time(self) -> float:
        return self.events[-1].time if self.events else 0.0

    @classmethod
    def from_pairs(cls, pool_size: int, pairs: Sequence[tuple[int, float]]) -> "ShareLedger":
        return cls(pool_size, tuple(ShareEvent(int(m), float(t)) for m, t in pairs))


def append_share(ledger: ShareLedger, event: ShareEvent) -> ShareLedger:
    if event.miner >= ledger.pool_size:
        raise MinerIndexError(f"miner {event.miner} >= pool size {ledger.pool_size}")
    if ledger.events and event.time < ledger.last_time:
        raise OrderingError(f"share at {event.time} precedes last share at {ledger.last_time}")
    return ShareLedger(ledger.pool_size, ledger.events + (event,))


@dataclass(frozen=True)
class PayoutVector:
    shares_of_reward: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "shares_of_reward", tuple(float(x) for x in self.shares_of_reward))
        if any(x < 0 for x in self.shares_of_reward):
            raise ValidationError("shares_of_reward", "negative entry")
        total = math.fsum(self.shares_of_reward)
        if total != 0.0 and abs(total - 1.0) > 1e-12:
            raise ValidationError("shares_of_reward", f"sums to {total!r}")

    def __getitem__(self, j: int) -> float:
        return self.shares_of_reward[j]

    def __len__(self) -> int:
        return len(self.shares_of_reward)

    @property
    def is_zero(self) -> bool:
        return not any(self.shares_of_reward)


@dataclass(frozen=True)
class RewardEstimate:
    mean: float
    stderr: float
    n_rounds: int
    seed: int
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.stderr < 0:
            raise ValidationError("stderr", "negative")
        if self.n_rounds < 1:
            raise ValidationError("n_rounds", f"{self.n_rounds} < 1")
