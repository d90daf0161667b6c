"""Closed-form expected rewards (fractions of one block reward per round).

Every reward function takes a ``PowerProfile``; infiltration ``tau`` and the
derived in-pool power ``alpha' = tau * alpha`` come from it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .core import PowerProfile, SystemParams, UndefinedPoolError, ValidationError


class Strategy(enum.Enum):
    # declaration order is the infrastructure order used to break ties
    HONEST = "Honest"
    BWH = "BWH"
    FAW = "FAW"
    UBA = "UBA"
    SWH_FAW = "SWH-FAW"
    SWH_UBA = "SWH-UBA"

    @property
    def uses_swh(self) -> bool:
        return self in (Strategy.SWH_FAW, Strategy.SWH_UBA)

    @property
    def withholds_blocks(self) -> bool:
        return self is not Strategy.HONEST

    @property
    def rank(self) -> int:
        return list(Strategy).index(self)

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        key = text.strip().upper().replace("_", "-")
        for s in cls:
            if s.value.upper() == key:
                return s
        raise ValidationError("strategy", f"unknown strategy {text!r}")


@dataclass(frozen=True)
class TruncationPolicy:
    """Probability mass of the share-count tail dropped from the outer sum."""

    tail_epsilon: float = 1e-12

    def __post_init__(self):
        if not 0 < self.tail_epsilon < 1:
            raise ValidationError("tail_epsilon", f"{self.tail_epsilon} not in (0, 1)")

    def y_max(self, gamma: float) -> int:
        if gamma <= 1.0:
            return 1
        return int(math.floor(math.log(self.tail_epsilon) / math.log1p(-1.0 / gamma))) + 1


DEFAULT_TRUNCATION = TruncationPolicy()
_ROW_BLOCK = 256


def _split(p: PowerProfile) -> tuple[float, float, float, float]:
    """(main-pool term, P(B), third-party factor, alpha')."""
    ta = p.alpha_prime
    live = 1.0 - ta
    main = (1.0 - p.tau) * p.alpha / live
    return main, p.beta / live, p.others / live, ta


def _pool_fraction(ta: float, beta: float) -> float:
    return ta / (beta + ta) if ta > 0 else 0.0


def r_honest(p: PowerProfile) -> float:
    return p.alpha


def r_bwh(p: PowerProfile) -> float:
    main, pb, _, ta = _split(p)
    return main + _pool_fraction(ta, p.beta) * pb


def r_faw(p: PowerProfile, c: float) -> float:
    main, pb, third, ta = _split(p)
    return main + _pool_fraction(ta, p.beta) * (pb + c * ta * third)


def _uba_bracket(p: PowerProfile, kappa: float, b_weight: float, c_weight: float) -> float:
    main, pb, third, ta = _split(p)
    uncle_a = kappa * ta * ta / (p.beta + ta) * main if ta > 0 else 0.0
    return uncle_a + b_weight * (1.0 + kappa * ta) * pb + c_weight * ta * third


def r_uba_lb(p: PowerProfile, kappa: float) -> float:
    """Single-uncle lower bound on the UBA reward."""
    main, _, _, ta = _split(p)
    return main + _pool_fraction(ta, p.beta) * _uba_bracket(p, kappa, 1.0, kappa)


def gamma_honest(alpha_prime: float, beta: float) -> float:
    if alpha_prime + beta <= 0:
        raise UndefinedPoolError("victim pool has no power")
    return alpha_prime / (alpha_prime + beta)


def gamma_swh_approx(alpha_prime: float, beta: float, d: float) -> float:
    if alpha_prime * d + beta <= 0:
        raise UndefinedPoolError("victim pool has no power")
    return alpha_prime * d / (alpha_prime * d + beta)


def gamma_swh_lb(
    alpha_prime: float,
    beta: float,
    gamma: float,
    d: float,
    trunc: TruncationPolicy = DEFAULT_TRUNCATION,
) -> float:
    """Lower bound on the share-withholder's expected payout fraction.

    Share count per won round is geometric with mean ``gamma``; each share is
    the attacker's with probability ``alpha' / (alpha' + beta)``; withheld
    shares score 1, the others ``1/d`` on average.  The outer sum stops once
    the remaining geometric tail is below ``trunc.tail_epsilon``.
    """
    if alpha_prime <= 0:
        return 0.0
    if gamma < 1 or d <= 0:
        raise ValidationError("gamma" if gamma < 1 else "d", "out of domain")
    return _gamma_swh_lb(float(alpha_prime), float(beta), float(gamma), float(d), trunc.y_max(gamma))


@lru_cache(maxsize=65536)
def _gamma_swh_lb(ap: float, beta: float, gamma: float, d: float, y_max: int) -> float:
    p = ap / (ap + beta)
    y = np.arange(1, y_max + 1, dtype=float)
    log_py = -math.log(gamma) + (y - 1) * (math.log1p(-1.0 / gamma) if gamma > 1 else 0.0)
    if gamma == 1:
        log_py[1:] = -np.inf

    # binomial mass beyond ~10 sd of the mean is below 1e-22 and is skipped
    half = np.ceil(10.0 * np.sqrt(y * p * (1 - p)) + 10.0)
    lo = np.maximum(1.0, np.floor(y * p - half))
    hi = np.minimum(y, np.ceil(y * p + half))
    row_totals = []
    for start in range(0, y_max, _ROW_BLOCK):
        sl = slice(start, start + _ROW_BLOCK)
        yy, lo_b, hi_b = y[sl, None], lo[sl], hi[sl]
        x = lo_b[:, None] + np.arange(int((hi_b - lo_b).max()) + 1)[None, :]
        valid = x <= hi_b[:, None]
        x = np.where(valid, x, 1.0)
        log_pmf = (
            gammaln(yy + 1) - gammaln(x + 1) - gammaln(yy - x + 1)
            + xlogy(x, p) + xlog1py(yy - x, -p)
        )
        ratio = x / (x + (yy - x) / d)
        terms = np.where(valid, np.exp(log_pmf + log_py[sl, None]) * ratio, 0.0)
        row_totals.extend(terms.sum(axis=1).tolist())
    return math.fsum(row_totals)


def approximation_gap(alpha_prime: float, beta: float, gamma: float, d: float) -> float:
    """How far the mean-ratio approximation sits above the lower bound."""
    return gamma_swh_approx(alpha_prime, beta, d) - gamma_swh_lb(alpha_prime, beta, gamma, d)


def r_swh_faw(p: PowerProfile, sys: SystemParams) -> float:
    main, pb, third, ta = _split(p)
    g = gamma_swh_lb(ta, p.beta, sys.gamma, sys.d)
    return main + g * (sys.c_prime * pb + sys.c * ta * third)


def r_swh_uba(p: PowerProfile, sys: SystemParams) -> float:
    """UBA bracket with the pool fraction replaced by the SWH payout.

    Event-B payout is scaled by the salvage fraction ``c'``; the third-party
    event pays through whichever of fork win and uncle is larger.
    """
    main, _, _, ta = _split(p)
    g = gamma_swh_lb(ta, p.beta, sys.gamma, sys.d)
    return main + g * _uba_bracket(p, sys.kappa, sys.c_prime, max(sys.c, sys.kappa))


def expected_reward(strategy: Strategy, p: PowerProfile, sys: SystemParams) -> float:
    if strategy is Strategy.HONEST:
        return r_honest(p)
    if strategy is Strategy.BWH:
        return r_bwh(p)
    if strategy is Strategy.FAW:
        return r_faw(p, sys.c)
    if strategy is Strategy.UBA:
        return r_uba_lb(p, sys.kappa)
    if strategy is Strategy.SWH_FAW:
        return r_swh_faw(p, sys)
    return r_swh_uba(p, sys)
