"""Mining-pool withholding games: payout schemes, closed-form rewards and a round simulator."""

__version__ = "0.1.0"

from .analytic import Strategy, expected_reward, gamma_honest, gamma_swh_approx, gamma_swh_lb
from .core import (
    InsufficientSampleError,
    PayoutVector,
    PowerProfile,
    RewardEstimate,
    ShareEvent,
    ShareLedger,
    SystemParams,
    ValidationError,
)
from .lab import best_strategy, crossover_cprime, optimal_tau
from .payouts import PayoutScheme, payout
from .simulator import SimConfig, estimate_payout, estimate_reward, simulate_round

__all__ = [
    "InsufficientSampleError",
    "PayoutScheme",
    "PayoutVector",
    "PowerProfile",
    "RewardEstimate",
    "ShareEvent",
    "ShareLedger",
    "SimConfig",
    "Strategy",
    "SystemParams",
    "ValidationError",
    "best_strategy",
    "crossover_cprime",
    "estimate_payout",
    "estimate_reward",
    "expected_reward",
    "gamma_honest",
    "gamma_swh_approx",
    "gamma_swh_lb",
    "optimal_tau",
    "payout",
    "simulate_round",
]
