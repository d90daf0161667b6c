import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from poolgame.analytic import Strategy, expected_reward
from poolgame.core import PowerProfile, SystemParams, ValidationError
from poolgame.lab import (
    TIE_EPS,
    CrossoverCase,
    _golden_max,
    _local_maxima,
    best_strategy,
    crossover_cprime,
    kappa_disclosure_sweep,
    optimal_tau,
)

SETUP = SystemParams()


def test_honest_is_reported_at_zero_infiltration():
    r = optimal_tau(Strategy.HONEST, PowerProfile(0.3, 0.24), SETUP)
    assert r.tau_star == 0.0 and r.reward_star == 0.3 and r.method == "fixed"


def test_bwh_optimum_interior_and_accurate():
    p = PowerProfile(0.2, 0.24)
    r = optimal_tau(Strategy.BWH, p, SETUP, tol=1e-6)
    assert 0 < r.tau_star < 1
    dense = max(expected_reward(Strategy.BWH, p.with_tau(t), SETUP) for t in np.linspace(0, 1, 20001))
    assert r.reward_star >= dense - 1e-9


def test_tolerance_domain():
    with pytest.raises(ValidationError):
        optimal_tau(Strategy.BWH, PowerProfile(0.2, 0.24), SETUP, tol=0.5)


@given(
    st.sampled_from([s for s in Strategy if not s.uses_swh]),
    st.floats(0.01, 0.5),
    st.floats(0.05, 0.49),
    st.floats(0.0, 1.0),
    st.floats(0.0, 0.99),
)
def test_optimum_beats_reference_points(strategy, alpha, beta, c, kappa):
    sys = SystemParams(c=c, kappa=kappa)
    p = PowerProfile(alpha, beta)
    r = optimal_tau(strategy, p, sys)
    assert 0.0 <= r.tau_star <= 1.0
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        assert r.reward_star >= expected_reward(strategy, p.with_tau(t), sys) - 1e-12


@given(st.floats(0.01, 0.5), st.floats(0.0, 1.0))
@settings(max_examples=8)
def test_swh_optimum_beats_reference_points(alpha, cp):
    sys = SystemParams(c_prime=cp)
    p = PowerProfile(alpha, 0.24)
    for strategy in (Strategy.SWH_FAW, Strategy.SWH_UBA):
        r = optimal_tau(strategy, p, sys)
        for t in (0.0, 0.25, 0.5, 0.75, 1.0):
            assert r.reward_star >= expected_reward(strategy, p.with_tau(t), sys) - 1e-12


def test_golden_section_on_parabola():
    x, fx, n = _golden_max(lambda t: -(t - 0.3) ** 2, 0.0, 1.0, 1e-8)
    assert x == pytest.approx(0.3, abs=1e-8) and n > 10


def test_local_maxima_count():
    assert _local_maxima(np.array([0.0, 1.0, 0.0, 2.0, 1.0])) == 2
    assert _local_maxima(np.array([0.0, 1.0, 2.0])) == 1
    assert _local_maxima(np.array([1.0, 1.0, 1.0])) == 1


def test_mc_recheck_attached():
    r = optimal_tau(Strategy.BWH, PowerProfile(0.2, 0.24), SETUP, mc_rounds=200_000, seed=3)
    assert r.mc is not None
    assert abs(r.mc.mean - r.reward_star) <= max(3 * r.mc.stderr, 1e-3)


@given(st.floats(0.0, 0.5))
@example(1e-6)
@settings(max_examples=10)
def test_table_never_below_honest(alpha):
    table = best_strategy(PowerProfile(alpha, 0.24), SETUP.replace(c_prime=0.5))
    assert table[0].reward_star >= alpha - 1e-12
    rewards = np.array([r.reward_star for r in table])
    # sorted up to the tie bucket, inside which the simpler strategy leads
    assert np.all(np.diff(rewards) <= 2 * TIE_EPS)


def test_ties_go_to_simpler_strategy():
    table = best_strategy(PowerProfile(0.1, 0.24), SystemParams(c=0.0, c_prime=0.0, kappa=0.0))
    # BWH, FAW and UBA coincide at c = kappa = 0
    order = [r.strategy for r in table]
    assert order.index(Strategy.BWH) < order.index(Strategy.FAW) < order.index(Strategy.UBA)
    top = table[0]
    assert top.strategy in (Strategy.HONEST, Strategy.BWH)
    for base, swh in ((Strategy.FAW, Strategy.SWH_FAW), (Strategy.UBA, Strategy.SWH_UBA)):
        assert order.index(swh) > order.index(base)


def test_full_salvage_prefers_swh_uba():
    for alpha in (0.05, 0.2, 0.45):
        table = best_strategy(PowerProfile(alpha, 0.24), SETUP)
        order = [r.strategy for r in table]
        assert order.index(Strategy.SWH_UBA) < order.index(Strategy.UBA)


def test_intermediate_salvage_flips_with_power():
    sys = SETUP.replace(c_prime=1 / 3)
    low = best_strategy(PowerProfile(0.05, 0.24), sys)[0].strategy
    high = best_strategy(PowerProfile(0.45, 0.24), sys)[0].strategy
    assert low is Strategy.SWH_UBA and high is Strategy.UBA


def test_crossover_bracket_and_sign_change():
    r = crossover_cprime(Strategy.SWH_UBA, Strategy.UBA, PowerProfile(0.1, 0.24), SETUP, tol=1e-3)
    assert r.found and 0 <= r.c_prime_star <= 1
    assert r.bracket <= 1e-3
    assert r.g_low <= 1e-12 < r.g_high


def test_no_crossover_reported():
    # honest mining never overtakes itself
    r = crossover_cprime(Strategy.HONEST, Strategy.UBA, PowerProfile(0.1, 0.24), SETUP)
    assert not r.found and r.c_prime_star is None


@given(st.floats(0.02, 0.5))
@settings(max_examples=5)
def test_swh_uba_nondecreasing_in_salvage(alpha):
    p = PowerProfile(alpha, 0.24)
    vals = [optimal_tau(Strategy.SWH_UBA, p, SETUP.replace(c_prime=cp)).reward_star for cp in np.linspace(0, 1, 6)]
    assert np.all(np.diff(vals) >= -1e-12)


def test_kappa_sweep_rows():
    rows = kappa_disclosure_sweep([CrossoverCase(Strategy.UBA, 0.1, 0.2)], [0.0, 0.5], tol=1e-2)
    assert [r["kappa"] for r in rows] == [0.0, 0.5]
    assert all(math.isfinite(r["max_abs_error"]) or r["crossovers"][0] is None for r in rows)
