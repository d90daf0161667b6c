import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import payout_naive
from poolgame.core import DegenerateRoundError, ShareLedger, StaleShareError, ValidationError
from poolgame.payouts import (
    PayoutClass,
    PayoutScheme,
    RoundContext,
    SchemeKind,
    attacker_payout_fractions,
    check_delay_gain,
    check_unilateral_increase,
    classify,
    delayed_submission_payouts,
    payout,
)

FIXED = [PayoutScheme.pps(), PayoutScheme.proportional(), PayoutScheme.pplns(3), PayoutScheme.pplns(50)]
ALL = FIXED + [PayoutScheme.score_decay(0.5), PayoutScheme.score_decay(32.0)]


@st.composite
def ledgers(draw, min_len=0, max_len=25, pool_size=None):
    n = pool_size or draw(st.integers(1, 5))
    k = draw(st.integers(min_len, max_len))
    miners = draw(st.lists(st.integers(0, n - 1), min_size=k, max_size=k))
    gaps = draw(st.lists(st.floats(0.0, 0.05, allow_nan=False), min_size=k, max_size=k))
    return ShareLedger.from_pairs(n, list(zip(miners, np.cumsum(gaps).tolist())))


schemes = st.sampled_from(ALL)


def test_parse_and_str_round_trip():
    for text in ("pps", "proportional", "pplns:100", "score:32"):
        assert str(PayoutScheme.parse(text)) == text
    assert PayoutScheme.parse("score", default_d=8).d == 8
    with pytest.raises(ValidationError):
        PayoutScheme.parse("pplns")
    with pytest.raises(ValidationError):
        PayoutScheme.parse("bogus")
    with pytest.raises(ValidationError):
        PayoutScheme.pplns(0)
    with pytest.raises(ValidationError):
        PayoutScheme.score_decay(-1)


def test_classification():
    assert [classify(s) for s in FIXED] == [PayoutClass.FIXED] * 4
    assert classify(PayoutScheme.score_decay(1)) is PayoutClass.DECAYING


def test_proportional_example():
    led = ShareLedger.from_pairs(3, [(0, 0.1), (1, 0.2), (0, 0.3), (2, 0.4)])
    assert payout(PayoutScheme.proportional(), led, RoundContext(1.0)).shares_of_reward == (0.5, 0.25, 0.25)


def test_pplns_counts_only_last_window():
    led = ShareLedger.from_pairs(2, [(0, 0.1), (0, 0.2), (1, 0.3), (1, 0.4)])
    assert payout(PayoutScheme.pplns(2), led, RoundContext(1.0))[1] == 1.0
    assert payout(PayoutScheme.pplns(3), led, RoundContext(1.0))[0] == pytest.approx(1 / 3)


def test_score_decay_weights():
    led = ShareLedger.from_pairs(2, [(0, 0.0), (1, 1.0)])
    f = payout(PayoutScheme.score_decay(2.0), led, RoundContext(1.0))
    assert f[0] == pytest.approx(math.exp(-2) / (1 + math.exp(-2)))


def test_score_decay_survives_extreme_ages():
    # unshifted weights would all underflow to zero here
    led = ShareLedger.from_pairs(2, [(0, 0.0), (1, 0.5)])
    f = payout(PayoutScheme.score_decay(5000.0), led, RoundContext(1000.0))
    assert f[1] == 1.0 and f[0] == 0.0


def test_lost_round_and_degenerate_round():
    led = ShareLedger.from_pairs(2, [(0, 0.1)])
    assert payout(PayoutScheme.pps(), led, RoundContext(1.0, pool_won=False)).is_zero
    with pytest.raises(DegenerateRoundError):
        payout(PayoutScheme.pps(), ShareLedger(2), RoundContext(1.0))
    with pytest.raises(ValidationError):
        payout(PayoutScheme.pps(), led, RoundContext(0.05))


@given(schemes, ledgers(min_len=1))
def test_payout_matches_definition(scheme, led):
    t_b = led.last_time + 0.01
    f = payout(scheme, led, RoundContext(t_b))
    pairs = [(e.miner, e.time) for e in led.events]
    ref = payout_naive(scheme.kind.value, pairs, led.pool_size, t_b, scheme.window, scheme.d)
    assert f.shares_of_reward == pytest.approx(ref, abs=1e-12)
    assert math.fsum(f.shares_of_reward) == pytest.approx(1.0, abs=1e-12)


@given(schemes, ledgers(min_len=1), st.randoms(use_true_random=False))
def test_relabeling_miners_permutes_payouts(scheme, led, rnd):
    perm = list(range(led.pool_size))
    rnd.shuffle(perm)
    moved = ShareLedger.from_pairs(led.pool_size, [(perm[e.miner], e.time) for e in led.events])
    ctx = RoundContext(led.last_time + 0.1)
    f, g = payout(scheme, led, ctx), payout(scheme, moved, ctx)
    for j in range(led.pool_size):
        assert g[perm[j]] == pytest.approx(f[j], abs=1e-12)


@given(schemes, ledgers(), st.data())
def test_unilateral_increase(scheme, led, data):
    miner = data.draw(st.integers(0, led.pool_size - 1))
    t = led.last_time + data.draw(st.floats(0.0, 0.1))
    assert check_unilateral_increase(scheme, led, miner, t)


@given(st.sampled_from(FIXED), ledgers(), st.data())
def test_fixed_schemes_have_no_delay_gain(scheme, led, data):
    miner = data.draw(st.integers(0, led.pool_size - 1))
    t = led.last_time + data.draw(st.floats(0.0, 0.1))
    delta = data.draw(st.floats(0.0, 0.5))
    assert check_delay_gain(scheme, led, miner, t, delta, RoundContext(t + delta + 0.01)) == 0.0


@given(ledgers(min_len=1, max_len=15), st.data())
def test_score_decay_rewards_delay(led, data):
    miner = data.draw(st.integers(0, led.pool_size - 1))
    assume(any(e.miner != miner for e in led.events))
    t = led.last_time + data.draw(st.floats(0.0, 0.05))
    delta = data.draw(st.floats(1e-3, 0.05))
    gain = check_delay_gain(PayoutScheme.score_decay(32.0), led, miner, t, delta, RoundContext(t + delta))
    assert gain > 0.0


@given(ledgers(min_len=1, max_len=15), st.data())
def test_latest_submission_dominates_under_decay(led, data):
    miner = data.draw(st.integers(0, led.pool_size - 1))
    t = led.last_time + data.draw(st.floats(0.0, 0.05))
    span = data.draw(st.floats(1e-3, 0.1))
    delta = data.draw(st.floats(0.0, span))
    ctx = RoundContext(t + span)
    scheme = PayoutScheme.score_decay(16.0)
    assert check_delay_gain(scheme, led, miner, t, span, ctx) >= check_delay_gain(scheme, led, miner, t, delta, ctx)


def test_stale_share_and_negative_delay():
    led = ShareLedger.from_pairs(2, [(0, 0.0)])
    with pytest.raises(StaleShareError):
        check_delay_gain(PayoutScheme.pps(), led, 1, 0.1, 1.0, RoundContext(0.5))
    with pytest.raises(ValidationError):
        check_delay_gain(PayoutScheme.pps(), led, 1, 0.1, -0.1, RoundContext(0.5))


def test_delayed_submission_never_beats_prompt_on_average():
    led = ShareLedger.from_pairs(2, [(0, 0.0), (1, 0.1), (0, 0.2)])
    for scheme in FIXED:
        prompt, late = delayed_submission_payouts(scheme, led, 1, 0.3, 0.5, 50_000, seed=11)
        se = late.std(ddof=1) / math.sqrt(late.size)
        assert late.mean() <= prompt + 3 * se
        # staleness strictly hurts whenever the share would have counted
        assert late.mean() < prompt
    with pytest.raises(ValidationError):
        delayed_submission_payouts(PayoutScheme.score_decay(1), led, 1, 0.3, 0.5, 10, 0)


@st.composite
def flat_rounds(draw):
    counts = draw(st.lists(st.integers(1, 12), min_size=1, max_size=8))
    n = sum(counts)
    is_att = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    ages = draw(st.lists(st.floats(0.0, 3.0, allow_nan=False), min_size=n, max_size=n, unique=True))
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return starts, np.array(is_att), np.array(ages), counts


def _scalar_fraction(scheme, is_att, ages, t_b=5.0):
    order = np.argsort(-ages, kind="stable")
    led = ShareLedger.from_pairs(2, [(0 if is_att[k] else 1, t_b - ages[k]) for k in order])
    return payout(scheme, led, RoundContext(t_b))[0]


@given(st.sampled_from(ALL), flat_rounds())
def test_vectorized_matches_scalar(scheme, rounds):
    starts, is_att, ages, counts = rounds
    got = attacker_payout_fractions(scheme, starts, is_att, ages)
    for k, (s, n) in enumerate(zip(starts, counts)):
        assert got[k] == pytest.approx(_scalar_fraction(scheme, is_att[s:s + n], ages[s:s + n]), abs=1e-12)


@given(flat_rounds())
def test_withheld_weight_zero_equals_submission_at_block(rounds):
    starts, is_att, ages, counts = rounds
    scheme = PayoutScheme.score_decay(8.0)
    got = attacker_payout_fractions(scheme, starts, is_att, ages, np.zeros(len(counts)))
    moved = np.where(is_att, 0.0, ages)
    for k, (s, n) in enumerate(zip(starts, counts)):
        assert got[k] == pytest.approx(_scalar_fraction(scheme, is_att[s:s + n], moved[s:s + n]), abs=1e-12)


def test_fully_forfeited_round_pays_nothing():
    got = attacker_payout_fractions(
        PayoutScheme.score_decay(1.0), np.array([0]), np.array([True, True]), np.array([0.1, 0.2]), np.array([-np.inf])
    )
    assert got[0] == 0.0


def test_fixed_schemes_refuse_withheld_weights():
    with pytest.raises(ValidationError):
        attacker_payout_fractions(PayoutScheme.pps(), np.array([0]), np.array([True]), np.array([0.1]), np.array([0.0]))


def test_scheme_kinds_cover_enum():
    assert {s.kind for s in ALL} == set(SchemeKind)
