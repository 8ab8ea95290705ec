import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from raidmc.conditions import (ADL, ADU, FAILED, OPERATIONAL, REBUILDING, SDL,
                               SDU, WRONGLY_REMOVED, ArrayState, classify,
                               count_df, count_he, max_correctable_lse,
                               oracle_classify, stripe_is_lost)
from raidmc.config import CodeConfig
from raidmc.distributions import ParameterError


def make_state(n, r, s, statuses=None, stripes=None, m=1):
    st_list = list(statuses) if statuses else [OPERATIONAL] * n
    counts = {}
    for v, per_dev in (stripes or {}).items():
        counts[v] = {d: c for d, c in per_dev.items() if c}
    return ArrayState(code=CodeConfig(m=m, n=n, r=r, s=s),
                      device_status=st_list, lse_counts=counts)


def test_counts_all_operational():
    state = make_state(4, 1, 0)
    assert (count_df(state), count_he(state)) == (0, 0)


def test_counts_failed_and_removed():
    state = make_state(4, 1, 0, [FAILED, WRONGLY_REMOVED, OPERATIONAL, OPERATIONAL])
    assert (count_df(state), count_he(state)) == (1, 1)


def test_rebuilding_counts_as_failed():
    state = make_state(6, 2, 0, [FAILED, REBUILDING] + [OPERATIONAL] * 4)
    assert count_df(state) == 2


def test_max_correctable_example():
    code = CodeConfig(m=1, n=4, r=1, s=1)
    assert max_correctable_lse([3, 1, 0, 0], code, df=0) == 4


def test_max_correctable_no_row_slack():
    code = CodeConfig(m=1, n=4, r=1, s=2)
    assert max_correctable_lse([3, 1, 0, 0], code, df=1) == 2
    assert max_correctable_lse([0, 0, 0, 0], code, df=0) == 2


def test_max_correctable_rejects_df_over_r():
    with pytest.raises(ParameterError):
        max_correctable_lse([0, 0, 0, 0], CodeConfig(m=1, n=4, r=1, s=0), df=2)


def test_classify_adl():
    state = make_state(6, 2, 0, [FAILED, FAILED, FAILED] + [OPERATIONAL] * 3)
    assert classify(state) == {ADL}


def test_classify_raid5_du():
    state = make_state(8, 1, 0, [FAILED, WRONGLY_REMOVED] + [OPERATIONAL] * 6)
    assert classify(state) == {ADU}


def test_classify_sdl_two_device_stripe():
    state = make_state(4, 1, 1, stripes={0: {0: 2, 1: 2}})
    assert classify(state) == {SDL}  # 4 total > 1 global + best-device 2


def test_classify_sdu():
    state = make_state(4, 1, 1, [WRONGLY_REMOVED] + [OPERATIONAL] * 3,
                       stripes={0: {1: 1, 2: 1}})
    # fully correctable (2 <= 1 + max 1) but not from operational alone
    assert classify(state) == {SDU}


def test_classify_clean_array():
    assert classify(make_state(8, 1, 0)) == frozenset()


def test_adl_and_adu_mutually_exclusive():
    state = make_state(4, 1, 0, [FAILED, FAILED, WRONGLY_REMOVED, OPERATIONAL])
    flags = classify(state)
    assert ADL in flags and ADU not in flags


def test_sdl_can_coincide_with_adu():
    state = make_state(4, 1, 0, [FAILED, WRONGLY_REMOVED, OPERATIONAL, OPERATIONAL],
                       stripes={3: {2: 1}})
    assert classify(state) == {SDL, ADU}


def test_oracle_agrees_on_spec_examples():
    cases = [
        make_state(6, 2, 0, [FAILED] * 3 + [OPERATIONAL] * 3),
        make_state(8, 1, 0, [FAILED, WRONGLY_REMOVED] + [OPERATIONAL] * 6),
        make_state(4, 1, 1, stripes={0: {0: 2, 1: 2}}),
        make_state(4, 1, 1, [WRONGLY_REMOVED] + [OPERATIONAL] * 3,
                   stripes={0: {1: 1, 2: 1}}),
        make_state(4, 1, 0),
        make_state(4, 2, 0, stripes={0: {0: 1, 1: 1, 2: 1}}),
    ]
    for state in cases:
        assert classify(state) == oracle_classify(state)


def test_oracle_three_singles_with_two_row_parities():
    # two devices absorbed, one LSE residual, no global parity: stripe lost
    state = make_state(4, 2, 0, stripes={0: {0: 1, 1: 1, 2: 1}})
    assert oracle_classify(state) == {SDL}


def test_oracle_empty_stripe_map_never_stripe_flagged():
    state = make_state(5, 2, 2, [FAILED] + [OPERATIONAL] * 4)
    assert oracle_classify(state) & {SDL, SDU} == frozenset()


def test_oracle_size_bound():
    with pytest.raises(ParameterError):
        oracle_classify(make_state(9, 1, 0))


status_strategy = st.sampled_from([OPERATIONAL, FAILED, WRONGLY_REMOVED, REBUILDING])


@settings(max_examples=400, deadline=None)
@given(
    n=st.integers(3, 6),
    r=st.integers(0, 2),
    s=st.integers(0, 2),
    statuses=st.lists(status_strategy, min_size=6, max_size=6),
    counts=st.lists(st.lists(st.integers(0, 3), min_size=6, max_size=6),
                    min_size=1, max_size=2),
)
def test_classify_matches_oracle(n, r, s, statuses, counts):
    if r >= n or (n - r) - s <= 0:
        return
    statuses = statuses[:n]
    stripes = {}
    for v, per_dev in enumerate(counts):
        row = {d: c for d, c in enumerate(per_dev[:n])
               if c and statuses[d] == OPERATIONAL}
        if row:
            stripes[v] = row
    state = ArrayState(code=CodeConfig(m=1, n=n, r=r, s=s),
                       device_status=statuses, lse_counts=stripes)
    assert classify(state) == oracle_classify(state)


@settings(max_examples=200, deadline=None)
@given(
    n=st.integers(3, 6),
    r=st.integers(1, 2),
    s=st.integers(0, 2),
    per_dev=st.lists(st.integers(0, 3), min_size=6, max_size=6),
    extra_dev=st.integers(0, 5),
)
def test_adding_lse_never_clears_sdl(n, r, s, per_dev, extra_dev):
    if r >= n or (n - r) - s <= 0 or extra_dev >= n:
        return
    base = {d: c for d, c in enumerate(per_dev[:n]) if c}
    state = make_state(n, r, s, stripes={0: base})
    before = SDL in classify(state)
    bumped = dict(base)
    bumped[extra_dev] = bumped.get(extra_dev, 0) + 1
    after = SDL in classify(make_state(n, r, s, stripes={0: bumped}))
    assert after >= before


@settings(max_examples=200, deadline=None)
@given(n=st.integers(3, 6), r=st.integers(0, 2),
       statuses=st.lists(status_strategy, min_size=6, max_size=6))
def test_failing_one_more_never_clears_adl(n, r, statuses):
    if r >= n:
        return
    statuses = statuses[:n]
    state = make_state(n, r, 0, statuses)
    before = ADL in classify(state)
    ops = [d for d in range(n) if statuses[d] == OPERATIONAL]
    if not ops:
        return
    harder = list(statuses)
    harder[ops[0]] = FAILED
    after = ADL in classify(make_state(n, r, 0, harder))
    assert after >= before


@settings(max_examples=300, deadline=None)
@given(counts=st.lists(st.integers(0, 5), min_size=1, max_size=8),
       h=st.integers(0, 3))
def test_top_h_absorption_is_optimal(counts, h):
    # no subset of h devices absorbs more than the h with the most LSEs
    from itertools import combinations
    best_sorted = sum(sorted(counts, reverse=True)[:h])
    best_enum = 0
    for k in range(0, min(h, len(counts)) + 1):
        for sub in combinations(range(len(counts)), k):
            best_enum = max(best_enum, sum(counts[i] for i in sub))
    assert best_sorted == best_enum


def test_stripe_is_lost_handles_failed_device_counts():
    # counts recorded on a failed device are never absorbable
    statuses = [FAILED, OPERATIONAL, OPERATIONAL, OPERATIONAL]
    assert stripe_is_lost({0: 1}, statuses, r=2, s=0, df=1)
