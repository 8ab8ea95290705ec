"""Instantaneous failure-condition classification for PMDS(m, n, r, s) arrays.

An array state (per-device status plus sparse per-stripe lost-sector counts)
is classified into any subset of:

  ADL  array data loss          -- more failed devices than row parities
  SDL  stripe data loss         -- some stripe has more LSEs than correctable
  ADU  array data unavailability  -- failed + wrongly-removed devices exceed r
  SDU  stripe data unavailability -- stripe recoverable in principle but not
                                     from the operational devices alone

A device under rebuild counts as failed for erasure purposes (its data is
not yet readable).  Failed and wrongly-removed devices carry no live LSE
entries; a wrongly-removed disk's counts are stashed by the engine and
restored on reinsertion since its platters were never touched.

Per stripe, r - DF whole devices can have all their LSEs absorbed by row
parities and s further sectors by global parities.  Picking the devices with
the most LSEs is optimal, which `classify` exploits; `oracle_classify`
instead tries every device subset and is kept as an independent check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .config import CodeConfig
from .distributions import ParameterError

OPERATIONAL = 0
FAILED = 1
WRONGLY_REMOVED = 2
REBUILDING = 3

ADL = "ADL"
SDL = "SDL"
ADU = "ADU"
SDU = "SDU"


@dataclass
class ArrayState:
    code: CodeConfig
    device_status: list
    # stripe index -> {device index -> live LSE count}
    lse_counts: dict = field(default_factory=dict)


def count_df(state: ArrayState) -> int:
    return sum(1 for s in state.device_status if s == FAILED or s == REBUILDING)


def count_he(state: ArrayState) -> int:
    return sum(1 for s in state.device_status if s == WRONGLY_REMOVED)


def _top_sum(values, h: int) -> int:
    if h <= 0 or not values:
        return 0
    return sum(sorted(values, reverse=True)[:h])


def max_correctable_lse(stripe_counts, code: CodeConfig, df: int) -> int:
    """Global parities plus the LSEs of the r-df most-affected devices."""
    if df > code.r:
        raise ParameterError(f"df={df} exceeds row parities r={code.r}")
    return code.s + _top_sum([c for c in stripe_counts if c > 0], code.r - df)


def stripe_is_lost(counts: dict, statuses, r: int, s: int, df: int) -> bool:
    """counts: {device -> LSE count} for one stripe; requires df <= r."""
    total = 0
    pool = []  # non-failed devices' counts, candidates for whole-device absorption
    for dev, c in counts.items():
        total += c
        st = statuses[dev]
        if st != FAILED and st != REBUILDING:
            pool.append(c)
    return s + _top_sum(pool, r - df) < total


def stripe_is_unavailable(counts: dict, statuses, r: int, s: int, df: int, he: int) -> bool:
    """Stripe fully correctable overall, but not using operational devices only."""
    if stripe_is_lost(counts, statuses, r, s, df):
        return False
    op_total = 0
    op_pool = []
    for dev, c in counts.items():
        if statuses[dev] == OPERATIONAL:
            op_total += c
            op_pool.append(c)
    return s + _top_sum(op_pool, r - df - he) < op_total


def classify(state: ArrayState) -> frozenset:
    """Evaluate the four failure conditions on a state snapshot."""
    r, s = state.code.r, state.code.s
    df = count_df(state)
    he = count_he(state)
    statuses = state.device_status

    flags = set()
    if r < df:
        flags.add(ADL)
    else:
        if any(stripe_is_lost(c, statuses, r, s, df) for c in state.lse_counts.values()):
            flags.add(SDL)
        if r < df + he:
            flags.add(ADU)
        elif he > 0:
            if any(stripe_is_unavailable(c, statuses, r, s, df, he)
                   for c in state.lse_counts.values()):
                flags.add(SDU)
    return frozenset(flags)


# --- exhaustive-subset oracle -------------------------------------------------

_ORACLE_MAX_DEVICES = 8


def _subset_recoverable(pool, extra: int, budget_s: int, h: int) -> bool:
    """Can absorbing the LSEs of any <= h pool devices leave <= budget_s residual?

    `extra` counts LSEs outside the absorbable pool (they always stay residual).
    """
    total = sum(pool) + extra
    if total <= budget_s:
        return True
    idx = range(len(pool))
    for k in range(1, min(h, len(pool)) + 1):
        for sub in combinations(idx, k):
            if total - sum(pool[i] for i in sub) <= budget_s:
                return True
    return False


def oracle_classify(state: ArrayState) -> frozenset:
    """Same contract as classify, with SDL/SDU decided by brute force.

    Tries every subset of candidate devices instead of the sorted-top
    heuristic.  Tractability bound: at most 8 devices.
    """
    if state.code.n > _ORACLE_MAX_DEVICES:
        raise ParameterError(f"oracle limited to {_ORACLE_MAX_DEVICES} devices")
    r, s = state.code.r, state.code.s
    df = count_df(state)
    he = count_he(state)
    statuses = state.device_status

    flags = set()
    if r < df:
        return frozenset((ADL,))

    for counts in state.lse_counts.values():
        pool = []       # counts on non-failed devices (absorbable)
        op_pool = []
        extra = 0       # counts on failed devices (none, by the state invariant)
        for dev, c in counts.items():
            st = statuses[dev]
            if st == FAILED or st == REBUILDING:
                extra += c
                continue
            pool.append(c)
            if st == OPERATIONAL:
                op_pool.append(c)
        if not _subset_recoverable(pool, extra, s, r - df):
            flags.add(SDL)
        elif he > 0 and df + he <= r:
            if not _subset_recoverable(op_pool, 0, s, r - df - he):
                flags.add(SDU)

    if r < df + he:
        flags.add(ADU)
        flags.discard(SDU)
    return frozenset(flags)
