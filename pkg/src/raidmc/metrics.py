"""NOMDU / NOMDL aggregation with survivability weighting and error bars.

NOMDU is the byte-hours of unavailable logical data divided by usable
capacity times mission time; NOMDL is permanently lost logical bytes divided
by usable capacity.  Both are dimensionless in [0, 1].  Data-object
survivability splits every loss incident: a `dos` fraction turns into an
unavailability interval lasting the backup-recovery draw, the remaining
(1 - dos) fraction is permanent loss.

Unavailability intervals may overlap (a stripe already unavailable when the
whole array goes down); overlapping intervals on the same data are merged so
no byte-hour is counted twice, with whole-array unavailability superseding
concurrent stripe-level unavailability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .distributions import ParameterError

# data_key value for incidents covering the whole array (vs. a stripe index)
WHOLE_ARRAY = -1

_Z = {0.90: 1.645, 0.95: 1.960, 0.99: 2.576}


def nomdu_incident(unavailable_bytes: float, duration: float,
                   usable_bytes: float, mission: float) -> float:
    """Contribution of one unavailability incident."""
    if duration > mission:
        raise ParameterError(f"duration {duration} exceeds mission {mission}")
    return (unavailable_bytes * duration) / (usable_bytes * mission)


def nomdl_incident(lost_bytes: float, usable_bytes: float) -> float:
    """Contribution of one permanent-loss incident."""
    if lost_bytes > usable_bytes:
        raise ParameterError("lost bytes exceed usable capacity")
    return lost_bytes / usable_bytes


def apply_dos(lost_bytes: float, dos: float, recovery_time: float,
              usable_bytes: float, mission: float):
    """Split one loss incident into (permanent-loss part, recovery-DU part)."""
    if not (0.0 <= dos <= 1.0):
        raise ParameterError(f"dos must lie in [0, 1], got {dos}")
    nomdl_part = (1.0 - dos) * lost_bytes / usable_bytes
    nomdu_part = dos * lost_bytes * recovery_time / (usable_bytes * mission)
    return nomdl_part, nomdu_part


def mc_error(values, confidence: float = 0.95) -> float:
    """Monte Carlo half-width: sample std times normal quantile over sqrt(n)."""
    n = len(values)
    if n < 2:
        raise ParameterError("error estimate needs at least two replicas")
    if confidence not in _Z:
        raise ParameterError(f"confidence must be one of {sorted(_Z)}")
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return math.sqrt(var) * _Z[confidence] / math.sqrt(n)


def _union(intervals):
    """Union of (start, end) intervals as a sorted disjoint list."""
    out = []
    for s, e in sorted(intervals):
        if out and s <= out[-1][1]:
            if e > out[-1][1]:
                out[-1] = (out[-1][0], e)
        elif e > s:
            out.append((s, e))
    return out


def _subtract(intervals, holes):
    """Measure of the union of `intervals` minus the union of `holes`."""
    total = 0.0
    hi = 0
    for s, e in intervals:
        cur = s
        while hi < len(holes) and holes[hi][1] <= cur:
            hi += 1
        j = hi
        while j < len(holes) and holes[j][0] < e:
            hs, he = holes[j]
            if hs > cur:
                total += hs - cur
            cur = max(cur, he)
            if cur >= e:
                break
            j += 1
        if cur < e:
            total += e - cur
    return total


def merged_du_byte_hours(du_incidents) -> float:
    """Byte-hours of one array's DU incidents with overlap merging.

    Whole-array intervals are unioned first and supersede stripe-level
    intervals; each stripe's intervals are unioned and clipped against the
    whole-array union, so no byte is double counted.
    """
    array_iv = []
    per_stripe = {}
    stripe_bytes = {}
    for inc in du_incidents:
        if inc.end <= inc.start:
            continue
        if inc.data_key == WHOLE_ARRAY:
            array_iv.append((inc.start, inc.end, inc.bytes))
        else:
            per_stripe.setdefault(inc.data_key, []).append((inc.start, inc.end))
            prev = stripe_bytes.get(inc.data_key, 0.0)
            stripe_bytes[inc.data_key] = max(prev, inc.bytes)

    total = 0.0
    if array_iv:
        # Overlapping whole-array incidents of different magnitude: count the
        # larger one.  Sweep elementary slices between boundary points.
        bounds = sorted({t for s, e, _ in array_iv for t in (s, e)})
        for a, b in zip(bounds, bounds[1:]):
            mx = 0.0
            for s, e, v in array_iv:
                if s <= a and e >= b and v > mx:
                    mx = v
            total += mx * (b - a)
    holes = _union([(s, e) for s, e, _ in array_iv])
    for key, ivs in per_stripe.items():
        total += stripe_bytes[key] * _subtract(_union(ivs), holes)
    return total


@dataclass
class FleetResult:
    per_array: list
    usable_bytes: float     # fleet-total logical capacity
    mission: float
    n_arrays: int
    nomdu: float
    nomdl: float
    nomdu_err: float
    nomdl_err: float
    confidence: float
    counts: dict = field(default_factory=dict)
    nomdl_adl: float = 0.0  # loss from whole-array (DDF/TDF-style) incidents
    nomdl_sdl: float = 0.0  # loss from stripe (DF+LSE-style) incidents


def aggregate(logs, confidence: float = 0.95) -> FleetResult:
    """Sum per-incident contributions over a fleet of per-array logs."""
    if not logs:
        raise ParameterError("empty fleet")
    mission = logs[0].mission
    array_usable = logs[0].usable_bytes
    for log in logs:
        if log.mission != mission or log.usable_bytes != array_usable:
            raise ParameterError("fleet mixes missions or array capacities")

    n = len(logs)
    du_values = []
    dl_values = []
    counts = {"adl": 0, "sdl": 0, "adu": 0, "sdu": 0,
              "disk_failures": 0, "lse_arrivals": 0, "replacements": 0,
              "human_errors": 0, "crashes": 0}
    nomdl_adl = 0.0
    nomdl_sdl = 0.0
    for log in logs:
        byteh = merged_du_byte_hours(log.du)
        du_values.append(byteh / (array_usable * mission))
        lost = 0.0
        for inc in log.dl:
            lost += inc.permanent_bytes
            frac = inc.permanent_bytes / (array_usable * n)
            if inc.cause == "ADL":
                counts["adl"] += 1
                nomdl_adl += frac
            else:
                counts["sdl"] += 1
                nomdl_sdl += frac
        dl_values.append(lost / array_usable)
        for inc in log.du:
            if inc.cause == "ADU":
                counts["adu"] += 1
            elif inc.cause == "SDU":
                counts["sdu"] += 1
        for k in ("disk_failures", "lse_arrivals", "replacements",
                  "human_errors", "crashes"):
            counts[k] += log.counters.get(k, 0)

    nomdu = sum(du_values) / n
    nomdl = sum(dl_values) / n
    err_du = mc_error(du_values, confidence) if n >= 2 else 0.0
    err_dl = mc_error(dl_values, confidence) if n >= 2 else 0.0
    counts["dl_events"] = counts["adl"] + counts["sdl"]
    return FleetResult(
        per_array=list(logs), usable_bytes=array_usable * n, mission=mission,
        n_arrays=n, nomdu=nomdu, nomdl=nomdl, nomdu_err=err_du,
        nomdl_err=err_dl, confidence=confidence, counts=counts,
        nomdl_adl=nomdl_adl, nomdl_sdl=nomdl_sdl,
    )
