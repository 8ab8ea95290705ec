"""Event-driven Monte Carlo simulation of one disk array over a mission.

Per device, three renewal processes run while it is in service: time to
operational failure, latent-sector-error arrivals (one lost sector per
arrival, placed on a uniformly random stripe) and scrubbing passes.  An LSE
arriving during one scrub pass is repaired at a uniform instant of the next
pass.  Scrub pass boundaries are generated lazily per device, so passes cost
draws only when an LSE actually needs placing.

Service model (no spare): a failed disk is replaced after a replacement-time
draw; with probability hep the agent instead pulls a running disk, which
then either gets reinserted (human-error recovery draw) or crashes first
(crash draw).  Recovering the error also performs the correct replacement
when the array had become unavailable, matching the published state
diagrams.  When several disks are failed they are replaced simultaneously
and rebuilt one after another.  The replacement service only proceeds while
the array is available.

Service model (hot spare): rebuild onto the spare starts at the instant of
failure; the agent replaces the failed disk only after the rebuild completes
(delayed replacement), and that replacement attempt carries the same human
error risk.  Exactly one spare exists; it is consumed by a rebuild and
restored by the next successful replacement.

After every event the failure-condition classifier runs.  Whole-array loss
splits by survivability: the surviving fraction becomes an unavailability
interval lasting a backup-restore draw after which the array resumes fresh,
the rest is permanent loss (with dos = 0 the array is absorbed).  Stripe
loss writes the affected stripes off (their sectors are accounted lost,
resp. unavailable-for-a-sector-restore-draw) and the array carries on.
LSE arrivals while any device is failed or rebuilding are dropped when
``ignore_lse_during_rebuild`` is set, mirroring the published model's
omitted low-probability transition.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .conditions import (FAILED, OPERATIONAL, REBUILDING, WRONGLY_REMOVED,
                         stripe_is_lost, stripe_is_unavailable)
from .config import (CodeConfig, DiskModel, ExperimentConfig, PolicyConfig,
                     stripe_bytes, stripe_count, usable_capacity, validate)
from .distributions import ParameterError, RandomStream, WeibullParams
from .metrics import WHOLE_ARRAY, FleetResult, aggregate

# event kinds, processed in deterministic (time, seq) order
EV_FAIL = 0
EV_LSE = 1
EV_REMOVE = 2
EV_SERVICE = 3
EV_REBUILD = 4
EV_HER = 5
EV_CRASH = 6
EV_RESET = 7

# stream purpose tags
_P_FAIL = 1
_P_LSE = 2
_P_LSE_AUX = 3
_P_SCRUB = 4
_P_REBUILD = 5
_P_SERVICE = 10
_P_HEP = 11
_P_VICTIM = 12
_P_HER = 13
_P_CRASH = 14
_P_BR = 15
_P_SBR = 16

_SCRUB_BATCH = 128


@dataclass
class DUIncident:
    start: float
    end: float
    bytes: float
    cause: str          # "ADU" | "SDU" | "DL_RECOVERY"
    data_key: int       # WHOLE_ARRAY or stripe index


@dataclass
class DLIncident:
    time: float
    bytes: float            # magnitude at the storage level
    permanent_bytes: float  # (1 - dos) * bytes
    cause: str              # "ADL" | "SDL"
    stripes: int = 0        # stripes written off (SDL only)


@dataclass
class IncidentLog:
    usable_bytes: float
    mission: float
    code_r: int
    du: list = field(default_factory=list)
    dl: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    absorbed_at: float = None

    def count(self, cause: str) -> int:
        if cause in ("ADL", "SDL"):
            return sum(1 for i in self.dl if i.cause == cause)
        return sum(1 for i in self.du if i.cause == cause)


def count_ddf_compatible(log: IncidentLog, mode: str) -> int:
    """Loss events counting whole-array and stripe losses alike.

    This is the counting convention of the published models this simulator
    is validated against, which treat every loss (disk failures only, or
    disk failure plus latent sector errors) as a DDF (RAID5) / TDF (RAID6).
    """
    if mode == "raid5":
        want_r = 1
    elif mode == "raid6":
        want_r = 2
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    if log.code_r != want_r:
        raise ParameterError(f"log comes from an r={log.code_r} code, not {mode}")
    return len(log.dl)


class _Weib:
    """A Weibull distribution bound to one draw stream."""

    __slots__ = ("gamma", "eta", "inv_beta", "stream")

    def __init__(self, params: WeibullParams, stream: RandomStream):
        self.gamma = params.gamma
        self.eta = params.eta
        self.inv_beta = 1.0 / params.beta
        self.stream = stream

    def draw(self) -> float:
        u = self.stream.uniform()
        return self.gamma + self.eta * (-math.log1p(-u)) ** self.inv_beta


class _ArraySim:
    def __init__(self, disk: DiskModel, code: CodeConfig, policy: PolicyConfig,
                 mission: float, root: RandomStream, capacity_scale: int = 1):
        self.code = code
        self.policy = policy
        self.mission = mission
        self.n = code.n
        self.r = code.r
        self.s = code.s
        self.usable = usable_capacity(code, disk)
        self.stripe_bytes = float(stripe_bytes(code))
        self.n_stripes = stripe_count(code, disk, capacity_scale)

        n = self.n
        self.fail_d = [_Weib(disk.d_df, root.substream(_P_FAIL, d)) for d in range(n)]
        self.lse_d = [_Weib(disk.d_lse, root.substream(_P_LSE, d)) for d in range(n)]
        self.aux = [root.substream(_P_LSE_AUX, d) for d in range(n)]
        self.rebuild_d = [_Weib(disk.d_rec, root.substream(_P_REBUILD, d)) for d in range(n)]
        self.scrub_p = disk.d_scrub
        self.scrub_streams = [root.substream(_P_SCRUB, d) for d in range(n)]
        self.service_d = _Weib(policy.d_dr, root.substream(_P_SERVICE, 0))
        self.hep_s = root.substream(_P_HEP, 0)
        self.victim_s = root.substream(_P_VICTIM, 0)
        self.her_d = _Weib(policy.d_her, root.substream(_P_HER, 0))
        self.crash_d = _Weib(policy.d_crash, root.substream(_P_CRASH, 0))
        self.br_d = _Weib(policy.d_br, root.substream(_P_BR, 0))
        self.sbr_d = _Weib(policy.d_sbr, root.substream(_P_SBR, 0))

        self.status = [OPERATIONAL] * n
        self.gen = [0] * n
        self.fail_time = [0.0] * n
        self.df = 0
        self.he = 0
        self.lse_map = {}            # stripe -> {dev -> count}
        self.stash = {}              # dev -> {stripe -> count} (wrongly removed)
        self.scrub_pos = [None] * n  # upcoming pass boundaries, ascending
        self.scrub_i = [0] * n       # cursor into scrub_pos

        self.spare_free = policy.spare
        self.carcasses = 0
        self.rebuild_queue = []
        self.rebuild_active = -1
        self.service_pending = False
        self.service_gen = 0
        self.absorbed = False
        self.reset_gen = 0

        self.heap = []
        self.seq = 0
        self.adu_start = None
        self.sdu_open = {}
        self.log = IncidentLog(usable_bytes=self.usable, mission=mission,
                               code_r=code.r,
                               counters={"disk_failures": 0, "lse_arrivals": 0,
                                         "replacements": 0, "human_errors": 0,
                                         "crashes": 0})

    # -- scheduling helpers ------------------------------------------------

    def _push(self, t: float, kind: int, dev: int, gen: int, extra: int = 0):
        if t > self.mission:
            return
        self.seq += 1
        heapq.heappush(self.heap, (t, self.seq, kind, dev, gen, extra))

    def _scrub_gaps(self, dev: int) -> np.ndarray:
        u = self.scrub_streams[dev].uniforms(_SCRUB_BATCH)
        p = self.scrub_p
        return p.gamma + p.eta * (-np.log1p(-u)) ** (1.0 / p.beta)

    def _scrub_reset(self, dev: int, t: float):
        """A fresh disk's scrub schedule restarts at its in-service instant."""
        self.scrub_pos[dev] = t + np.cumsum(self._scrub_gaps(dev))
        self.scrub_i[dev] = 0

    def _scrub_pass_after(self, dev: int, t: float):
        """First two scrub boundaries beyond t: the repair pass for an LSE at t."""
        pos = self.scrub_pos[dev]
        i = self.scrub_i[dev]
        # need at least two boundaries beyond t (the repair pass's ends)
        while len(pos) - i < 2 or pos[-2] <= t:
            if i > 0:
                pos = pos[i:]
                i = 0
            pos = np.concatenate([pos, pos[-1] + np.cumsum(self._scrub_gaps(dev))])
            self.scrub_pos[dev] = pos
            self.scrub_i[dev] = 0
        j = int(np.searchsorted(pos, t, side="right"))
        self.scrub_i[dev] = j
        return float(pos[j]), float(pos[j + 1])

    # -- device lifecycle ---------------------------------------------------

    def _set_status(self, dev: int, st: int):
        old = self.status[dev]
        if old == FAILED or old == REBUILDING:
            self.df -= 1
        elif old == WRONGLY_REMOVED:
            self.he -= 1
        if st == FAILED or st == REBUILDING:
            self.df += 1
        elif st == WRONGLY_REMOVED:
            self.he += 1
        self.status[dev] = st
        self.gen[dev] += 1

    def _enter_service(self, dev: int, t: float):
        """A fresh (or reinserted) disk starts operating at t."""
        self._set_status(dev, OPERATIONAL)
        g = self.gen[dev]
        self._push(t + self.fail_d[dev].draw(), EV_FAIL, dev, g)
        self._push(t + self.lse_d[dev].draw(), EV_LSE, dev, g)
        self._scrub_reset(dev, t)

    def _clear_dev_lses(self, dev: int, keep_stash: bool):
        removed = {}
        empty = []
        for v, counts in self.lse_map.items():
            c = counts.pop(dev, 0)
            if c:
                removed[v] = c
            if not counts:
                empty.append(v)
        for v in empty:
            del self.lse_map[v]
        if keep_stash and removed:
            self.stash[dev] = removed

    # -- incident accounting -------------------------------------------------

    def _close_open_du(self, t: float):
        if self.adu_start is not None:
            if t > self.adu_start:
                self.log.du.append(DUIncident(self.adu_start, t, self.usable,
                                              "ADU", WHOLE_ARRAY))
            self.adu_start = None
        for v, start in self.sdu_open.items():
            if t > start:
                self.log.du.append(DUIncident(start, t, self.stripe_bytes,
                                              "SDU", v))
        self.sdu_open.clear()

    def _handle_adl(self, t: float):
        self._close_open_du(t)
        dos = self.policy.dos
        raw = self.usable
        self.log.dl.append(DLIncident(t, raw, (1.0 - dos) * raw, "ADL"))
        if dos <= 0.0:
            self.absorbed = True
            self.log.absorbed_at = t
            return
        rec = self.br_d.draw()
        end = min(t + rec, self.mission)
        if end > t:
            self.log.du.append(DUIncident(t, end, dos * raw, "DL_RECOVERY",
                                          WHOLE_ARRAY))
        # invalidate everything pending; the array resumes fresh after restore
        for d in range(self.n):
            self.gen[d] += 1
        self.service_gen += 1
        self.service_pending = False
        self.lse_map.clear()
        self.stash.clear()
        self.rebuild_queue = []
        self.rebuild_active = -1
        self.df = 0
        self.he = 0
        self.status = [OPERATIONAL] * self.n
        if t + rec >= self.mission:
            self.absorbed = True  # restore completes after mission end
        else:
            self.reset_gen += 1
            self._push(t + rec, EV_RESET, -1, self.reset_gen)
            self.absorbed = True  # ignore events until the reset fires

    def _handle_sdl(self, t: float, lost):
        dos = self.policy.dos
        k = len(lost)
        raw = k * self.stripe_bytes
        self.log.dl.append(DLIncident(t, raw, (1.0 - dos) * raw, "SDL", stripes=k))
        rec = self.sbr_d.draw() if dos > 0.0 else 0.0
        for v in lost:
            start = self.sdu_open.pop(v, None)
            if start is not None and t > start:
                self.log.du.append(DUIncident(start, t, self.stripe_bytes, "SDU", v))
            if dos > 0.0:
                end = min(t + rec, self.mission)
                if end > t:
                    self.log.du.append(DUIncident(t, end, dos * self.stripe_bytes,
                                                  "DL_RECOVERY", v))
            del self.lse_map[v]

    def _reassess(self, t: float):
        r = self.r
        df = self.df
        if df > r:
            self._handle_adl(t)
            return
        if self.lse_map:
            lost = [v for v, c in self.lse_map.items()
                    if stripe_is_lost(c, self.status, r, self.s, df)]
            if lost:
                self._handle_sdl(t, lost)
        he = self.he
        if df + he > r:
            if self.adu_start is None:
                # whole array unavailable supersedes any open stripe intervals
                for v, start in self.sdu_open.items():
                    if t > start:
                        self.log.du.append(DUIncident(start, t, self.stripe_bytes,
                                                      "SDU", v))
                self.sdu_open.clear()
                self.adu_start = t
        else:
            if self.adu_start is not None:
                if t > self.adu_start:
                    self.log.du.append(DUIncident(self.adu_start, t, self.usable,
                                                  "ADU", WHOLE_ARRAY))
                self.adu_start = None
            if he > 0 and self.lse_map:
                now = {v for v, c in self.lse_map.items()
                       if stripe_is_unavailable(c, self.status, r, self.s, df, he)}
            else:
                now = ()
            for v in list(self.sdu_open):
                if v not in now:
                    start = self.sdu_open.pop(v)
                    if t > start:
                        self.log.du.append(DUIncident(start, t, self.stripe_bytes,
                                                      "SDU", v))
            for v in now:
                if v not in self.sdu_open:
                    self.sdu_open[v] = t

    # -- service -------------------------------------------------------------

    def _maybe_schedule_service(self, t: float):
        if self.service_pending or self.absorbed:
            return
        if self.df + self.he > self.r:
            return  # array unavailable: replacement service halts
        if any(s == FAILED for s in self.status):
            pass
        elif (self.policy.spare and self.carcasses > 0
              and self.rebuild_active < 0 and not self.rebuild_queue):
            pass
        else:
            return
        self.service_pending = True
        self.service_gen += 1
        self._push(t + self.service_d.draw(), EV_SERVICE, -1, self.service_gen)

    def _replace_failed(self, t: float):
        """All currently failed disks get brand-new replacements; rebuilds chain."""
        devs = sorted((d for d in range(self.n) if self.status[d] == FAILED),
                      key=lambda d: (self.fail_time[d], d))
        for d in devs:
            self._set_status(d, REBUILDING)
            self.rebuild_queue.append(d)
        self._start_next_rebuild(t)

    def _start_next_rebuild(self, t: float):
        if self.rebuild_active >= 0 or not self.rebuild_queue:
            return
        dev = self.rebuild_queue.pop(0)
        self.rebuild_active = dev
        self._push(t + self.rebuild_d[dev].draw(), EV_REBUILD, dev, self.gen[dev])

    def _wrongly_remove(self, dev: int, t: float):
        self._clear_dev_lses(dev, keep_stash=True)
        self._set_status(dev, WRONGLY_REMOVED)
        self.log.counters["human_errors"] += 1
        g = self.gen[dev]
        self._push(t + self.her_d.draw(), EV_HER, dev, g)
        self._push(t + self.crash_d.draw(), EV_CRASH, dev, g)

    def _reinsert(self, dev: int, t: float):
        """Human error undone: the pulled disk returns with its data intact."""
        self._enter_service(dev, t)
        stash = self.stash.pop(dev, None)
        if stash:
            g = self.gen[dev]
            aux = self.aux[dev]
            for v in sorted(stash):
                c = stash[v]
                self.lse_map.setdefault(v, {})[dev] = c
                for _ in range(c):
                    b1, b2 = self._scrub_pass_after(dev, t)
                    self._push(b1 + aux.uniform() * (b2 - b1), EV_REMOVE, dev, g, v)

    # -- event handlers --------------------------------------------------------

    def _on_fail(self, t: float, dev: int, gen: int):
        if self.status[dev] != OPERATIONAL or self.gen[dev] != gen:
            return
        self.log.counters["disk_failures"] += 1
        self.fail_time[dev] = t
        self._clear_dev_lses(dev, keep_stash=False)
        self._set_status(dev, FAILED)
        if self.policy.spare and self.spare_free:
            # automatic fail-over: rebuild onto the spare starts immediately
            self.spare_free = False
            self.carcasses += 1
            self._set_status(dev, REBUILDING)
            self.rebuild_queue.append(dev)
            self._start_next_rebuild(t)
        self._reassess(t)
        self._maybe_schedule_service(t)

    def _on_lse(self, t: float, dev: int, gen: int):
        if self.status[dev] != OPERATIONAL or self.gen[dev] != gen:
            return
        self.log.counters["lse_arrivals"] += 1
        self._push(t + self.lse_d[dev].draw(), EV_LSE, dev, gen)
        aux = self.aux[dev]
        u_place = aux.uniform()
        u_rem = aux.uniform()
        if self.policy.ignore_lse_during_rebuild and self.df > 0:
            return  # exposure-window arrivals are dropped (see module docstring)
        v = min(int(u_place * self.n_stripes), self.n_stripes - 1)
        counts = self.lse_map.setdefault(v, {})
        counts[dev] = counts.get(dev, 0) + 1
        b1, b2 = self._scrub_pass_after(dev, t)
        self._push(b1 + u_rem * (b2 - b1), EV_REMOVE, dev, gen, v)
        if self.df == 0 and self.he == 0:
            # only the touched stripe can have changed classification
            if stripe_is_lost(counts, self.status, self.r, self.s, 0):
                self._reassess(t)
        else:
            self._reassess(t)

    def _on_remove(self, t: float, dev: int, gen: int, stripe: int):
        if self.gen[dev] != gen:
            return
        counts = self.lse_map.get(stripe)
        if counts is None:
            return
        c = counts.get(dev, 0)
        if not c:
            return
        if c == 1:
            del counts[dev]
            if not counts:
                del self.lse_map[stripe]
        else:
            counts[dev] = c - 1
        if self.he or self.df:
            self._reassess(t)

    def _on_service(self, t: float, dev: int, gen: int):
        if gen != self.service_gen or not self.service_pending:
            return
        self.service_pending = False
        if self.df + self.he > self.r:
            return  # became unavailable while the agent worked; attempt aborted
        failed = any(s == FAILED for s in self.status)
        carcass_job = (not failed and self.policy.spare and self.carcasses > 0
                       and self.rebuild_active < 0 and not self.rebuild_queue)
        if not failed and not carcass_job:
            return
        u = self.hep_s.uniform()
        if u < self.policy.hep:
            ops = [d for d in range(self.n) if self.status[d] == OPERATIONAL]
            if ops:
                victim = ops[min(int(self.victim_s.uniform() * len(ops)),
                                 len(ops) - 1)]
                self._wrongly_remove(victim, t)
        else:
            self.log.counters["replacements"] += 1
            if failed:
                self._replace_failed(t)
            else:
                self.spare_free = True
                self.carcasses = 0
        self._reassess(t)
        self._maybe_schedule_service(t)

    def _on_rebuild(self, t: float, dev: int, gen: int):
        if self.status[dev] != REBUILDING or self.gen[dev] != gen:
            return
        self.rebuild_active = -1
        self._enter_service(dev, t)
        self._start_next_rebuild(t)
        self._reassess(t)
        self._maybe_schedule_service(t)

    def _on_her(self, t: float, dev: int, gen: int):
        if self.status[dev] != WRONGLY_REMOVED or self.gen[dev] != gen:
            return
        self._reinsert(dev, t)
        if not self.service_pending and any(s == FAILED for s in self.status):
            # the service was halted by unavailability: recovering the human
            # error includes performing the correct replacement
            self.log.counters["replacements"] += 1
            self._replace_failed(t)
        self._reassess(t)
        self._maybe_schedule_service(t)

    def _on_crash(self, t: float, dev: int, gen: int):
        if self.status[dev] != WRONGLY_REMOVED or self.gen[dev] != gen:
            return
        self.log.counters["crashes"] += 1
        self.stash.pop(dev, None)
        self.fail_time[dev] = t
        self._set_status(dev, FAILED)
        self._reassess(t)
        self._maybe_schedule_service(t)

    def _on_reset(self, t: float, gen: int):
        if gen != self.reset_gen:
            return
        self.absorbed = False
        self.log.absorbed_at = None
        self.spare_free = self.policy.spare
        self.carcasses = 0
        for d in range(self.n):
            self._enter_service(d, t)

    # -- main loop -----------------------------------------------------------

    def run(self) -> IncidentLog:
        for d in range(self.n):
            self._enter_service(d, 0.0)
        heap = self.heap
        mission = self.mission
        while heap:
            t, _, kind, dev, gen, extra = heapq.heappop(heap)
            if t > mission:
                break
            if self.absorbed:
                if kind == EV_RESET:
                    self._on_reset(t, gen)
                continue
            if kind == EV_FAIL:
                self._on_fail(t, dev, gen)
            elif kind == EV_LSE:
                self._on_lse(t, dev, gen)
            elif kind == EV_REMOVE:
                self._on_remove(t, dev, gen, extra)
            elif kind == EV_SERVICE:
                self._on_service(t, dev, gen)
            elif kind == EV_REBUILD:
                self._on_rebuild(t, dev, gen)
            elif kind == EV_HER:
                self._on_her(t, dev, gen)
            elif kind == EV_CRASH:
                self._on_crash(t, dev, gen)
            elif kind == EV_RESET:
                self._on_reset(t, gen)
        if not self.absorbed:
            self._close_open_du(mission)
        return self.log


def simulate_array(disk: DiskModel, code: CodeConfig, policy: PolicyConfig,
                   mission: float, stream: RandomStream,
                   capacity_scale: int = 1) -> IncidentLog:
    """Simulate one array replica; `stream` is its root random stream."""
    sim = _ArraySim(disk, code, policy, mission, stream, capacity_scale)
    return sim.run()


def simulate_fleet(n_arrays: int, config: ExperimentConfig,
                   progress=None) -> FleetResult:
    """Simulate array replicas 0..n_arrays-1 and aggregate the incident logs."""
    problems = validate(config)
    if problems:
        raise ParameterError("; ".join(problems))
    logs = []
    for idx in range(n_arrays):
        root = RandomStream(config.seed, idx)
        logs.append(simulate_array(config.disk, config.code, config.policy,
                                   config.mission_hours, root,
                                   config.capacity_scale))
        if progress is not None and (idx + 1) % 1000 == 0:
            progress(idx + 1, n_arrays)
    return aggregate(logs, config.confidence)
