"""Continuous-time Markov baseline for the RAID5-with-LSE state diagram.

The chain mirrors the Monte Carlo state machine with constant rates:

    OP --n*l_df--> EXP --(1-hep)*l_dr--> EXP_r --l_rec--> OP
    OP --n*l_lse--> EXP_LSE --l_scrub--> OP
    EXP_LSE --l_df--> EXP                   (the LSE-affected disk itself fails)
    EXP_LSE --(n-1)*l_df--> EXP             (+ stripe-loss recorded in passing)
    EXP --hep*l_dr--> DU --l_her--> EXP_r
    EXP, EXP_r --(n-1)*l_df--> DL_FF        (whole-array loss, absorbing)
    DU --l_crash + (n-2)*l_df--> DL_FF

Failure-side rates (disk failure, LSE arrival) are matched so the
exponential reproduces the Weibull's cumulative incidence over the mission;
repair-side rates (replacement, rebuild, human-error recovery, crash, scrub
residence) are mean-matched, since incidence-matching a repair distribution
at mission scale would be meaningless.  The sector-loss flux is recorded on
the EXP_LSE exit transition (one sector per event: a finite chain cannot
hold LSE counts) rather than in a separate absorbing state, matching the
simulator where a stripe loss does not stop the array; the DL_FLSE state is
kept in the declared state set for reporting but receives no flow.  With
dos = 0, whole-array loss (DL_FF) is absorbing in both models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import CodeConfig, DiskModel, PolicyConfig, usable_capacity
from .distributions import (ParameterError, WeibullParams,
                            match_exponential_rate, weibull_mean)

STATES = ("OP", "EXP", "EXP_LSE", "EXP_r", "DU", "DL_FF", "DL_FLSE")


class NumericalError(RuntimeError):
    """Transient solve failed its internal accuracy checks."""


def mean_lse_residence(d_scrub: WeibullParams) -> float:
    """Expected time from LSE arrival to its removal by scrubbing.

    Scrub passes are a renewal process; an LSE arriving during one pass is
    repaired at a uniform instant of the next, so the residence is the
    stationary residual life plus half a pass.
    """
    mw = d_scrub.eta * math.gamma(1.0 + 1.0 / d_scrub.beta)
    mw2 = d_scrub.eta ** 2 * math.gamma(1.0 + 2.0 / d_scrub.beta)
    ex = d_scrub.gamma + mw
    ex2 = d_scrub.gamma ** 2 + 2.0 * d_scrub.gamma * mw + mw2
    return ex2 / (2.0 * ex) + ex / 2.0


@dataclass
class MarkovSpec:
    states: tuple
    q: np.ndarray                  # generator, rows sum to zero
    initial: int
    du_states: dict                # state index -> unavailable bytes
    absorbing_loss: dict           # state index -> (lost bytes, cause)
    loss_transitions: list         # (from, to, rate, lost bytes, cause)
    usable_bytes: float
    rates: dict = field(default_factory=dict)


def build_raid5_markov(disk: DiskModel, code: CodeConfig, policy: PolicyConfig,
                       mission: float) -> MarkovSpec:
    if code.r != 1 or code.s != 0:
        raise ParameterError("the Markov baseline covers plain RAID5 only")
    if policy.spare:
        raise ParameterError("the Markov baseline has no spare-disk variant")
    if policy.dos != 0.0:
        raise ParameterError("the Markov baseline assumes dos = 0")

    n = code.n
    l_df = match_exponential_rate(disk.d_df, mission)
    l_lse = match_exponential_rate(disk.d_lse, mission)
    l_dr = 1.0 / weibull_mean(policy.d_dr)
    l_rec = 1.0 / weibull_mean(disk.d_rec)
    l_her = 1.0 / weibull_mean(policy.d_her)
    l_crash = 1.0 / weibull_mean(policy.d_crash)
    l_scrub = 1.0 / mean_lse_residence(disk.d_scrub)
    hep = policy.hep

    i = {s: k for k, s in enumerate(STATES)}
    q = np.zeros((len(STATES), len(STATES)))

    def arc(a, b, rate):
        q[i[a], i[b]] += rate

    arc("OP", "EXP", n * l_df)
    arc("OP", "EXP_LSE", n * l_lse)
    arc("EXP_LSE", "OP", l_scrub)
    arc("EXP_LSE", "EXP", l_df)             # affected disk fails, LSEs die with it
    arc("EXP_LSE", "EXP", (n - 1) * l_df)   # another disk fails: stripe loss
    arc("EXP", "EXP_r", (1.0 - hep) * l_dr)
    arc("EXP", "DU", hep * l_dr)
    arc("EXP", "DL_FF", (n - 1) * l_df)
    arc("EXP_r", "OP", l_rec)
    arc("EXP_r", "DL_FF", (n - 1) * l_df)
    arc("DU", "EXP_r", l_her)
    arc("DU", "DL_FF", l_crash + (n - 2) * l_df)
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))

    usable = usable_capacity(code, disk)
    return MarkovSpec(
        states=STATES, q=q, initial=i["OP"],
        du_states={i["DU"]: usable},
        absorbing_loss={i["DL_FF"]: (usable, "ADL")},
        loss_transitions=[(i["EXP_LSE"], i["EXP"], (n - 1) * l_df,
                           float(disk.sector_size), "SDL")],
        usable_bytes=usable,
        rates={"l_df": l_df, "l_lse": l_lse, "l_dr": l_dr, "l_rec": l_rec,
               "l_her": l_her, "l_crash": l_crash, "l_scrub": l_scrub},
    )


@dataclass
class Trajectory:
    times: np.ndarray        # grid of evaluation instants
    probs: np.ndarray        # state occupancy at each grid instant
    occupancy: np.ndarray    # time integral of each state's probability
    final: np.ndarray
    step: float
    step_error: float        # max |result(h) - result(h/2)| over outputs


def _rk4_propagator(a: np.ndarray, h: float) -> np.ndarray:
    """One-step matrix of classical RK4 on the linear system dx/dt = x A."""
    ah = a * h
    m = np.eye(a.shape[0]) + ah
    term = ah
    for k in (2.0, 3.0, 4.0):
        term = term @ ah / k
        m = m + term
    return m


def _fix_rows(p: np.ndarray, k: int) -> np.ndarray:
    # attribute float drift of the probability-block row sums to the
    # self-transition, so conservation holds exactly through long products
    idx = np.arange(k)
    p[idx, idx] += 1.0 - p[:k, :k].sum(axis=1)
    return p


def _power(m: np.ndarray, n: int, k: int) -> np.ndarray:
    result = np.eye(m.shape[0])
    base = m.copy()
    while n:
        if n & 1:
            result = _fix_rows(result @ base, k)
        n >>= 1
        if n:
            base = _fix_rows(base @ base, k)
    return result


def _solve(q: np.ndarray, initial: int, mission: float, step: float, grid: int):
    k = q.shape[0]
    # augment with occupancy accumulators: d/dt [pi, a] = [pi, a] [[Q, I], [0, 0]]
    a = np.zeros((2 * k, 2 * k))
    a[:k, :k] = q
    a[:k, k:] = np.eye(k)
    per_chunk = max(1, math.ceil(mission / (grid * step)))
    h = mission / (grid * per_chunk)
    m = _fix_rows(_rk4_propagator(a, h), k)
    chunk = _power(m, per_chunk, k)
    x = np.zeros(2 * k)
    x[initial] = 1.0
    times = np.empty(grid + 1)
    probs = np.empty((grid + 1, k))
    times[0] = 0.0
    probs[0] = x[:k]
    for g in range(1, grid + 1):
        x = x @ chunk
        times[g] = g * per_chunk * h
        probs[g] = x[:k]
    return times, probs, x[k:], x[:k]


def transient_solve(spec: MarkovSpec, mission: float, step: float = 0.005,
                    grid: int = 100) -> Trajectory:
    """Integrate dpi/dt = pi Q over [0, mission].

    Uses the exact one-step RK4 propagator of the (augmented) linear system,
    applied by matrix powering, and verifies the result against a half-step
    run and probability conservation.
    """
    if step <= 0.0:
        raise ParameterError("step must be positive")
    t1, p1, occ1, fin1 = _solve(spec.q, spec.initial, mission, step, grid)
    _, p2, occ2, fin2 = _solve(spec.q, spec.initial, mission, step / 2.0, grid)
    err = max(float(np.max(np.abs(fin1 - fin2))),
              float(np.max(np.abs(occ1 - occ2))) / max(mission, 1.0))
    if err > 1e-8:
        raise NumericalError(
            f"step-doubling residual {err:.3e} exceeds 1e-8; reduce the step")
    conservation = np.abs(p1.sum(axis=1) - 1.0).max()
    if conservation > 1e-9:
        raise NumericalError(
            f"probability conservation violated by {conservation:.3e}")
    return Trajectory(times=t1, probs=p1, occupancy=occ1, final=fin1,
                      step=step, step_error=err)


def markov_metrics(spec: MarkovSpec, traj: Trajectory,
                   usable_bytes: float, mission: float):
    """(nomdu, nomdl) plus the loss split, from a solved trajectory."""
    nomdu = 0.0
    for idx, unavailable in spec.du_states.items():
        nomdu += traj.occupancy[idx] * unavailable / (usable_bytes * mission)
    nomdl_adl = 0.0
    for idx, (lost, _cause) in spec.absorbing_loss.items():
        nomdl_adl += traj.final[idx] * lost / usable_bytes
    nomdl_sdl = 0.0
    for src, _dst, rate, lost, _cause in spec.loss_transitions:
        nomdl_sdl += traj.occupancy[src] * rate * lost / usable_bytes
    return {"nomdu": nomdu, "nomdl": nomdl_adl + nomdl_sdl,
            "nomdl_adl": nomdl_adl, "nomdl_sdl": nomdl_sdl}
