"""Three-parameter Weibull sampling and the reproducible random streams.

Every stochastic delay in the simulator (disk failure, rebuild, latent
sector error arrival, scrubbing, replacement service, human-error recovery,
crash of a pulled disk, backup restore) is drawn from a location/scale/shape
Weibull via inverse-CDF transform, so one event consumes exactly one uniform
draw.  Streams are counter-based (splitmix64 over a hashed key), which means
a stream is addressed purely by (seed, array index, purpose, device) and the
k-th draw of a stream is a pure function of that address and k.  Adding a
new event type, or changing a policy knob, therefore never perturbs the
draws seen by any other stream -- the property the paired (common random
number) experiments rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ParameterError(ValueError):
    """Raised when a distribution or configuration parameter is invalid."""


_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / (1 << 53)


def _mix(z: int) -> int:
    # splitmix64 finalizer (Steele et al.); full 64-bit avalanche.
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def _derive_key(parts) -> int:
    key = 0x8C2F9D1B6AE35770
    for p in parts:
        key = _mix((key ^ _mix(int(p) & _MASK)) + _GOLDEN)
    return key


class RandomStream:
    """Counter-based uniform stream addressed by (seed, *ids).

    Identical (seed, ids) always reproduces the identical sequence; distinct
    ids give statistically independent sequences.  ``uniform()`` returns one
    draw in [0, 1); ``uniforms(k)`` returns the next k draws as an ndarray
    without changing what a later ``uniform()`` would have produced had the
    batch been drawn one by one.
    """

    __slots__ = ("key", "counter")

    def __init__(self, seed: int, *ids: int):
        self.key = _derive_key((seed,) + ids)
        self.counter = 0

    def substream(self, *ids: int) -> "RandomStream":
        s = RandomStream.__new__(RandomStream)
        s.key = _derive_key((self.key,) + ids)
        s.counter = 0
        return s

    def uniform(self) -> float:
        self.counter += 1
        z = _mix((self.key + self.counter * _GOLDEN) & _MASK)
        return (z >> 11) * _INV_2_53

    def uniforms(self, k: int) -> np.ndarray:
        idx = np.arange(self.counter + 1, self.counter + k + 1, dtype=np.uint64)
        self.counter += k
        z = (np.uint64(self.key) + idx * np.uint64(_GOLDEN))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
        return (z >> np.uint64(11)).astype(np.float64) * _INV_2_53


@dataclass(frozen=True)
class WeibullParams:
    """Location gamma (hours), characteristic life eta (hours), shape beta."""

    gamma: float
    eta: float
    beta: float

    def validate(self) -> None:
        if not (self.eta > 0.0):
            raise ParameterError(f"eta must be > 0, got {self.eta}")
        if not (self.beta > 0.0):
            raise ParameterError(f"beta must be > 0, got {self.beta}")
        if not (self.gamma >= 0.0):
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")


def weibull_from_u(params: WeibullParams, u: float) -> float:
    """Inverse-CDF transform of a uniform draw u in [0, 1)."""
    return params.gamma + params.eta * (-math.log1p(-u)) ** (1.0 / params.beta)


def sample_weibull(params: WeibullParams, stream: RandomStream) -> float:
    params.validate()
    return weibull_from_u(params, stream.uniform())


def weibull_cdf(params: WeibullParams, t: float) -> float:
    params.validate()
    if t <= params.gamma:
        return 0.0
    return -math.expm1(-(((t - params.gamma) / params.eta) ** params.beta))


def weibull_mean(params: WeibullParams) -> float:
    params.validate()
    return params.gamma + params.eta * math.gamma(1.0 + 1.0 / params.beta)


def match_exponential_rate(params: WeibullParams, mission: float) -> float:
    """Constant rate giving the Weibull's cumulative incidence at `mission`.

    Evaluates (mission/eta)**beta / mission.  The source material labels
    this quantity "MTTF" although dimensionally it is a rate (1/h); it is
    implemented literally and used only to parameterise the analytic Markov
    baseline.  Only the two-parameter (gamma = 0) form is defined; matching
    a shifted Weibull this way has no stated meaning and is rejected.
    """
    params.validate()
    if mission <= 0.0:
        raise ParameterError(f"mission must be > 0, got {mission}")
    if params.gamma != 0.0:
        raise ParameterError(
            "rate matching is only defined for gamma = 0 (two-parameter) Weibulls"
        )
    return (mission / params.eta) ** params.beta / mission


def sample_uniform(lo: float, hi: float, stream: RandomStream) -> float:
    if lo > hi:
        raise ParameterError(f"empty interval [{lo}, {hi}]")
    return lo + (hi - lo) * stream.uniform()
