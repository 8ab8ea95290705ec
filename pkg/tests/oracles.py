"""Independent baselines used by the acceptance suite.

The RAID6 ten-year loss-event baseline is a nested-quadrature estimate in
the style of the published closed-form models: expected double-failure
overlaps (renewal density times a second-failure hazard over the
replace+rebuild window) times the probability that a latent sector error is
live on a survivor, or that a third disk fails, at that moment.  It is
independent of the event-driven engine; its outputs are frozen into
test_acceptance.py and can be regenerated by running this module.
"""

import math

from scipy import integrate

from raidmc.config import DISK_A, DISK_B, DISK_C
from raidmc.distributions import weibull_mean
from raidmc.markov import mean_lse_residence


def _pdf(t, eta, beta):
    if t <= 0:
        return 0.0
    u = (t / eta) ** beta
    return (beta / eta) * (t / eta) ** (beta - 1) * math.exp(-u)


def _haz(t, eta, beta):
    if t <= 0:
        return 0.0
    return (beta / eta) * (t / eta) ** (beta - 1)


def _renewal_density(t, eta, beta):
    f1 = _pdf(t, eta, beta)
    if f1 == 0.0:
        return 0.0
    f2, _ = integrate.quad(lambda x: _pdf(x, eta, beta) * _pdf(t - x, eta, beta),
                           0.0, t, limit=60)
    return f1 + f2


def expected_raid6_loss_events(disk, n=16, mission=87600.0, replace_mean=0.443):
    """Expected ten-year loss events (all disk-failure/LSE mixes) per array."""
    eta, beta = disk.d_df.eta, disk.d_df.beta
    window = replace_mean + weibull_mean(disk.d_rec)
    p_lse = (n - 2) * mean_lse_residence(disk.d_scrub) / disk.d_lse.eta

    def overlap_density(t):
        return (n * _renewal_density(t, eta, beta)
                * (n - 1) * _haz(t, eta, beta) * window)

    overlaps, _ = integrate.quad(overlap_density, 0.0, mission, limit=200)
    p_third = ((n - 2) * _haz(0.6 * mission, eta, beta)
               * (replace_mean + 2.0 * weibull_mean(disk.d_rec)))
    return overlaps * (p_lse + p_third)


if __name__ == "__main__":
    for disk in (DISK_A, DISK_B, DISK_C):
        rate = expected_raid6_loss_events(disk)
        print(f"{disk.name}: {rate:.4e} per array-decade "
              f"({1000 * rate:.2f} per 1000 arrays)")
