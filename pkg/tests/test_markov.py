import math
from dataclasses import replace

import numpy as np
import pytest

from raidmc.config import DISK_A, DISK_B, PolicyConfig, raid5, raid6
from raidmc.distributions import (ParameterError, RandomStream, WeibullParams,
                                  match_exponential_rate, weibull_mean)
from raidmc.engine import simulate_array
from raidmc.markov import (MarkovSpec, build_raid5_markov, markov_metrics,
                           mean_lse_residence, transient_solve)
from raidmc.metrics import aggregate


def test_generator_rows_sum_to_zero():
    spec = build_raid5_markov(DISK_A, raid5(8), PolicyConfig(hep=0.001), 87600.0)
    assert np.allclose(spec.q.sum(axis=1), 0.0, atol=1e-12)
    off_diag = spec.q - np.diag(np.diag(spec.q))
    assert (off_diag >= 0.0).all()


def test_failure_rates_are_incidence_matched():
    spec = build_raid5_markov(DISK_A, raid5(8), PolicyConfig(hep=0.001), 87600.0)
    assert spec.rates["l_df"] == pytest.approx(
        match_exponential_rate(DISK_A.d_df, 87600.0))
    assert spec.rates["l_df"] == pytest.approx(2.818978e-6, rel=1e-6)
    assert spec.rates["l_lse"] == pytest.approx(1.0 / 12325.0)


def test_repair_rates_are_mean_matched():
    policy = PolicyConfig(hep=0.001)
    spec = build_raid5_markov(DISK_A, raid5(8), policy, 87600.0)
    assert spec.rates["l_dr"] == pytest.approx(1.0 / weibull_mean(policy.d_dr))
    assert spec.rates["l_rec"] == pytest.approx(1.0 / weibull_mean(DISK_A.d_rec))
    assert spec.rates["l_scrub"] == pytest.approx(1.0 / mean_lse_residence(DISK_A.d_scrub))


def test_mean_lse_residence_exponential_case():
    # beta=1 passes of mean eta: residual eta plus half a pass
    assert mean_lse_residence(WeibullParams(0.0, 200.0, 1.0)) == pytest.approx(300.0)


def test_build_rejects_unsupported():
    with pytest.raises(ParameterError):
        build_raid5_markov(DISK_A, raid6(16), PolicyConfig(), 87600.0)
    with pytest.raises(ParameterError):
        build_raid5_markov(DISK_A, raid5(8), PolicyConfig(spare=True), 87600.0)
    with pytest.raises(ParameterError):
        build_raid5_markov(DISK_A, raid5(8), PolicyConfig(dos=0.5), 87600.0)


def test_zero_generator_stays_put():
    spec = MarkovSpec(states=("A", "B"), q=np.zeros((2, 2)), initial=0,
                      du_states={}, absorbing_loss={}, loss_transitions=[],
                      usable_bytes=1.0)
    traj = transient_solve(spec, 100.0, step=0.5)
    assert traj.final[0] == pytest.approx(1.0)
    assert traj.occupancy[0] == pytest.approx(100.0)
    assert traj.occupancy[1] == 0.0


def test_two_state_absorption_analytic():
    lam = 3e-4
    q = np.array([[-lam, lam], [0.0, 0.0]])
    spec = MarkovSpec(states=("OP", "ABS"), q=q, initial=0, du_states={},
                      absorbing_loss={1: (1.0, "ADL")}, loss_transitions=[],
                      usable_bytes=1.0)
    t_end = 20000.0
    traj = transient_solve(spec, t_end, step=0.5)
    assert traj.final[1] == pytest.approx(1.0 - math.exp(-lam * t_end), rel=1e-9)
    # integrated occupancy of the transient state: (1 - exp(-lam t)) / lam
    assert traj.occupancy[0] == pytest.approx(
        (1.0 - math.exp(-lam * t_end)) / lam, rel=1e-9)


def test_step_halving_changes_little():
    spec = build_raid5_markov(DISK_A, raid5(8), PolicyConfig(hep=0.01), 87600.0)
    t1 = transient_solve(spec, 87600.0, step=0.01)
    t2 = transient_solve(spec, 87600.0, step=0.005)
    m1 = markov_metrics(spec, t1, spec.usable_bytes, 87600.0)
    m2 = markov_metrics(spec, t2, spec.usable_bytes, 87600.0)
    assert m1["nomdu"] == pytest.approx(m2["nomdu"], rel=1e-6)
    assert t1.step_error <= 1e-8


def test_probability_conserved_along_trajectory():
    spec = build_raid5_markov(DISK_B, raid5(8), PolicyConfig(hep=0.1), 87600.0)
    traj = transient_solve(spec, 87600.0)
    assert np.abs(traj.probs.sum(axis=1) - 1.0).max() < 1e-9
    assert (traj.probs >= -1e-12).all()


def test_hep_zero_du_unreachable():
    spec = build_raid5_markov(DISK_A, raid5(8), PolicyConfig(hep=0.0), 87600.0)
    traj = transient_solve(spec, 87600.0)
    m = markov_metrics(spec, traj, spec.usable_bytes, 87600.0)
    assert m["nomdu"] == 0.0
    assert m["nomdl_adl"] > 0.0


def test_markov_nomdu_linear_in_hep():
    vals = []
    for hep in (1e-3, 1e-2):
        spec = build_raid5_markov(DISK_A, raid5(8), PolicyConfig(hep=hep), 87600.0)
        traj = transient_solve(spec, 87600.0)
        vals.append(markov_metrics(spec, traj, spec.usable_bytes, 87600.0)["nomdu"])
    assert vals[1] / vals[0] == pytest.approx(10.0, rel=0.02)


@pytest.mark.slow
def test_all_exponential_markov_matches_monte_carlo():
    """With beta = 1 everywhere and dos = 0 the chain is the exact model."""
    mission = 20000.0
    disk = replace(DISK_A,
                   d_df=WeibullParams(0.0, 2.0e5, 1.0),
                   d_rec=WeibullParams(0.0, 20.0, 1.0),
                   d_lse=WeibullParams(0.0, 2.0e4, 1.0),
                   d_scrub=WeibullParams(0.0, 200.0, 1.0))
    policy = PolicyConfig(hep=0.05,
                          d_dr=WeibullParams(0.0, 0.5, 1.0),
                          d_her=WeibullParams(0.0, 1.0, 1.0),
                          d_crash=WeibullParams(0.0, 8760.0, 1.0))
    n = 30000
    logs = [simulate_array(disk, raid5(8), policy, mission, RandomStream(99, i))
            for i in range(n)]
    fleet = aggregate(logs)

    spec = build_raid5_markov(disk, raid5(8), policy, mission)
    traj = transient_solve(spec, mission)
    mm = markov_metrics(spec, traj, spec.usable_bytes, mission)

    se_adl = fleet.nomdl_adl / math.sqrt(max(1, fleet.counts["adl"]))
    assert abs(mm["nomdl_adl"] - fleet.nomdl_adl) <= 3 * se_adl
    se_du = fleet.nomdu / math.sqrt(max(1, fleet.counts["adu"]))
    assert abs(mm["nomdu"] - fleet.nomdu) <= 3 * se_du
