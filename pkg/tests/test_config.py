import pytest
from hypothesis import given
from hypothesis import strategies as st

from raidmc.config import (DISK_A, DISK_B, DISK_C, TB, CodeConfig,
                           ExperimentConfig, PolicyConfig, erf, raid1, raid5,
                           raid6, stripe_bytes, usable_capacity, validate)
from raidmc.distributions import ParameterError


def test_erf_raid5_7p1():
    assert erf(raid5(8)) == pytest.approx(8.0 / 7.0)


def test_erf_raid1():
    assert erf(raid1()) == pytest.approx(2.0)


def test_erf_pmds_4811():
    assert erf(CodeConfig(m=4, n=8, r=1, s=1)) == pytest.approx(32.0 / 27.0)


@given(st.integers(1, 6), st.integers(2, 20), st.integers(0, 3), st.integers(0, 4))
def test_erf_at_least_one(m, n, r, s):
    code = CodeConfig(m=m, n=n, r=r, s=s)
    if r >= n or m * (n - r) - s <= 0:
        return
    e = erf(code)
    assert e >= 1.0
    assert (e == 1.0) == (r == 0 and s == 0)


def test_usable_capacity_raid5():
    assert usable_capacity(raid5(8), DISK_A, 1) == pytest.approx(7 * TB)
    assert usable_capacity(raid5(8), DISK_A, 1000) == pytest.approx(7000 * TB)


def test_usable_capacity_pmds():
    code = CodeConfig(m=4, n=8, r=1, s=1)
    assert usable_capacity(code, DISK_A, 1) == pytest.approx(8 * TB * 27 / 32)


@given(st.integers(1, 4), st.integers(2, 16), st.integers(0, 3), st.integers(0, 4))
def test_usable_times_erf_is_physical(m, n, r, s):
    code = CodeConfig(m=m, n=n, r=r, s=s)
    if r >= n or m * (n - r) - s <= 0:
        return
    physical = n * DISK_A.capacity
    assert usable_capacity(code, DISK_A) * erf(code) == pytest.approx(physical, rel=1e-12)


def test_stripe_footprint_is_128k_for_eight_devices():
    assert stripe_bytes(raid5(8)) == 128 * 1024


def test_builtin_disk_capacities():
    assert DISK_A.capacity == TB
    assert DISK_B.capacity == TB
    assert DISK_C.capacity == 288 * 10 ** 9


def test_validate_ok_for_defaults():
    for disk in (DISK_A, DISK_B, DISK_C):
        cfg = ExperimentConfig(name="x", disk=disk, code=raid5(8),
                               policy=PolicyConfig(hep=0.001))
        assert validate(cfg) == []


def test_validate_r_must_be_less_than_n():
    cfg = ExperimentConfig(name="x", disk=DISK_A,
                           code=CodeConfig(m=1, n=4, r=4, s=0))
    assert any("fewer than devices" in v for v in validate(cfg))


def test_validate_hep_range():
    cfg = ExperimentConfig(name="x", disk=DISK_A, code=raid5(8),
                           policy=PolicyConfig(hep=1.5))
    assert any("hep" in v for v in validate(cfg))


def test_validate_capacity_scale():
    cfg = ExperimentConfig(name="x", disk=DISK_A, code=raid5(8), capacity_scale=7)
    assert any("capacity_scale" in v for v in validate(cfg))


def test_erf_rejects_zero_capacity_code():
    with pytest.raises(ParameterError):
        erf(CodeConfig(m=1, n=2, r=1, s=1))


def test_code_labels():
    assert raid5(8).label == "RAID5(7+1)"
    assert raid6(16).label == "RAID6(14+2)"
    assert raid1().label == "RAID1(1+1)"
    assert CodeConfig(m=1, n=8, r=1, s=2).label == "PMDS(1,8,1,2)"
