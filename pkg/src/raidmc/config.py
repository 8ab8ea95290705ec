"""Disk models, erasure-code geometry, service policies and experiment configs.

A code is described as PMDS(m, n, r, s): m rows per stripe, n devices, r row
(per-row / device) parities, s global parities per stripe.  RAID5 is (r=1,
s=0), RAID6 is (r=2, s=0) and RAID1 is the n=2 special case of RAID5.  The
three built-in disk models carry the published field-data Weibull parameters
for operational failure, rebuild, latent sector errors and scrubbing; the
built-in policy carries the published replacement / human-error / crash and
backup-recovery parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .distributions import ParameterError, WeibullParams

TB = 10 ** 12
GB = 10 ** 9


@dataclass(frozen=True)
class DiskModel:
    name: str
    capacity: int  # bytes
    d_df: WeibullParams
    d_rec: WeibullParams
    d_lse: WeibullParams
    d_scrub: WeibullParams
    sector_size: int = 4096


@dataclass(frozen=True)
class CodeConfig:
    m: int  # rows per stripe
    n: int  # devices per array
    r: int  # row parities (redundant devices)
    s: int  # global parities per stripe
    chunk_size: int = 16384  # bytes per symbol; 8 devices * 16 KB = 128 KB stripe

    @property
    def label(self) -> str:
        if self.r == 1 and self.s == 0:
            return "RAID1(1+1)" if self.n == 2 else f"RAID5({self.n - 1}+1)"
        if self.r == 2 and self.s == 0:
            return f"RAID6({self.n - 2}+2)"
        return f"PMDS({self.m},{self.n},{self.r},{self.s})"


@dataclass(frozen=True)
class PolicyConfig:
    hep: float = 0.0        # human error probability per replacement attempt
    spare: bool = False     # hot spare with delayed disk replacement
    dos: float = 0.0        # data object survivability, constant over mission
    d_dr: WeibullParams = WeibullParams(0.0, 0.5, 2.0)
    d_her: WeibullParams = WeibullParams(0.0, 1.0, 2.0)
    d_crash: WeibullParams = WeibullParams(0.0, 8760.0, 1.4)
    d_br: WeibullParams = WeibullParams(20.0, 40.0, 2.0)
    d_sbr: WeibullParams = WeibullParams(2.7e-7, 5.5e-7, 2.0)
    ignore_lse_during_rebuild: bool = True


# Field-data Weibull parameters for the three disk models (gamma = 0 for all).
DISK_A = DiskModel(
    name="diskA",
    capacity=1 * TB,
    d_df=WeibullParams(0.0, 302016.0, 1.13),
    d_rec=WeibullParams(0.0, 22.7, 1.65),
    d_lse=WeibullParams(0.0, 12325.0, 1.0),
    d_scrub=WeibullParams(0.0, 186.0, 1.0),
)

DISK_B = DiskModel(
    name="diskB",
    capacity=1 * TB,
    d_df=WeibullParams(0.0, 4833522.0, 0.576),
    d_rec=WeibullParams(0.0, 20.25, 1.15),
    d_lse=WeibullParams(0.0, 42857.0, 1.0),
    d_scrub=WeibullParams(0.0, 160.0, 0.97),
)

DISK_C = DiskModel(
    name="diskC",
    capacity=288 * GB,
    d_df=WeibullParams(0.0, 1058364.0, 0.721),
    d_rec=WeibullParams(0.0, 6.75, 1.4),
    d_lse=WeibullParams(0.0, 50254.0, 1.0),
    d_scrub=WeibullParams(0.0, 124.0, 2.1),
)

BUILTIN_DISKS = {d.name: d for d in (DISK_A, DISK_B, DISK_C)}

# Parameters used by the published RAID5 cross-validation runs (scrub eta is
# swept over {336, 168, 48, 12} there).
ELERATH_DISK = DiskModel(
    name="elerath",
    capacity=1 * TB,
    d_df=WeibullParams(0.0, 461386.0, 1.12),
    d_rec=WeibullParams(6.0, 12.0, 2.0),
    d_lse=WeibullParams(0.0, 9259.0, 1.0),
    d_scrub=WeibullParams(6.0, 168.0, 3.0),
)


def with_scrub_eta(disk: DiskModel, eta: float) -> DiskModel:
    return replace(disk, d_scrub=replace(disk.d_scrub, eta=eta))


def raid5(n: int, m: int = 1, chunk_size: int = 16384) -> CodeConfig:
    return CodeConfig(m=m, n=n, r=1, s=0, chunk_size=chunk_size)


def raid6(n: int, m: int = 1, chunk_size: int = 16384) -> CodeConfig:
    return CodeConfig(m=m, n=n, r=2, s=0, chunk_size=chunk_size)


def raid1(chunk_size: int = 16384) -> CodeConfig:
    return CodeConfig(m=1, n=2, r=1, s=0, chunk_size=chunk_size)


def erf(code: CodeConfig) -> float:
    """Effective replication factor: physical over usable capacity."""
    usable_symbols = code.m * (code.n - code.r) - code.s
    if usable_symbols <= 0:
        raise ParameterError(f"code {code} has no usable capacity")
    return (code.m * code.n) / usable_symbols


def usable_capacity(code: CodeConfig, disk: DiskModel, n_arrays: int = 1) -> float:
    """Logical bytes: physical size divided by the effective replication factor."""
    return n_arrays * code.n * disk.capacity / erf(code)


def stripe_bytes(code: CodeConfig) -> int:
    """Physical footprint of one stripe (the unit of SDL/SDU magnitude)."""
    return code.m * code.n * code.chunk_size


def stripe_count(code: CodeConfig, disk: DiskModel, capacity_scale: int = 1) -> int:
    per_device = code.m * code.chunk_size
    return max(1, (disk.capacity // capacity_scale) // per_device)


@dataclass
class ExperimentConfig:
    name: str
    disk: DiskModel
    code: CodeConfig
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    mission_hours: float = 87600.0
    n_arrays: int = 1000
    seed: int = 0
    capacity_scale: int = 1  # 1, 64 or 16384 (downscales disk capacity only)
    confidence: float = 0.95
    out_dir: str = "."


def validate(config: ExperimentConfig) -> list:
    """Return every violated invariant as a human-readable message."""
    v = []

    def check_weibull(w: WeibullParams, where: str):
        try:
            w.validate()
        except ParameterError as exc:
            v.append(f"{where}: {exc}")

    d, c, p = config.disk, config.code, config.policy
    if d.capacity <= 0 or d.capacity % d.sector_size != 0:
        v.append(f"disk {d.name}: capacity must be a positive multiple of the sector size")
    for tag, w in (("d_df", d.d_df), ("d_rec", d.d_rec), ("d_lse", d.d_lse), ("d_scrub", d.d_scrub)):
        check_weibull(w, f"disk {d.name}.{tag}")

    if c.m < 1:
        v.append("code: rows per stripe must be >= 1")
    if c.n < 2:
        v.append("code: an array needs at least two devices")
    if not (0 <= c.r < c.n):
        v.append("code: row parities must be fewer than devices")
    if c.s < 0:
        v.append("code: global parities must be >= 0")
    if c.chunk_size <= 0:
        v.append("code: chunk size must be positive")
    if c.m * (c.n - c.r) - c.s <= 0:
        v.append("code: no usable capacity (m*(n-r) - s must be positive)")

    if not (0.0 <= p.hep <= 1.0):
        v.append(f"policy: hep must lie in [0, 1], got {p.hep}")
    if not (0.0 <= p.dos <= 1.0):
        v.append(f"policy: dos must lie in [0, 1], got {p.dos}")
    for tag, w in (("d_dr", p.d_dr), ("d_her", p.d_her), ("d_crash", p.d_crash),
                   ("d_br", p.d_br), ("d_sbr", p.d_sbr)):
        check_weibull(w, f"policy.{tag}")

    if config.mission_hours <= 0:
        v.append("mission_hours must be positive")
    if config.n_arrays < 1:
        v.append("n_arrays must be >= 1")
    if config.capacity_scale not in (1, 64, 16384):
        v.append(f"capacity_scale must be one of 1, 64, 16384, got {config.capacity_scale}")
    if config.confidence not in (0.90, 0.95, 0.99):
        v.append(f"confidence must be one of 0.90, 0.95, 0.99, got {config.confidence}")
    return v
