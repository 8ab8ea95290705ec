"""Experiment harness: config parsing, fleet runs, CSV/summary emission.

The config file is INI-style ``key = value`` text with ``[section]``
headers (see README for the key reference).  Results are written as

  results.csv     one row per experiment, fixed column set
  incidents.csv   per-incident detail, re-aggregatable into results.csv
  timeseries.csv  cumulative ADL/SDL/ADU/SDU counts on a 100-bucket grid
  summary.txt     plain-text table

Built-in suites reproduce the published validation and comparison
experiments; each is a named callable so the acceptance tests are one
invocation each.
"""

from __future__ import annotations

import configparser
import csv
import os
from dataclasses import dataclass, replace
from multiprocessing import Pool

from .config import (BUILTIN_DISKS, ELERATH_DISK, CodeConfig, DiskModel,
                     ExperimentConfig, PolicyConfig, raid1, raid5, raid6,
                     usable_capacity, validate, with_scrub_eta)
from .distributions import ParameterError, RandomStream, WeibullParams
from .engine import count_ddf_compatible, simulate_array
from .metrics import FleetResult, aggregate

RESULTS_COLUMNS = [
    "experiment", "disk", "code", "hep", "dos", "spare", "n_arrays",
    "mission_hours", "seed", "nomdu", "nomdu_err", "nomdl", "nomdl_err",
    "adl", "sdl", "adu", "sdu", "ddf_compat", "tdf_compat",
]

INCIDENT_COLUMNS = [
    "experiment", "array", "kind", "cause", "start", "end", "time",
    "bytes", "permanent_bytes", "data_key", "stripes",
]

TIMESERIES_BUCKETS = 100


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10e}"
    return str(x)


def default_out_dir() -> str:
    return os.environ.get("RAIDMC_OUT", ".")


# -- config file ------------------------------------------------------------

def _parse_weibull(text: str) -> WeibullParams:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ParameterError(f"expected 'gamma,eta,beta', got {text!r}")
    return WeibullParams(*parts)


def load_config(path: str) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)

    exp = cp["experiment"] if cp.has_section("experiment") else {}
    dsec = cp["disk"] if cp.has_section("disk") else {}
    if "builtin" in dsec:
        name = dsec["builtin"]
        if name == "elerath":
            disk = ELERATH_DISK
        elif name in BUILTIN_DISKS:
            disk = BUILTIN_DISKS[name]
        else:
            raise ParameterError(f"unknown builtin disk {name!r}")
        if "scrub_eta" in dsec:
            disk = with_scrub_eta(disk, float(dsec["scrub_eta"]))
    else:
        disk = DiskModel(
            name=dsec.get("name", "custom"),
            capacity=int(dsec["capacity"]),
            sector_size=int(dsec.get("sector_size", 4096)),
            d_df=_parse_weibull(dsec["d_df"]),
            d_rec=_parse_weibull(dsec["d_rec"]),
            d_lse=_parse_weibull(dsec["d_lse"]),
            d_scrub=_parse_weibull(dsec["d_scrub"]),
        )

    csec = cp["code"] if cp.has_section("code") else {}
    code = CodeConfig(
        m=int(csec.get("m", 1)),
        n=int(csec.get("n", 8)),
        r=int(csec.get("r", 1)),
        s=int(csec.get("s", 0)),
        chunk_size=int(csec.get("chunk_size", 16384)),
    )

    psec = cp["policy"] if cp.has_section("policy") else {}
    policy = PolicyConfig(
        hep=float(psec.get("hep", 0.0)),
        spare=psec.get("spare", "false").strip().lower() in ("1", "true", "yes"),
        dos=float(psec.get("dos", 0.0)),
        ignore_lse_during_rebuild=psec.get(
            "ignore_lse_during_rebuild", "true").strip().lower() in ("1", "true", "yes"),
    )
    for key in ("d_dr", "d_her", "d_crash", "d_br", "d_sbr"):
        if key in psec:
            policy = replace(policy, **{key: _parse_weibull(psec[key])})

    return ExperimentConfig(
        name=exp.get("name", os.path.splitext(os.path.basename(path))[0]),
        disk=disk, code=code, policy=policy,
        mission_hours=float(exp.get("mission_hours", 87600)),
        n_arrays=int(exp.get("n_arrays", 1000)),
        seed=int(exp.get("seed", 0)),
        capacity_scale=int(exp.get("capacity_scale", 1)),
        confidence=float(exp.get("confidence", 0.95)),
    )


# -- fleet execution ----------------------------------------------------------

def _worker(args):
    config, lo, hi = args
    out = []
    for idx in range(lo, hi):
        root = RandomStream(config.seed, idx)
        out.append(simulate_array(config.disk, config.code, config.policy,
                                  config.mission_hours, root,
                                  config.capacity_scale))
    return out


def run_fleet(config: ExperimentConfig, threads: int = 1) -> FleetResult:
    """simulate_fleet with optional process-level parallelism.

    Replica draws are addressed by (seed, array index), so the partitioning
    into workers cannot change any result; aggregation is order-independent.
    """
    problems = validate(config)
    if problems:
        raise ParameterError("; ".join(problems))
    n = config.n_arrays
    if threads <= 1:
        logs = _worker((config, 0, n))
    else:
        chunk = max(1, (n + threads * 4 - 1) // (threads * 4))
        jobs = [(config, lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        with Pool(threads) as pool:
            logs = [log for part in pool.map(_worker, jobs) for log in part]
    return aggregate(logs, config.confidence)


# -- output files ------------------------------------------------------------

def result_row(config: ExperimentConfig, fleet: FleetResult) -> dict:
    c = fleet.counts
    dl_events = c["adl"] + c["sdl"]
    return {
        "experiment": config.name,
        "disk": config.disk.name,
        "code": config.code.label,
        "hep": config.policy.hep,
        "dos": config.policy.dos,
        "spare": config.policy.spare,
        "n_arrays": config.n_arrays,
        "mission_hours": config.mission_hours,
        "seed": config.seed,
        "nomdu": fleet.nomdu,
        "nomdu_err": fleet.nomdu_err,
        "nomdl": fleet.nomdl,
        "nomdl_err": fleet.nomdl_err,
        "adl": c["adl"],
        "sdl": c["sdl"],
        "adu": c["adu"],
        "sdu": c["sdu"],
        "ddf_compat": dl_events if config.code.r == 1 else "",
        "tdf_compat": dl_events if config.code.r == 2 else "",
    }


def write_results(path: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RESULTS_COLUMNS)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in RESULTS_COLUMNS])


def write_incidents(path: str, runs) -> None:
    """runs: iterable of (config, fleet)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(INCIDENT_COLUMNS)
        for config, fleet in runs:
            for idx, log in enumerate(fleet.per_array):
                for inc in log.du:
                    w.writerow([config.name, idx, "DU", inc.cause,
                                _fmt(inc.start), _fmt(inc.end), "",
                                _fmt(inc.bytes), "", inc.data_key, ""])
                for inc in log.dl:
                    w.writerow([config.name, idx, "DL", inc.cause, "", "",
                                _fmt(inc.time), _fmt(inc.bytes),
                                _fmt(inc.permanent_bytes), "", inc.stripes])


def write_timeseries(path: str, runs) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["experiment", "bucket_end_hours",
                    "adl_cum", "sdl_cum", "adu_cum", "sdu_cum"])
        for config, fleet in runs:
            mission = config.mission_hours
            width = mission / TIMESERIES_BUCKETS
            counts = {k: [0] * TIMESERIES_BUCKETS for k in ("ADL", "SDL", "ADU", "SDU")}
            for log in fleet.per_array:
                for inc in log.dl:
                    b = min(int(inc.time / width), TIMESERIES_BUCKETS - 1)
                    counts[inc.cause][b] += 1
                for inc in log.du:
                    if inc.cause in ("ADU", "SDU"):
                        b = min(int(inc.start / width), TIMESERIES_BUCKETS - 1)
                        counts[inc.cause][b] += 1
            cum = {k: 0 for k in counts}
            for b in range(TIMESERIES_BUCKETS):
                for k in counts:
                    cum[k] += counts[k][b]
                w.writerow([config.name, _fmt((b + 1) * width),
                            cum["ADL"], cum["SDL"], cum["ADU"], cum["SDU"]])


def write_summary(path: str, rows) -> None:
    cols = ["experiment", "code", "disk", "hep", "nomdu", "nomdl", "adl",
            "sdl", "adu", "sdu"]
    with open(path, "w") as fh:
        fh.write("  ".join(f"{c:>14}" for c in cols) + "\n")
        for row in rows:
            cells = []
            for c in cols:
                val = row[c]
                cells.append(f"{val:>14.4e}" if isinstance(val, float)
                             else f"{str(val):>14}")
            fh.write("  ".join(cells) + "\n")


def emit(out_dir: str, runs) -> list:
    """Write the four output files for a list of (config, fleet) runs."""
    os.makedirs(out_dir, exist_ok=True)
    rows = [result_row(c, f) for c, f in runs]
    write_results(os.path.join(out_dir, "results.csv"), rows)
    write_incidents(os.path.join(out_dir, "incidents.csv"), runs)
    write_timeseries(os.path.join(out_dir, "timeseries.csv"), runs)
    write_summary(os.path.join(out_dir, "summary.txt"), rows)
    return rows


def run(config: ExperimentConfig, out_dir: str = None, threads: int = 1) -> FleetResult:
    """Run one experiment and write its output files."""
    fleet = run_fleet(config, threads)
    emit(out_dir or config.out_dir, [(config, fleet)])
    return fleet


# -- built-in suites -----------------------------------------------------------

ELERATH_SCRUB_ETAS = (336.0, 168.0, 48.0, 12.0)


def suite_validate_elerath_raid5(seed: int, n_arrays: int = 1000,
                                 mission: float = 8760.0, threads: int = 1):
    """First-year DDF-compatible counts for the published scrub-period sweep."""
    runs = []
    for eta in ELERATH_SCRUB_ETAS:
        cfg = ExperimentConfig(
            name=f"elerath-raid5-scrub{int(eta)}",
            disk=with_scrub_eta(ELERATH_DISK, eta), code=raid5(8),
            policy=PolicyConfig(hep=0.0), mission_hours=mission,
            n_arrays=n_arrays, seed=seed)
        runs.append((cfg, run_fleet(cfg, threads)))
    return runs


def suite_validate_elerath_raid6(seed: int, n_arrays: int = 1000,
                                 threads: int = 1):
    """Ten-year TDF-compatible counts for 14+2 arrays of the three disk models."""
    runs = []
    for name in ("diskA", "diskB", "diskC"):
        cfg = ExperimentConfig(
            name=f"elerath-raid6-{name}", disk=BUILTIN_DISKS[name],
            code=raid6(16), policy=PolicyConfig(hep=0.0),
            n_arrays=n_arrays, seed=seed)
        runs.append((cfg, run_fleet(cfg, threads)))
    return runs


HEP_SWEEP = (0.0, 1e-3, 1e-2, 1e-1)


def suite_hep_sweep(seed: int, disk_name: str = "diskA", n_arrays: int = 1000,
                    spare: bool = False, threads: int = 1):
    runs = []
    for hep in HEP_SWEEP:
        cfg = ExperimentConfig(
            name=f"hep-sweep-{disk_name}-{hep:g}{'-spare' if spare else ''}",
            disk=BUILTIN_DISKS[disk_name], code=raid5(8),
            policy=PolicyConfig(hep=hep, spare=spare),
            n_arrays=n_arrays, seed=seed)
        runs.append((cfg, run_fleet(cfg, threads)))
    return runs


def equal_capacity_configs(seed: int, hep: float, blocks: int = 1000):
    """Three fleets of identical usable capacity (21 disks' worth per block)."""
    specs = [(raid1(), 21 * blocks), (raid5(4), 7 * blocks), (raid5(8), 3 * blocks)]
    configs = []
    for code, n_arrays in specs:
        configs.append(ExperimentConfig(
            name=f"equal-capacity-{code.label}-hep{hep:g}",
            disk=BUILTIN_DISKS["diskA"], code=code,
            policy=PolicyConfig(hep=hep), n_arrays=n_arrays, seed=seed))
    u = {usable_capacity(c.code, c.disk, c.n_arrays) for c in configs}
    assert len(u) == 1, "fleets must have identical usable capacity"
    return configs


def suite_equal_capacity(seed: int, blocks: int = 1000, heps=(0.0, 1e-2),
                         threads: int = 1):
    runs = []
    for hep in heps:
        for cfg in equal_capacity_configs(seed, hep, blocks):
            runs.append((cfg, run_fleet(cfg, threads)))
    return runs


def suite_spare_policy(seed: int, n_arrays: int = 1000,
                       heps=(0.0, 1e-5, 1e-2, 1e-1), threads: int = 1):
    runs = []
    for spare in (False, True):
        for hep in heps:
            cfg = ExperimentConfig(
                name=f"spare-{'on' if spare else 'off'}-hep{hep:g}",
                disk=BUILTIN_DISKS["diskA"], code=raid5(8),
                policy=PolicyConfig(hep=hep, spare=spare),
                n_arrays=n_arrays, seed=seed)
            runs.append((cfg, run_fleet(cfg, threads)))
    return runs


PMDS_CODES = (
    raid5(8),                      # RAID5(7+1)
    raid6(9),                      # RAID6(7+2)
    CodeConfig(m=1, n=8, r=1, s=1),
    CodeConfig(m=1, n=8, r=1, s=2),
    CodeConfig(m=1, n=9, r=2, s=2),
)


def suite_pmds(seed: int, capacity_scale: int = 64, n_arrays: int = 1000,
               hep: float = 1e-3, disk_name: str = "diskA", threads: int = 1):
    """Loss/unavailability breakdown for the five compared erasure codes.

    Codes with equal device count n share all failure substreams, so ADL
    counts coincide exactly for codes with equal n and r.
    """
    runs = []
    for code in PMDS_CODES:
        cfg = ExperimentConfig(
            name=f"pmds-{code.label}-x{capacity_scale}",
            disk=BUILTIN_DISKS[disk_name], code=code,
            policy=PolicyConfig(hep=hep), n_arrays=n_arrays, seed=seed,
            capacity_scale=capacity_scale)
        runs.append((cfg, run_fleet(cfg, threads)))
    return runs


def suite_raid5_dependability(seed: int, n_arrays: int = 1000, hep: float = 1e-3,
                              threads: int = 1):
    """NOMDU/NOMDL of RAID5(7+1) fleets of the three disk models."""
    runs = []
    for name in ("diskA", "diskB", "diskC"):
        cfg = ExperimentConfig(
            name=f"raid5-{name}-hep{hep:g}", disk=BUILTIN_DISKS[name],
            code=raid5(8), policy=PolicyConfig(hep=hep),
            n_arrays=n_arrays, seed=seed)
        runs.append((cfg, run_fleet(cfg, threads)))
    return runs


SUITES = {
    "validate-elerath-raid5": suite_validate_elerath_raid5,
    "validate-elerath-raid6": suite_validate_elerath_raid6,
    "hep-sweep": suite_hep_sweep,
    "equal-capacity": suite_equal_capacity,
    "spare-policy": suite_spare_policy,
    "pmds": suite_pmds,
    "raid5-dependability": suite_raid5_dependability,
}


def run_suite(name: str, seed: int, out_dir: str, threads: int = 1, **kwargs):
    if name not in SUITES:
        raise ParameterError(
            f"unknown suite {name!r}; available: {', '.join(sorted(SUITES))}")
    runs = SUITES[name](seed=seed, threads=threads, **kwargs)
    emit(out_dir, runs)
    return runs
