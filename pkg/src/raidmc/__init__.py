"""Monte Carlo dependability simulator for RAID and PMDS disk arrays.

Quantifies normalized data unavailability (NOMDU) and data loss (NOMDL) of
redundant disk arrays under operational disk failures, latent sector errors,
scrubbing, incorrect-disk-replacement human errors, spare-disk fail-over
policies and backup survivability, with an analytic Markov cross-check.
"""

from .conditions import ADL, ADU, SDL, SDU, ArrayState, classify, oracle_classify
from .config import (BUILTIN_DISKS, DISK_A, DISK_B, DISK_C, ELERATH_DISK,
                     CodeConfig, DiskModel, ExperimentConfig, PolicyConfig,
                     erf, raid1, raid5, raid6, usable_capacity, validate)
from .distributions import (ParameterError, RandomStream, WeibullParams,
                            match_exponential_rate, sample_uniform,
                            sample_weibull, weibull_cdf, weibull_mean)
from .engine import (DLIncident, DUIncident, IncidentLog,
                     count_ddf_compatible, simulate_array, simulate_fleet)
from .markov import MarkovSpec, build_raid5_markov, markov_metrics, transient_solve
from .metrics import (FleetResult, aggregate, apply_dos, mc_error,
                      nomdl_incident, nomdu_incident)

__version__ = "0.1.0"
