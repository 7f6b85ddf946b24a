"""Simulation and verification toolkit for the alloy-type Random Energy Model."""

from .errors import (AlloyRemError, BudgetExceeded, ConfigError, DegenerateTail,
                     DiscriminantNegative, InvalidParams, NotCovered, NotStableRegime,
                     RegimeMismatch, UnsupportedAlpha)
from .model import (ModelParams, SystemConfig, level_count, log_mean_partition, log_moment,
                    log_var_partition, mixture_cdf, sample_energies, sample_energy)
from .norm import (Normalization, RegimeTag, StableSpec, centering, log_gamma,
                   log_gamma_shifted, stable_spec_for, tail_sum, truncated_moment,
                   truncated_moment_shifted)
from .phase import (RegimeReport, Zone, ZoneReport, classify_zone, critical_betas, free_energy,
                    regime)
from .rng import RngStream
from .simulate import (ExperimentConfig, ReplicaResult, Statistic, run_experiment, shard_plan,
                       simulate_pool, simulate_replica)
from .stable import reference_quantiles, sample_stable, sample_stable_many, standardize
from .stats import hill, ks_one_sample, ks_two_sample, summarize

__version__ = "0.1.0"
