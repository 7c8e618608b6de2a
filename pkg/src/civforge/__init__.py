"""civforge: conditional instrumental variable representation learning"""

__version__ = "0.1.0"

# Causal graphs and conditional-IV checks
from .graph import CausalDag, CivVerdict, d_separated, find_conditioning_set, is_civ, parse_dag

# Synthetic data
from .simulation import ScmSpec, generate

# Data ingestion
from .data import Dataset, DatasetSchema, TransformRecord, load_csv, load_schema, standardize

# Estimation
from .estimation import EstimateResult, naive_ols_ace, wald_civ

# CIV.VAE
from .model import CivVaeConfig, CivVaeTrainer, estimate_ace, extract_representations, fit_civvae

# Benchmark harness
from .benchmark import (
    BenchmarkReport,
    ExperimentConfig,
    emit_report,
    load_experiment_config,
    run_real_benchmark,
    run_synthetic_benchmark,
)

# Settings
from .settings import Settings, get_settings

__all__ = [
    # Version
    "__version__",
    # Graphs
    "CausalDag",
    "CivVerdict",
    "d_separated",
    "find_conditioning_set",
    "is_civ",
    "parse_dag",
    # Simulation
    "ScmSpec",
    "generate",
    # Data
    "Dataset",
    "DatasetSchema",
    "TransformRecord",
    "load_csv",
    "load_schema",
    "standardize",
    # Estimation
    "EstimateResult",
    "naive_ols_ace",
    "wald_civ",
    # Model
    "CivVaeConfig",
    "CivVaeTrainer",
    "estimate_ace",
    "extract_representations",
    "fit_civvae",
    # Benchmark
    "BenchmarkReport",
    "ExperimentConfig",
    "emit_report",
    "load_experiment_config",
    "run_real_benchmark",
    "run_synthetic_benchmark",
    # Settings
    "Settings",
    "get_settings",
]
