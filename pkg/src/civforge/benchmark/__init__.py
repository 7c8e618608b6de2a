"""Benchmark harness: replication cells, aggregation and reports."""

from .config import (
    METHODS,
    BaselineToggles,
    ExperimentConfig,
    RealDataConfig,
    experiment_config_from_dict,
    load_experiment_config,
)
from .report import emit_report, format_markdown, write_replications_csv, write_report_csv
from .runner import (
    AggregateRow,
    BenchmarkReport,
    CellResult,
    CellTask,
    aggregate_values,
    run_benchmark,
    run_cell,
    run_real_benchmark,
    run_synthetic_benchmark,
)

__all__ = [
    "METHODS",
    "AggregateRow",
    "BaselineToggles",
    "BenchmarkReport",
    "CellResult",
    "CellTask",
    "ExperimentConfig",
    "RealDataConfig",
    "aggregate_values",
    "emit_report",
    "experiment_config_from_dict",
    "format_markdown",
    "load_experiment_config",
    "run_benchmark",
    "run_cell",
    "run_real_benchmark",
    "run_synthetic_benchmark",
    "write_replications_csv",
    "write_report_csv",
]
