"""CSV, Markdown and per-cell JSON output for benchmark reports."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from ..data.loader import format_float
from .runner import AggregateRow, BenchmarkReport

logger = logging.getLogger(__name__)

FORMATS = ("csv", "markdown", "cells")

REPORT_COLUMNS = ["method", "setting", "mean", "std", "n_reps", "seconds"]
REFERENCE_COLUMNS = ["reference_lo", "reference_hi", "in_interval"]
REPLICATION_COLUMNS = [
    "method",
    "setting",
    "replication",
    "seed",
    "estimate",
    "epsilon_ace",
    "first_stage_f",
    "seconds",
    "in_interval",
    "error",
]

METHOD_LABELS = {"civvae": "CIV.VAE", "oracle_2sls": "Oracle 2SLS", "naive_ols": "Naive OLS"}


def format_cell(value: Any) -> str:
    """Text for one CSV field: blank for None, 17 significant digits for floats."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _write_csv(rows: List[Dict[str, Any]], columns: List[str], path: Path) -> Path:
    frame = pd.DataFrame(
        [[format_cell(row.get(column)) for column in columns] for row in rows],
        columns=columns,
        dtype=str,
    )
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def report_rows(report: BenchmarkReport) -> List[Dict[str, Any]]:
    """Aggregate rows as dictionaries (the contents of report.csv)."""
    rows = []
    for row in report.aggregates():
        entry = {
            "method": row.method,
            "setting": row.setting,
            "mean": row.mean,
            "std": row.std,
            "n_reps": row.n_reps,
            "seconds": row.seconds if report.record_timing else None,
        }
        if report.mode == "real":
            entry.update(
                reference_lo=row.reference_lo,
                reference_hi=row.reference_hi,
                in_interval=row.in_interval,
            )
        rows.append(entry)
    return rows


def write_report_csv(report: BenchmarkReport, path: Union[str, Path]) -> Path:
    """Aggregates; header only when the report has no cells."""
    columns = REPORT_COLUMNS + (REFERENCE_COLUMNS if report.mode == "real" else [])
    return _write_csv(report_rows(report), columns, Path(path))


def write_replications_csv(report: BenchmarkReport, path: Union[str, Path]) -> Path:
    """One row per cell, in report order."""
    rows = [cell.to_dict() for cell in report.cells]
    if not report.record_timing:
        for row in rows:
            row["seconds"] = None
    return _write_csv(rows, REPLICATION_COLUMNS, Path(path))


def _mean_std(row: AggregateRow) -> str:
    if row.n_reps == 0:
        return "failed"
    if math.isnan(row.std):
        return f"{row.mean:.4f}"
    return f"{row.mean:.4f}±{row.std:.4f}"


def _table(header: Sequence[str], body: List[List[str]]) -> List[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(cells) + " |" for cells in body]
    return lines


def format_markdown(report: BenchmarkReport) -> str:
    """
    Methods as rows and settings as columns.

    Synthetic reports show epsilon_ace as mean±std per sample size; real
    reports show the estimate per dataset with the reference interval and
    whether the estimate lies inside it.
    """
    rows = {(row.method, row.setting): row for row in report.aggregates()}
    if report.mode == "synthetic":
        title = "# Estimation error (epsilon_ace, mean±std)"
        header = ["Method"] + [f"n={setting}" for setting in report.settings]
    else:
        title = "# Estimated causal effects"
        header = ["Method"] + list(report.settings)

    body = []
    for method in report.methods:
        line = [METHOD_LABELS.get(method, method)]
        for setting in report.settings:
            row = rows.get((method, setting))
            if row is None:
                line.append("-")
            elif row.in_interval is not None:
                line.append(_mean_std(row) + (" (in)" if row.in_interval else " (out)"))
            else:
                line.append(_mean_std(row))
        body.append(line)

    if report.mode == "real":
        intervals = []
        for setting in report.settings:
            reference = next(
                (r for (_, s), r in rows.items() if s == setting and r.reference_lo is not None),
                None,
            )
            if reference is None:
                intervals.append("-")
            else:
                intervals.append(f"({reference.reference_lo:g}, {reference.reference_hi:g})")
        body.append(["Reference interval"] + intervals)

    lines = [title, ""] + _table(header, body)
    replications = sorted({cell.replication for cell in report.cells})
    lines += ["", f"Replications per cell: {len(replications)}"]

    failed = report.failures()
    if failed:
        lines += ["", "## Failed cells", ""]
        lines += [f"- {cell.key}: {cell.error}" for cell in failed]
    return "\n".join(lines) + "\n"


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, list):
        return [_json_safe(item) for item in value]
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    return value


def write_cell_logs(report: BenchmarkReport, directory: Union[str, Path]) -> List[Path]:
    """cells/<method>_<setting>_r<rep>.json with seed, estimate, error and loss trace."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for cell in report.cells:
        payload = cell.to_dict()
        if not report.record_timing:
            payload["seconds"] = None
        path = directory / f"{cell.key}.json"
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(_json_safe(payload), handle, indent=2, sort_keys=True)
            handle.write("\n")
        paths.append(path)
    return paths


def emit_report(
    report: BenchmarkReport,
    output_dir: Union[str, Path],
    formats: Optional[Sequence[str]] = None,
) -> Dict[str, Path]:
    """
    Write the report files under output_dir.

    Args:
        report: Complete or partial report
        output_dir: Created if missing
        formats: Any of "csv" (report.csv and replications.csv), "markdown"
            (report.md) and "cells" (per-cell JSON logs); all by default

    Returns:
        Mapping of output name to path

    Raises:
        ValueError: Unknown format
        OSError: The output directory is not writable
    """
    formats = list(formats or FORMATS)
    unknown = sorted(set(formats) - set(FORMATS))
    if unknown:
        raise ValueError(f"unknown report formats: {', '.join(unknown)}")

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    written: Dict[str, Path] = {}
    if "csv" in formats:
        written["report.csv"] = write_report_csv(report, output_dir / "report.csv")
        written["replications.csv"] = write_replications_csv(
            report, output_dir / "replications.csv"
        )
    if "markdown" in formats:
        path = output_dir / "report.md"
        path.write_text(format_markdown(report), encoding="utf-8")
        written["report.md"] = path
    if "cells" in formats:
        write_cell_logs(report, output_dir / "cells")
        written["cells"] = output_dir / "cells"
    logger.info("report written to %s", output_dir)
    return written
