"""CSV ingestion against a DatasetSchema."""

import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd

from ..exceptions import SchemaError
from .dataset import ColumnKind, Dataset
from .schema import ColumnSpec, DatasetSchema

logger = logging.getLogger(__name__)

_MAX_REPORTED_ROWS = 20


def _read_raw(path: Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path} is empty")
    frame.columns = [str(name).strip() for name in frame.columns]
    if frame.empty:
        raise SchemaError(f"{path} has a header but no data rows")
    return frame


def _numeric(raw: pd.Series, column: ColumnSpec) -> np.ndarray:
    """Parse to float; invalid cells become NaN."""
    values = pd.to_numeric(raw.str.strip(), errors="coerce").to_numpy(dtype=np.float64)
    values[~np.isfinite(values)] = np.nan
    if column.transform == "log":
        positive = values > 0
        values = np.where(positive, np.log(np.where(positive, values, 1.0)), np.nan)
    return values


def _invalid_mask(frame: pd.DataFrame, schema: DatasetSchema) -> np.ndarray:
    invalid = np.zeros(len(frame), dtype=bool)
    for column in schema.columns:
        if column.name not in schema.required_columns():
            continue
        raw = frame[column.name]
        if column.kind is ColumnKind.CONTINUOUS or column.threshold is not None:
            invalid |= np.isnan(_numeric(raw, column))
        else:
            invalid |= (raw.str.strip() == "").to_numpy()
    return invalid


def _binary(raw: pd.Series, column: ColumnSpec) -> np.ndarray:
    if column.threshold is not None:
        values = _numeric(raw, column)
        cut = float(np.median(values)) if column.threshold == "median" else column.threshold
        coded = (values > cut).astype(np.float64)
        logger.info("binarized %s at %s", column.name, cut)
    else:
        labels = raw.str.strip()
        levels = sorted(labels.unique())
        if len(levels) != 2:
            raise SchemaError(
                f"binary column {column.name} has {len(levels)} distinct values: "
                f"{', '.join(levels[:5])}"
            )
        if column.positive is not None:
            if column.positive not in levels:
                raise SchemaError(
                    f"positive label {column.positive!r} not found in column {column.name}"
                )
            positive = column.positive
        else:
            numeric = pd.to_numeric(pd.Series(levels), errors="coerce")
            positive = levels[int(numeric.idxmax())] if numeric.notna().all() else levels[1]
        coded = (labels == positive).to_numpy(dtype=np.float64)
    if len(np.unique(coded)) != 2:
        raise SchemaError(f"binary column {column.name} does not take both values after coding")
    return coded


def _expand(raw: pd.Series, column: ColumnSpec) -> Tuple[List[str], List[np.ndarray]]:
    """One-hot encode a categorical column, dropping its first level."""
    labels = raw.str.strip()
    levels = sorted(labels.unique())
    names = [f"{column.name}={level}" for level in levels[1:]]
    return names, [(labels == level).to_numpy(dtype=np.float64) for level in levels[1:]]


def frame_to_dataset(
    frame: pd.DataFrame,
    schema: DatasetSchema,
    provenance: str = "",
    drop_invalid: bool = False,
) -> Dataset:
    """
    Type a raw string frame according to the schema.

    Args:
        frame: Frame of strings with at least the schema's columns
        schema: Dataset schema
        provenance: Source description stored on the dataset
        drop_invalid: Drop unparseable rows instead of raising

    Returns:
        Typed Dataset

    Raises:
        SchemaError: Missing columns, unparseable cells or bad binary columns
    """
    missing = [name for name in schema.required_columns() if name not in frame.columns]
    if missing:
        raise SchemaError(f"missing columns in {provenance or 'data'}: {', '.join(missing)}")
    declared = {column.name for column in schema.columns}
    extra = [name for name in frame.columns if name not in declared]
    if extra:
        logger.info("ignoring undeclared columns: %s", ", ".join(extra))

    invalid = _invalid_mask(frame, schema)
    if invalid.any():
        # Header is line 1 of the file
        lines = (np.flatnonzero(invalid) + 2).tolist()
        shown = ", ".join(str(line) for line in lines[:_MAX_REPORTED_ROWS])
        more = "" if len(lines) <= _MAX_REPORTED_ROWS else f" (+{len(lines) - _MAX_REPORTED_ROWS})"
        if not drop_invalid:
            raise SchemaError(f"unparseable values on lines {shown}{more}")
        logger.warning("dropping %d unparseable rows: lines %s%s", len(lines), shown, more)
        frame = frame.loc[~invalid].reset_index(drop=True)
        if frame.empty:
            raise SchemaError("no valid rows remain")

    names: List[str] = []
    kinds: List[str] = []
    columns: List[np.ndarray] = []
    for column in schema.covariates:
        raw = frame[column.name]
        if column.kind is ColumnKind.CONTINUOUS:
            names.append(column.name)
            kinds.append(ColumnKind.CONTINUOUS.value)
            columns.append(_numeric(raw, column))
        elif column.kind is ColumnKind.BINARY:
            names.append(column.name)
            kinds.append(ColumnKind.BINARY.value)
            columns.append(_binary(raw, column))
        else:
            expanded, values = _expand(raw, column)
            names += expanded
            kinds += [ColumnKind.BINARY.value] * len(expanded)
            columns += values

    treatment, outcome = schema.treatment, schema.outcome
    t = _binary(frame[treatment.name], treatment)
    if outcome.kind is ColumnKind.BINARY:
        y = _binary(frame[outcome.name], outcome)
    else:
        y = _numeric(frame[outcome.name], outcome)

    true_ace = None
    if schema.reference is not None and schema.reference.is_ground_truth:
        true_ace = schema.reference.value

    x = np.column_stack(columns) if columns else np.empty((len(frame), 0))
    return Dataset(
        x=x,
        columns=names,
        t=t,
        y=y,
        x_kinds=kinds,
        outcome_kind=outcome.kind.value,
        true_ace=true_ace,
        provenance=provenance,
        treatment_name=treatment.name,
        outcome_name=outcome.name,
    )


def load_csv(
    path: Union[str, Path], schema: DatasetSchema, drop_invalid: bool = False
) -> Dataset:
    """
    Load a CSV file and apply its schema.

    Args:
        path: CSV file with a header row (column order does not matter)
        schema: Dataset schema
        drop_invalid: Drop rows with unparseable cells (logged) instead of raising

    Returns:
        Typed Dataset, rows in file order

    Raises:
        SchemaError: Empty file, missing columns or unparseable cells
    """
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"data file {path} does not exist")
    frame = _read_raw(path)
    return frame_to_dataset(frame, schema, provenance=str(path), drop_invalid=drop_invalid)


def format_float(value: float) -> str:
    """Decimal text with 17 significant digits."""
    return f"{value:.17g}"


def write_dataset_csv(dataset: Dataset, path: Union[str, Path]) -> Path:
    """Write covariates, treatment (0/1 integers) and outcome to CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = dataset.to_frame()
    frame[dataset.treatment_name] = dataset.t.astype(np.int64)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def write_columns_csv(columns: Dict[str, np.ndarray], path: Union[str, Path]) -> Path:
    """Write named float columns to CSV (latents, representations)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(columns).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
