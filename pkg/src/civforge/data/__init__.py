"""Dataset container, schemas, CSV ingestion and standardization."""

from .dataset import ColumnKind, Dataset
from .loader import frame_to_dataset, load_csv, write_columns_csv, write_dataset_csv
from .schema import (
    ColumnRole,
    ColumnSpec,
    DatasetSchema,
    ReferenceEffect,
    format_schema,
    load_schema,
    parse_schema,
)
from .transforms import TransformRecord, standardize

__all__ = [
    "ColumnKind",
    "ColumnRole",
    "ColumnSpec",
    "Dataset",
    "DatasetSchema",
    "ReferenceEffect",
    "TransformRecord",
    "format_schema",
    "frame_to_dataset",
    "load_csv",
    "load_schema",
    "parse_schema",
    "standardize",
    "write_columns_csv",
    "write_dataset_csv",
]
