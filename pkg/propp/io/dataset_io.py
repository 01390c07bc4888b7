"""CSV ingestion and export of patient-level datasets.

Schema: header ``source,outcome,<covariates...>``; ``source`` is ``trial`` or
``external``, ``outcome`` is 0 or 1. Covariates written as bare decimals are
numeric; covariates written as double-quoted strings are categorical and are
one-hot expanded with levels in alphabetical order, first level dropped.
Quoted values may not contain commas or double quotes.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import re
from pathlib import Path

import numpy as np
import pandas as pd

from ..core.types import EXTERNAL, TRIAL, Dataset
from ..errors import DatasetParseError
from .results import atomic_write_text

logger = logging.getLogger(__name__)

SOURCE_LABELS = {"trial": TRIAL, "external": EXTERNAL}
REQUIRED_COLUMNS = ("source", "outcome")
RAGGED = "ragged row (field count differs from header)"


def _line(row: int) -> int:
    # Header occupies line 1
    return row + 2


def _first_bad(mask: np.ndarray) -> int:
    return int(np.flatnonzero(mask)[0])


def _unquote(values: pd.Series) -> tuple[pd.Series, np.ndarray]:
    """Cell text without surrounding quotes, and which cells were quoted."""
    text = values.str.strip()
    quoted = (text.str.len() >= 2) & text.str.startswith('"') & text.str.endswith('"')
    return text.where(~quoted, text.str.slice(1, -1)), quoted.to_numpy()


def _parse_required(cells: dict[str, pd.Series]) -> tuple[np.ndarray, np.ndarray]:
    labels = cells["source"].str.lower()
    bad = ~labels.isin(list(SOURCE_LABELS)).to_numpy()
    if bad.any():
        row = _first_bad(bad)
        raise DatasetParseError(
            f"unknown source label {cells['source'].iloc[row]!r} (expected trial or external)",
            line=_line(row), column="source",
        )
    outcome = cells["outcome"]
    bad = ~outcome.isin(["0", "1"]).to_numpy()
    if bad.any():
        row = _first_bad(bad)
        raise DatasetParseError(
            f"outcome must be 0 or 1, got {outcome.iloc[row]!r}",
            line=_line(row), column="outcome",
        )
    return labels.map(SOURCE_LABELS).to_numpy(np.int8), outcome.astype(int).to_numpy(np.int8)


def _expand_covariate(
    name: str, text: pd.Series, quoted: np.ndarray
) -> tuple[list[str], list[np.ndarray]]:
    if quoted.all():
        levels = sorted(text.unique())
        logger.debug("column %s is categorical with levels %s", name, levels)
        names = [f"{name}[{level}]" for level in levels[1:]]
        columns = [(text == level).to_numpy(np.float64) for level in levels[1:]]
        return names, columns
    if quoted.any():
        row = _first_bad(quoted)
        raise DatasetParseError(
            f"quoted value {text.iloc[row]!r} in a numeric column "
            "(quote every value of a categorical covariate)",
            line=_line(row), column=name,
        )

    numeric = pd.to_numeric(text, errors="coerce").to_numpy(np.float64)
    bad = ~np.isfinite(numeric)
    if bad.any():
        row = _first_bad(bad)
        raise DatasetParseError(
            f"covariate value {text.iloc[row]!r} is not a finite number",
            line=_line(row), column=name,
        )
    # float() parsing reads %.17g output back bit-exactly
    return [name], [text.astype(np.float64).to_numpy()]


def _read_frame(source) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            source, dtype=str, keep_default_na=False, skip_blank_lines=True,
            quoting=csv.QUOTE_NONE,
        )
    except pd.errors.EmptyDataError:
        raise DatasetParseError("file is empty", line=1) from None
    except pd.errors.ParserError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise DatasetParseError(RAGGED, line=int(match.group(1)) if match else None) from None
    if not isinstance(frame.index, pd.RangeIndex):
        # Every row one field longer than the header: the parser took an index column
        raise DatasetParseError(RAGGED, line=2)
    return frame


def read_dataset(path: str | os.PathLike) -> Dataset:
    """Parse and validate a dataset file; errors name the file line and column."""
    data = parse_frame(_read_frame(path))
    logger.info("read %s: %r", Path(path).name, data)
    return data


def parse_csv_text(text: str) -> Dataset:
    return parse_frame(_read_frame(io.StringIO(text)))


def parse_frame(frame: pd.DataFrame) -> Dataset:
    """Validate a frame of raw CSV cells (quotes still attached) laid out like the schema."""
    frame = frame.copy()
    frame.columns = [str(c).strip().strip('"') for c in frame.columns]
    for column in REQUIRED_COLUMNS:
        if column not in frame.columns:
            raise DatasetParseError(f"missing required column '{column}'", line=1, column=column)
    if frame.empty:
        raise DatasetParseError("file has a header but no rows", line=2)

    # Short rows are padded with NaN by the parser
    missing = frame.isna().to_numpy()
    if missing.any():
        row, col = np.argwhere(missing)[0]
        raise DatasetParseError(RAGGED, line=_line(int(row)), column=frame.columns[col])

    cells: dict[str, pd.Series] = {}
    quoting: dict[str, np.ndarray] = {}
    for name in frame.columns:
        text, quoted = _unquote(frame[name].astype(str))
        empty = (text == "").to_numpy()
        if empty.any():
            raise DatasetParseError("empty value", line=_line(_first_bad(empty)), column=name)
        cells[name], quoting[name] = text, quoted

    source, outcome = _parse_required(cells)

    names: list[str] = []
    columns: list[np.ndarray] = []
    for name in frame.columns:
        if name in REQUIRED_COLUMNS:
            continue
        col_names, col_values = _expand_covariate(name, cells[name], quoting[name])
        names.extend(col_names)
        columns.extend(col_values)

    covariates = (
        np.column_stack(columns) if columns else np.empty((len(frame), 0), dtype=np.float64)
    )
    return Dataset(source=source, outcome=outcome, covariates=covariates, covariate_names=names)


def dataset_frame(data: Dataset) -> pd.DataFrame:
    labels = {code: label for label, code in SOURCE_LABELS.items()}
    frame = pd.DataFrame({
        "source": [labels[int(s)] for s in data.source],
        "outcome": data.outcome.astype(int),
    })
    for j, name in enumerate(data.covariate_names):
        frame[name] = data.covariates[:, j]
    return frame


def write_dataset(data: Dataset, path: str | os.PathLike) -> Path:
    """Write numeric covariates with enough digits to read back exactly."""
    text = dataset_frame(data).to_csv(index=False, float_format="%.17g")
    return atomic_write_text(path, text)
