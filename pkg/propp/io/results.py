"""Result documents (JSON) and simulation metrics (CSV)."""

from __future__ import annotations

import json
import os
import tempfile
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from .. import __version__
from ..core.types import PosteriorSummary

METRICS_COLUMNS = ["method", "grid_value", "rmse", "type1", "failures", "replicates"]


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    """Write ``text`` to a temp file beside ``path``, then rename over it."""
    path = Path(path)
    directory = path.parent
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


@dataclass
class ResultDocument:
    """One analysis run: the effective config, posteriors and diagnostics."""

    config: dict
    posteriors: dict[str, PosteriorSummary] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    dataset: dict = field(default_factory=dict)
    timing: dict | None = None       # seconds; left out unless recorded

    def to_dict(self) -> dict:
        out = {
            "version": __version__,
            "config": self.config,
            "dataset": self.dataset,
            "posteriors": {name: s.to_dict() for name, s in self.posteriors.items()},
            "diagnostics": self.diagnostics,
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def write(self, path: str | os.PathLike) -> Path:
        return atomic_write_text(path, self.to_json())


def metrics_frame(rows: Sequence, **context) -> pd.DataFrame:
    """MetricsRows as a DataFrame with a fixed column order.

    Keyword ``context`` values (scenario, setting, ...) become leading columns.
    """
    df = pd.DataFrame([r.to_dict() for r in rows], columns=METRICS_COLUMNS)
    for i, (key, value) in enumerate(context.items()):
        df.insert(i, key, value)
    return df


def metrics_csv(rows: Sequence, **context) -> str:
    return metrics_frame(rows, **context).to_csv(index=False, float_format="%.10g")


def write_metrics_csv(rows: Sequence, path: str | os.PathLike, **context) -> Path:
    """One CSV row per method and grid value."""
    return atomic_write_text(path, metrics_csv(rows, **context))
