"""Covariate balance diagnostics between trial and weighted external patients."""

from __future__ import annotations

import numpy as np

from ..core.types import Dataset
from ..errors import DiagnosticUnavailableError, InputError

DEFAULT_HISTOGRAM_BINS = 20


def standardized_mean_diff(data: Dataset, weights: np.ndarray) -> np.ndarray:
    """Per covariate: (weighted external mean − trial mean) / pooled sd.

    Trial weights are ignored; the trial mean is the plain mean under every
    weighting scheme. The pooled sd is unweighted, sqrt((var_trial + var_external) / 2),
    so weighted and unweighted SMDs share a denominator.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (data.n,) or np.any(~(w >= 0)):
        raise InputError("weights must be one non-negative value per patient")

    trial = data.is_trial
    if data.n_external == 0 or not np.any(w[~trial] > 0):
        raise DiagnosticUnavailableError("no external patient carries positive weight")

    x_trial = data.covariates[trial]
    x_ext = data.covariates[~trial]
    mean_trial = x_trial.mean(axis=0)
    mean_ext = np.average(x_ext, axis=0, weights=w[~trial])

    var_trial = x_trial.var(axis=0, ddof=1) if len(x_trial) > 1 else np.zeros(data.k)
    var_ext = x_ext.var(axis=0, ddof=1) if len(x_ext) > 1 else np.zeros(data.k)
    pooled = np.sqrt((var_trial + var_ext) / 2.0)

    diff = mean_ext - mean_trial
    # Constant columns have no spread to standardize by; report 0 difference
    return np.divide(diff, pooled, out=np.zeros_like(diff), where=pooled > 0)


def score_histograms(
    data: Dataset, scores: np.ndarray, bins: int = DEFAULT_HISTOGRAM_BINS
) -> dict:
    """Per-group counts of propensity scores on equal-width bins of [0, 1]."""
    edges = np.linspace(0.0, 1.0, bins + 1)
    trial = data.is_trial
    trial_counts, _ = np.histogram(scores[trial], bins=edges)
    ext_counts, _ = np.histogram(scores[~trial], bins=edges)
    return {
        "edges": edges.tolist(),
        "trial": trial_counts.tolist(),
        "external": ext_counts.tolist(),
    }
