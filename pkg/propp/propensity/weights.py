"""Propensity weighting schemes and the weighted dataset they produce."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..core.types import EXTERNAL, TRIAL, Dataset, WeightedCounts
from ..errors import InputError
from .model import PropensityModel, predict_scores

logger = logging.getLogger(__name__)


class WeightVariant(Enum):
    ATE = "ate"                 # whole population
    ATTRIAL = "att"             # trial population
    ATEXTERNAL = "ate-ext"      # external population


@dataclass(frozen=True)
class WeightScheme:
    """A row of the weighting table; ``capped`` bounds external weights at 1."""

    variant: WeightVariant = WeightVariant.ATTRIAL
    capped: bool = True

    @classmethod
    def parse(cls, name: str, capped: bool = True) -> WeightScheme:
        try:
            return cls(WeightVariant(name.strip().lower()), capped)
        except ValueError:
            choices = ", ".join(v.value for v in WeightVariant)
            raise InputError(f"unknown weight scheme '{name}' (choose from {choices})") from None

    @property
    def label(self) -> str:
        return f"{self.variant.value}-{'capped' if self.capped else 'uncapped'}"


def compute_weights(
    scores: np.ndarray,
    sources: np.ndarray,
    scheme: WeightScheme = WeightScheme(),
    floor: float = 0.0,
) -> np.ndarray:
    """Per-patient weights from propensity scores.

    External weights below ``floor`` are set to 0 after capping.
    """
    lam = np.asarray(scores, dtype=np.float64)
    src = np.asarray(sources)
    if lam.shape != src.shape:
        raise InputError(f"scores and sources differ in shape: {lam.shape} vs {src.shape}")
    if np.any(~((lam > 0) & (lam < 1))):
        raise InputError("propensity scores must lie strictly inside (0, 1)")
    if floor < 0:
        raise InputError(f"weight floor must be >= 0, got {floor}")

    trial = src == TRIAL
    odds = lam / (1.0 - lam)
    weights = np.empty_like(lam)

    if scheme.variant is WeightVariant.ATE:
        weights[trial] = 1.0 / lam[trial]
        weights[~trial] = 1.0 / (1.0 - lam[~trial])
    elif scheme.variant is WeightVariant.ATTRIAL:
        weights[trial] = 1.0
        weights[~trial] = odds[~trial]
    else:
        weights[trial] = 1.0 / odds[trial]
        weights[~trial] = 1.0

    if scheme.capped:
        weights[~trial] = np.minimum(1.0, weights[~trial])
    if floor > 0:
        weights[~trial & (weights < floor)] = 0.0
    return weights


@dataclass(frozen=True, eq=False)
class WeightedDataset:
    dataset: Dataset
    scores: np.ndarray
    weights: np.ndarray
    scheme: WeightScheme = WeightScheme()

    def __post_init__(self) -> None:
        n = self.dataset.n
        if len(self.scores) != n or len(self.weights) != n:
            raise InputError("scores and weights must align with the dataset")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise InputError("weights must be finite and >= 0")

    @property
    def trial_counts(self) -> WeightedCounts:
        mask = self.dataset.is_trial
        return WeightedCounts.from_outcomes(self.dataset.outcome[mask], self.weights[mask])

    @property
    def external_counts(self) -> WeightedCounts:
        mask = self.dataset.source == EXTERNAL
        return WeightedCounts.from_outcomes(self.dataset.outcome[mask], self.weights[mask])

    @property
    def is_trial_capped(self) -> bool:
        """Trial weights all exactly 1 and external weights in [0, 1]."""
        trial = self.dataset.is_trial
        return bool(np.all(self.weights[trial] == 1.0) and np.all(self.weights[~trial] <= 1.0))

    @classmethod
    def with_unit_weights(cls, dataset: Dataset) -> WeightedDataset:
        return cls(dataset, np.full(dataset.n, 0.5), np.ones(dataset.n))


def weight_dataset(
    data: Dataset,
    model: PropensityModel,
    scheme: WeightScheme = WeightScheme(),
    floor: float = 0.0,
) -> WeightedDataset:
    scores = predict_scores(model, data)
    weights = compute_weights(scores, data.source, scheme, floor)
    external = data.source == EXTERNAL
    logger.info(
        "%s weights: external effective size %.1f of %d (%d zero)",
        scheme.label, float(weights[external].sum()), data.n_external,
        int(np.sum(weights[external] == 0.0)),
    )
    return WeightedDataset(data, scores, weights, scheme)
