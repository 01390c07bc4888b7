"""Borrowing inputs, the prior on the power parameter, and posterior samples."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core.types import EXTERNAL, BetaParams, Dataset, PosteriorSummary, WeightedCounts
from ..errors import InputError
from ..propensity.weights import WeightedDataset


@dataclass(frozen=True)
class DeltaPrior:
    params: BetaParams = field(default_factory=lambda: BetaParams(1.0, 1.0))

    @classmethod
    def of(cls, alpha: float, beta: float) -> DeltaPrior:
        return cls(BetaParams(alpha, beta))


@dataclass(frozen=True)
class BorrowingInput:
    """The four sufficient statistics the posterior needs."""

    trial: WeightedCounts
    external: WeightedCounts

    def __post_init__(self) -> None:
        if self.trial.n_effective < 1:
            raise InputError(
                f"trial effective size must be >= 1, got {self.trial.n_effective:.3g}"
            )

    @classmethod
    def from_dataset(cls, data: Dataset, weights: np.ndarray | None = None) -> BorrowingInput:
        """Counts with the given per-patient weights; unit weights when omitted."""
        trial = data.is_trial
        external = data.source == EXTERNAL
        w = None if weights is None else np.asarray(weights, dtype=np.float64)
        return cls(
            trial=WeightedCounts.from_outcomes(
                data.outcome[trial], None if w is None else w[trial]
            ),
            external=WeightedCounts.from_outcomes(
                data.outcome[external], None if w is None else w[external]
            ),
        )

    @classmethod
    def from_weighted(cls, wd: WeightedDataset) -> BorrowingInput:
        return cls(trial=wd.trial_counts, external=wd.external_counts)

    def conditional_params(self, delta: float) -> BetaParams:
        """Beta parameters of θ given δ under a uniform prior on θ."""
        return BetaParams(
            delta * self.external.s1 + self.trial.s1 + 1.0,
            delta * self.external.s0 + self.trial.s0 + 1.0,
        )


@dataclass(frozen=True, eq=False)
class PosteriorSamples:
    theta: np.ndarray
    delta: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        if len(self.theta) != len(self.delta):
            raise InputError("theta and delta draws must have equal length")

    def __len__(self) -> int:
        return len(self.theta)

    def summarize(self) -> PosteriorSummary:
        return PosteriorSummary.from_draws(self.theta, self.delta)
