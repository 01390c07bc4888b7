"""Borrowing methods compared in the simulation study."""

from __future__ import annotations

import zlib
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..borrowing.base import DeltaPrior
from ..borrowing.conjugate import fit_ignore, fit_pooled
from ..borrowing.dynamic import fit_mpp, fit_propp
from ..borrowing.wang import fit_wang_stratified
from ..core.types import Dataset, PosteriorSummary
from ..errors import InputError
from ..propensity.model import fit_propensity
from ..propensity.weights import WeightedDataset, WeightScheme, weight_dataset


@dataclass
class ReplicateContext:
    """One simulated dataset plus the propensity fit shared by the methods that need it."""

    data: Dataset
    seed: int
    n_samples: int = 10_000

    @cached_property
    def weighted(self) -> WeightedDataset:
        model = fit_propensity(self.data)
        return weight_dataset(self.data, model, WeightScheme())

    def seed_for(self, name: str) -> int:
        seq = np.random.SeedSequence([self.seed, zlib.crc32(name.encode())])
        return int(seq.generate_state(1)[0])


class BorrowingMethod(ABC):
    """Base class for all methods run per replicate."""

    name: str

    @abstractmethod
    def fit(self, ctx: ReplicateContext) -> PosteriorSummary:
        ...

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


class IgnoreMethod(BorrowingMethod):
    name = "ignore"

    def fit(self, ctx: ReplicateContext) -> PosteriorSummary:
        return fit_ignore(ctx.data)


class PoolMethod(BorrowingMethod):
    name = "pool"

    def fit(self, ctx: ReplicateContext) -> PosteriorSummary:
        return fit_pooled(ctx.data)


class MppMethod(BorrowingMethod):
    name = "mpp"

    def fit(self, ctx: ReplicateContext) -> PosteriorSummary:
        _, summary = fit_mpp(ctx.data, DeltaPrior(), ctx.n_samples, ctx.seed_for(self.name))
        return summary


class ProppMethod(BorrowingMethod):
    name = "propp"

    def fit(self, ctx: ReplicateContext) -> PosteriorSummary:
        _, summary = fit_propp(ctx.weighted, DeltaPrior(), ctx.n_samples, ctx.seed_for(self.name))
        return summary


class WangMethod(BorrowingMethod):
    """Stratified power prior borrowing at most ``fraction`` of the trial size."""

    def __init__(self, fraction: float, n_strata: int = 5):
        self.fraction = fraction
        self.n_strata = n_strata
        self.name = f"wang{round(fraction * 100)}"

    def fit(self, ctx: ReplicateContext) -> PosteriorSummary:
        return fit_wang_stratified(
            ctx.data,
            ctx.weighted.scores,
            self.n_strata,
            self.fraction,
            seed=ctx.seed_for(self.name),
        )


METHODS: dict[str, BorrowingMethod] = {
    m.name: m
    for m in (
        IgnoreMethod(),
        PoolMethod(),
        MppMethod(),
        ProppMethod(),
        WangMethod(0.10),
        WangMethod(0.20),
    )
}


def get_method(name: str) -> BorrowingMethod:
    try:
        return METHODS[name]
    except KeyError:
        raise InputError(
            f"unknown simulation method '{name}' (choose from {', '.join(METHODS)})"
        ) from None
