"""Closed-form comparators: ignore, pool, external-only and fixed power prior."""

from __future__ import annotations

from ..core.types import BetaParams, Dataset, PosteriorSummary
from ..errors import InputError
from .base import BorrowingInput


def fixed_power_params(data: Dataset, delta: float) -> BetaParams:
    if not (0.0 <= delta <= 1.0):
        raise InputError(f"power parameter must lie in [0, 1], got {delta!r}")
    return BorrowingInput.from_dataset(data).conditional_params(delta)


def fit_fixed_power(data: Dataset, delta: float) -> PosteriorSummary:
    """Beta(δ·s1ᵉ + s1⁰ + 1, δ·s0ᵉ + s0⁰ + 1) under a U(0, 1) prior on θ."""
    return PosteriorSummary.from_beta(fixed_power_params(data, delta))


def fit_ignore(data: Dataset) -> PosteriorSummary:
    if data.n_trial < 1:
        raise InputError("ignoring external data needs at least one trial patient")
    return fit_fixed_power(data, 0.0)


def fit_pooled(data: Dataset) -> PosteriorSummary:
    if data.n < 1:
        raise InputError("pooling needs at least one patient")
    return fit_fixed_power(data, 1.0)


def fit_external_only(data: Dataset) -> PosteriorSummary:
    """Posterior from the external patients alone."""
    if data.n_external < 1:
        raise InputError("dataset has no external patients")
    counts = BorrowingInput.from_dataset(data).external
    return PosteriorSummary.from_beta(BetaParams(counts.s1 + 1.0, counts.s0 + 1.0))
