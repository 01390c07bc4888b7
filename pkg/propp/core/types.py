"""Domain types shared by every propp module."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, InputError
from .special import beta_quantile

TRIAL = 1
EXTERNAL = 0


@dataclass(frozen=True)
class PatientRecord:
    """One patient: source (1 = trial, 0 = external), binary outcome, covariates."""

    source: int
    outcome: int
    covariates: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.source not in (TRIAL, EXTERNAL):
            raise InputError(f"source must be 0 or 1, got {self.source!r}")
        if self.outcome not in (0, 1):
            raise InputError(f"outcome must be 0 or 1, got {self.outcome!r}")
        if not all(math.isfinite(v) for v in self.covariates):
            raise InputError("covariates must be finite")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """Patient-level data stored column-wise.

    ``source`` and ``outcome`` are int8 vectors of length N, ``covariates`` an
    (N, K) float matrix. Arrays are read-only once constructed.
    """

    source: np.ndarray
    outcome: np.ndarray
    covariates: np.ndarray
    covariate_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        raw_source = np.asarray(self.source).ravel()
        raw_outcome = np.asarray(self.outcome).ravel()
        if not np.all(np.isin(raw_source, (TRIAL, EXTERNAL))):
            raise InputError("source values must be 0 (external) or 1 (trial)")
        if not np.all(np.isin(raw_outcome, (0, 1))):
            raise InputError("outcome values must be 0 or 1")
        source = raw_source.astype(np.int8)
        outcome = raw_outcome.astype(np.int8)
        covariates = np.asarray(self.covariates, dtype=np.float64)
        if covariates.ndim == 1 and covariates.size == 0:
            covariates = covariates.reshape(len(source), 0)
        if covariates.ndim != 2 or covariates.shape[0] != len(source):
            raise InputError(
                f"covariates must be an (N, K) matrix with N={len(source)}, "
                f"got shape {covariates.shape}"
            )
        if len(outcome) != len(source):
            raise InputError("source and outcome must have equal length")
        if not np.all(np.isfinite(covariates)):
            raise InputError("covariates must be finite")
        if not np.any(source == TRIAL):
            raise InputError("dataset needs at least one trial patient")

        names = tuple(self.covariate_names) or tuple(
            f"x{j + 1}" for j in range(covariates.shape[1])
        )
        if len(names) != covariates.shape[1]:
            raise InputError(
                f"{len(names)} covariate names given for {covariates.shape[1]} columns"
            )

        object.__setattr__(self, "source", _frozen(source))
        object.__setattr__(self, "outcome", _frozen(outcome))
        object.__setattr__(self, "covariates", _frozen(covariates))
        object.__setattr__(self, "covariate_names", names)

    @classmethod
    def from_records(
        cls, records: Iterable[PatientRecord], covariate_names: Sequence[str] = ()
    ) -> Dataset:
        records = list(records)
        k = len(records[0].covariates) if records else len(covariate_names)
        if any(len(r.covariates) != k for r in records):
            raise InputError(f"every record must have exactly {k} covariates")
        return cls(
            source=np.array([r.source for r in records], dtype=np.int8),
            outcome=np.array([r.outcome for r in records], dtype=np.int8),
            covariates=np.array([r.covariates for r in records], dtype=np.float64).reshape(
                len(records), k
            ),
            covariate_names=tuple(covariate_names),
        )

    @property
    def records(self) -> list[PatientRecord]:
        return [
            PatientRecord(int(s), int(y), tuple(float(v) for v in x))
            for s, y, x in zip(self.source, self.outcome, self.covariates)
        ]

    @property
    def k(self) -> int:
        return self.covariates.shape[1]

    @property
    def n(self) -> int:
        return len(self.source)

    @property
    def is_trial(self) -> np.ndarray:
        return self.source == TRIAL

    @property
    def n_trial(self) -> int:
        return int(np.sum(self.is_trial))

    @property
    def n_external(self) -> int:
        return self.n - self.n_trial

    def same_content(self, other: Dataset) -> bool:
        """True when both datasets hold identical rows and covariate names."""
        return (
            self.covariate_names == other.covariate_names
            and np.array_equal(self.source, other.source)
            and np.array_equal(self.outcome, other.outcome)
            and np.array_equal(self.covariates, other.covariates)
        )

    def __repr__(self) -> str:
        return f"Dataset(n_trial={self.n_trial}, n_external={self.n_external}, k={self.k})"


@dataclass(frozen=True)
class WeightedCounts:
    """Weighted responder / non-responder sums for one group."""

    s1: float
    s0: float

    def __post_init__(self) -> None:
        if not (self.s1 >= 0 and self.s0 >= 0) or not math.isfinite(self.s1 + self.s0):
            raise InputError(f"weighted counts must be finite and >= 0, got ({self.s1}, {self.s0})")

    @property
    def n_effective(self) -> float:
        return self.s1 + self.s0

    @classmethod
    def from_outcomes(
        cls, outcomes: np.ndarray, weights: np.ndarray | None = None
    ) -> WeightedCounts:
        y = np.asarray(outcomes, dtype=np.float64)
        w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=np.float64)
        return cls(s1=float(np.sum(w * y)), s0=float(np.sum(w * (1.0 - y))))


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"Beta {name} must be finite and > 0, got {value!r}")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def sd(self) -> float:
        total = self.alpha + self.beta
        return math.sqrt(self.alpha * self.beta / (total * total * (total + 1.0)))


@dataclass(frozen=True)
class PosteriorSummary:
    """Posterior mean, sd and equal-tailed 95% interval for the response rate.

    ``n_samples`` is None and ``params`` is set for closed-form posteriors.
    """

    mean: float
    sd: float
    q025: float
    q975: float
    delta_mean: float | None = None
    n_samples: int | None = None
    params: BetaParams | None = field(default=None)

    @property
    def width(self) -> float:
        return self.q975 - self.q025

    def excludes(self, value: float) -> bool:
        return value < self.q025 or value > self.q975

    @classmethod
    def from_beta(cls, params: BetaParams) -> PosteriorSummary:
        return cls(
            mean=params.mean,
            sd=params.sd,
            q025=beta_quantile(params, 0.025),
            q975=beta_quantile(params, 0.975),
            params=params,
        )

    @classmethod
    def from_draws(
        cls, theta: np.ndarray, delta: np.ndarray | None = None
    ) -> PosteriorSummary:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.size == 0:
            raise InputError("cannot summarize an empty sample")
        # Linear interpolation between order statistics (type 7)
        q025, q975 = np.quantile(theta, [0.025, 0.975])
        return cls(
            mean=float(np.mean(theta)),
            sd=float(np.std(theta, ddof=1)) if theta.size > 1 else 0.0,
            q025=float(q025),
            q975=float(q975),
            delta_mean=None if delta is None else float(np.mean(delta)),
            n_samples=int(theta.size),
        )

    def to_dict(self) -> dict:
        out = {
            "mean": self.mean,
            "sd": self.sd,
            "q025": self.q025,
            "q975": self.q975,
            "delta_mean": self.delta_mean,
            "n_samples": self.n_samples,
        }
        if self.params is not None:
            out["beta_params"] = [self.params.alpha, self.params.beta]
        return out
