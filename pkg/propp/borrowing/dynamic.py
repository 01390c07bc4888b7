"""Dynamic borrowing: modified power prior with optional propensity weights.

The joint posterior of (θ, δ) is sampled in two steps: δ from its marginal
posterior by rejection sampling with uniform proposals, then θ | δ from its
conjugate Beta conditional. With unit weights this is the plain modified
power prior; with propensity weights each external patient enters with
effective weight δ·wᵢ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from ..core.special import log_beta
from ..core.types import Dataset, PosteriorSummary
from ..errors import DomainError, InputError, SamplerDegeneracyError
from ..propensity.weights import WeightedDataset
from .base import BorrowingInput, DeltaPrior, PosteriorSamples

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 10_000
DEFAULT_GRID_SIZE = 1001
ENVELOPE_FACTOR = 1.05
DEGENERACY_PROPOSALS = 1_000_000
DEGENERACY_RATE = 1e-4
MIN_BATCH = 4096


def log_marginal_delta(
    delta: float | np.ndarray, inp: BorrowingInput, prior: DeltaPrior = DeltaPrior()
) -> float | np.ndarray:
    """Unnormalized log posterior density of δ after integrating out θ."""
    d = np.asarray(delta, dtype=np.float64)
    if np.any(~((d > 0.0) & (d < 1.0))):
        raise DomainError("delta must lie strictly inside (0, 1)")

    e1, e0 = inp.external.s1, inp.external.s0
    t1, t0 = inp.trial.s1, inp.trial.s0
    a, b = prior.params.alpha, prior.params.beta

    value = (
        log_beta(d * e1 + t1 + 1.0, d * e0 + t0 + 1.0)
        - log_beta(d * e1 + 1.0, d * e0 + 1.0)
    )
    if a != 1.0:
        value = value + (a - 1.0) * np.log(d)
    if b != 1.0:
        value = value + (b - 1.0) * np.log1p(-d)
    return float(value) if np.ndim(delta) == 0 else value


@dataclass(frozen=True, eq=False)
class DeltaGrid:
    """Marginal posterior of δ tabulated on cell midpoints of [0, 1]."""

    delta: np.ndarray
    log_density: np.ndarray
    density: np.ndarray
    cdf: np.ndarray

    @property
    def log_max(self) -> float:
        return float(np.max(self.log_density))

    @property
    def mean(self) -> float:
        return float(simpson(self.delta * self.density, x=self.delta))

    @property
    def mode(self) -> float:
        return float(self.delta[np.argmax(self.log_density)])


def delta_posterior_grid(
    inp: BorrowingInput,
    prior: DeltaPrior = DeltaPrior(),
    grid_size: int = DEFAULT_GRID_SIZE,
) -> DeltaGrid:
    if grid_size < 3:
        raise InputError(f"grid_size must be >= 3, got {grid_size}")
    grid = (np.arange(grid_size) + 0.5) / grid_size
    log_density = log_marginal_delta(grid, inp, prior)
    # Shift by the maximum before exponentiating
    shifted = np.exp(log_density - np.max(log_density))
    density = shifted / simpson(shifted, x=grid)
    cdf = cumulative_trapezoid(density, grid, initial=0.0)
    cdf = cdf / cdf[-1]
    return DeltaGrid(grid, log_density, density, cdf)


def sample_delta(
    inp: BorrowingInput,
    prior: DeltaPrior = DeltaPrior(),
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> np.ndarray:
    """Draw ``n`` values of δ by rejection from uniform proposals.

    The envelope is ``ENVELOPE_FACTOR`` times the grid maximum of the
    max-shifted density.
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    log_max = delta_posterior_grid(inp, prior, grid_size).log_max
    log_envelope = log_max + np.log(ENVELOPE_FACTOR)

    rng = np.random.default_rng(seed)
    batch = max(MIN_BATCH, 2 * n)
    accepted: list[np.ndarray] = []
    n_accepted = 0
    n_proposed = 0
    exceeded = 0

    while n_accepted < n:
        proposals = np.clip(rng.random(batch), 1e-12, 1.0 - 1e-12)
        u = rng.random(batch)
        log_ratio = log_marginal_delta(proposals, inp, prior) - log_envelope
        exceeded += int(np.sum(log_ratio > 0.0))
        keep = proposals[np.log(u) < log_ratio]
        accepted.append(keep)
        n_accepted += len(keep)
        n_proposed += batch

        if n_proposed >= DEGENERACY_PROPOSALS and n_accepted / n_proposed < DEGENERACY_RATE:
            raise SamplerDegeneracyError(
                f"acceptance rate {n_accepted / n_proposed:.2e} after {n_proposed} proposals"
            )

    if exceeded:
        logger.warning("density exceeded the rejection envelope at %d proposals", exceeded)
    logger.debug("delta sampler acceptance rate %.3f", n_accepted / n_proposed)
    return np.concatenate(accepted)[:n]


def sample_theta_given_delta(
    delta_draws: np.ndarray, inp: BorrowingInput, seed: int = 0
) -> np.ndarray:
    """One θ draw from Beta(δ·s1ᵉ + s1⁰ + 1, δ·s0ᵉ + s0⁰ + 1) per δ."""
    d = np.asarray(delta_draws, dtype=np.float64)
    if d.size == 0 or np.any(~((d >= 0.0) & (d <= 1.0))):
        raise InputError("delta draws must be a non-empty array of values in [0, 1]")
    rng = np.random.default_rng(seed)
    return rng.beta(
        d * inp.external.s1 + inp.trial.s1 + 1.0,
        d * inp.external.s0 + inp.trial.s0 + 1.0,
    )


def stream_seeds(seed: int) -> tuple[int, int]:
    """Independent seeds for the δ and θ streams of one fit."""
    if seed < 0:
        raise InputError(f"seed must be >= 0, got {seed}")
    delta_seed, theta_seed = np.random.SeedSequence(seed).generate_state(2)
    return int(delta_seed), int(theta_seed)


def fit_dynamic(
    inp: BorrowingInput,
    prior: DeltaPrior = DeltaPrior(),
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> tuple[PosteriorSamples, PosteriorSummary]:
    delta_seed, theta_seed = stream_seeds(seed)
    delta = sample_delta(inp, prior, n, delta_seed, grid_size)
    theta = sample_theta_given_delta(delta, inp, theta_seed)
    samples = PosteriorSamples(theta=theta, delta=delta, seed=seed)
    return samples, samples.summarize()


def fit_propp(
    wd: WeightedDataset,
    prior: DeltaPrior = DeltaPrior(),
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> tuple[PosteriorSamples, PosteriorSummary]:
    """Propensity-weighted modified power prior."""
    if not wd.is_trial_capped:
        logger.warning(
            "%s weights leave trial weights != 1 or external weights > 1; "
            "posterior precision may be overstated", wd.scheme.label,
        )
    return fit_dynamic(BorrowingInput.from_weighted(wd), prior, n, seed, grid_size)


def fit_mpp(
    data: Dataset,
    prior: DeltaPrior = DeltaPrior(),
    n: int = DEFAULT_SAMPLES,
    seed: int = 0,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> tuple[PosteriorSamples, PosteriorSummary]:
    """Modified power prior: every external patient carries weight 1."""
    return fit_dynamic(BorrowingInput.from_dataset(data), prior, n, seed, grid_size)
