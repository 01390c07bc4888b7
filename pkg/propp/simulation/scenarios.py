"""Simulation scenarios: covariate and outcome data-generating process."""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.special import expit

from ..core.types import EXTERNAL, TRIAL, Dataset
from ..errors import InputError

TRUE_RATE_DRAWS = 1_000_000
TRUE_RATE_SEED = 1_312_025


class Scenario(str, Enum):
    DRIFT = "drift"                 # outcome shift on the logit scale, same covariates
    MIXTURE = "mixture"             # external covariates half from the trial distribution
    NOMIXTURE = "nomixture"         # external covariates all from the shifted distribution
    SUPERFLUOUS = "superfluous"     # mixture with covariates that drive allocation only


class Setting(str, Enum):
    EQUAL = "equal"
    LARGE_EXTERNAL = "large-external"
    LARGE_TRIAL = "large-trial"
    MANY_COVARIATES = "many-covariates"


# (n_trial, n_external, k)
SETTING_SIZES: dict[Setting, tuple[int, int, int]] = {
    Setting.EQUAL: (400, 400, 5),
    Setting.LARGE_EXTERNAL: (400, 2000, 5),
    Setting.LARGE_TRIAL: (400, 200, 5),
    Setting.MANY_COVARIATES: (400, 400, 10),
}

DEFAULT_METHODS = ("ignore", "pool", "mpp", "propp", "wang10", "wang20")
DEFAULT_GRID = tuple(np.linspace(-0.5, 0.5, 9).tolist())


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation cell, minus the grid value.

    Hashable so the true trial rate can be cached per configuration. The
    grid value replaces ``eta`` for the drift scenario and ``mu_e`` otherwise.
    """

    scenario: Scenario
    setting: Setting
    n_trial: int
    n_external: int
    k: int
    beta: tuple[float, ...]
    beta0: float = 0.0
    eta: float = 0.0
    psi: float = 0.5
    mu0: float = 0.0
    sigma0: float = 1.0
    mu_e: float = 0.0
    sigma_e: float = 1.0
    replicates: int = 1000
    methods: tuple[str, ...] = DEFAULT_METHODS
    seed: int = 0
    n_samples: int = 10_000
    n_superfluous: int = 0
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        expected = SETTING_SIZES[self.setting]
        if (self.n_trial, self.n_external, self.k) != expected:
            raise InputError(
                f"setting {self.setting.value} fixes (n_trial, n_external, k) = {expected}, "
                f"got {(self.n_trial, self.n_external, self.k)}"
            )
        if len(self.beta) != self.k:
            raise InputError(f"beta has {len(self.beta)} entries for k={self.k}")
        if not 0.0 <= self.psi <= 1.0:
            raise InputError(f"psi must lie in [0, 1], got {self.psi}")
        if self.sigma0 <= 0 or self.sigma_e <= 0:
            raise InputError("covariate standard deviations must be > 0")
        if self.replicates < 1 or self.n_samples < 1:
            raise InputError("replicates and n_samples must be >= 1")
        if self.seed < 0:
            raise InputError(f"seed must be >= 0, got {self.seed}")
        if not 0 <= self.n_superfluous < self.k:
            raise InputError(f"n_superfluous must lie in [0, {self.k - 1}]")
        if not self.methods:
            raise InputError("at least one method is required")

    @classmethod
    def build(
        cls, scenario: Scenario | str, setting: Setting | str = Setting.EQUAL, **overrides
    ) -> ScenarioConfig:
        """Scenario and setting defaults, then ``overrides`` on top."""
        try:
            scenario = Scenario(scenario)
            setting = Setting(setting)
        except ValueError as exc:
            raise InputError(str(exc)) from None

        n_trial, n_external, k = SETTING_SIZES[setting]
        params: dict = dict(n_trial=n_trial, n_external=n_external, k=k)
        if scenario is Scenario.DRIFT:
            # Same covariate distribution and no covariate effect on the outcome
            params.update(psi=1.0, beta=(0.0,) * k)
        elif scenario is Scenario.NOMIXTURE:
            params.update(psi=0.0, beta=(0.1,) * k)
        elif scenario is Scenario.SUPERFLUOUS:
            params.update(psi=0.5, beta=(0.1,) * k, n_superfluous=1)
        else:
            params.update(psi=0.5, beta=(0.1,) * k)

        params.update(overrides)
        if "beta" in params:
            params["beta"] = tuple(float(b) for b in params["beta"])
        params["methods"] = tuple(params.get("methods", DEFAULT_METHODS))
        m = params.get("n_superfluous", 0)
        if m and "beta" not in overrides:
            params["beta"] = superfluous_beta(params["beta"], m)
        return cls(scenario=scenario, setting=setting, **params)

    @property
    def grid_variable(self) -> str:
        return "eta" if self.scenario is Scenario.DRIFT else "mu_e"

    def at(self, grid_value: float) -> ScenarioConfig:
        """This configuration with the grid variable set to ``grid_value``."""
        return replace(self, **{self.grid_variable: float(grid_value)})

    def describe(self) -> str:
        return self.label or f"{self.scenario.value}/{self.setting.value}"


def superfluous_beta(beta: tuple[float, ...], m: int) -> tuple[float, ...]:
    """Zero the first ``m`` coefficients, spreading their sum over the rest."""
    k = len(beta)
    if not 0 <= m < k:
        raise InputError(f"cannot zero {m} of {k} coefficients")
    total = sum(beta)
    return (0.0,) * m + (total / (k - m),) * (k - m)


def generate_dataset(cfg: ScenarioConfig, grid_value: float, rng: np.random.Generator) -> Dataset:
    """Trial patients first, then external patients."""
    cell = cfg.at(grid_value)
    n0, ne, k = cell.n_trial, cell.n_external, cell.k

    x_trial = rng.normal(cell.mu0, cell.sigma0, size=(n0, k))
    from_trial = rng.random(ne) < cell.psi
    x_same = rng.normal(cell.mu0, cell.sigma0, size=(ne, k))
    x_shifted = rng.normal(cell.mu_e, cell.sigma_e, size=(ne, k))
    x_ext = np.where(from_trial[:, None], x_same, x_shifted)

    covariates = np.vstack([x_trial, x_ext])
    source = np.concatenate([np.full(n0, TRIAL), np.full(ne, EXTERNAL)])
    linear = cell.beta0 + covariates @ np.asarray(cell.beta) + cell.eta * (source == TRIAL)
    outcome = (rng.random(n0 + ne) < expit(linear)).astype(np.int8)
    return Dataset(source=source, outcome=outcome, covariates=covariates)


@functools.lru_cache(maxsize=256)
def _expected_rate(beta0: float, eta: float, lp_mean: float, lp_sd: float) -> float:
    # βᵀX is Normal(μ₀·Σβ, σ₀²·‖β‖²); antithetic pairs around its mean
    rng = np.random.default_rng(TRUE_RATE_SEED)
    z = rng.standard_normal(TRUE_RATE_DRAWS // 2)
    offset = beta0 + eta + lp_mean
    values = np.concatenate([expit(offset + lp_sd * z), expit(offset - lp_sd * z)])
    return float(np.mean(values))


def true_trial_rate(cfg: ScenarioConfig, grid_value: float) -> float:
    """E[expit(β₀ + βᵀX + η)] for X ~ Normal(μ₀, σ₀² I), by Monte Carlo."""
    cell = cfg.at(grid_value)
    beta = np.asarray(cell.beta)
    return _expected_rate(
        float(cell.beta0),
        float(cell.eta),
        float(cell.mu0 * beta.sum()),
        float(cell.sigma0 * np.linalg.norm(beta)),
    )
