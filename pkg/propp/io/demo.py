"""Synthetic melanoma cohort: a single-arm trial plus an expanded-access group.

Group sizes, every categorical count and the responder counts are fixed;
only ages and which patients hold which labels depend on the seed. Patients
with ECOG >= 2 or unresectable stage III exist only in the external group
and respond less often.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.stats import truncnorm

from ..core.types import Dataset
from .dataset_io import parse_csv_text
from .results import atomic_write_text

AGE_RANGE = (18.0, 90.0)
FRAIL_RESPONSE_WEIGHT = 0.5     # selection weight for frail responders, others 1
FRAIL_STAGE = "Unresectable III"
FRAIL_ECOG = ("ECOG 2", "ECOG 3")


@dataclass(frozen=True)
class CohortMarginals:
    label: str
    n: int
    age_mean: float
    age_sd: float
    sex: dict[str, int]
    stage: dict[str, int]
    ecog: dict[str, int]
    responders: int


EXTERNAL_COHORT = CohortMarginals(
    label="external",
    n=241,
    age_mean=53.0,
    age_sd=13.0,
    sex={"Female": 95, "Male": 146},
    stage={"M1a": 22, "M1b": 26, "M1c": 182, FRAIL_STAGE: 11},
    ecog={"ECOG 0": 112, "ECOG 1": 98, "ECOG 2": 30, "ECOG 3": 1},
    responders=129,
)

# Stage counts as published sum to 131; the remaining patient is placed in M1c
TRIAL_COHORT = CohortMarginals(
    label="trial",
    n=132,
    age_mean=50.0,
    age_sd=15.0,
    sex={"Female": 51, "Male": 81},
    stage={"M1a": 33, "M1b": 18, "M1c": 81, FRAIL_STAGE: 0},
    ecog={"ECOG 0": 61, "ECOG 1": 71, "ECOG 2": 0, "ECOG 3": 0},
    responders=75,
)


def _labels(counts: dict[str, int], rng: np.random.Generator) -> np.ndarray:
    values = np.repeat(list(counts), list(counts.values()))
    return rng.permutation(values)


def _cohort_frame(spec: CohortMarginals, rng: np.random.Generator) -> pd.DataFrame:
    lo, hi = AGE_RANGE
    dist = truncnorm(
        (lo - spec.age_mean) / spec.age_sd,
        (hi - spec.age_mean) / spec.age_sd,
        loc=spec.age_mean,
        scale=spec.age_sd,
    )
    age = np.round(dist.rvs(size=spec.n, random_state=rng)).astype(int)
    sex = _labels(spec.sex, rng)
    ecog = _labels(spec.ecog, rng)

    # Frail stage goes only to patients who are not frail by ECOG
    stage = np.empty(spec.n, dtype=object)
    n_frail_stage = spec.stage.get(FRAIL_STAGE, 0)
    fit_by_ecog = np.flatnonzero(~np.isin(ecog, FRAIL_ECOG))
    frail_stage_idx = rng.choice(fit_by_ecog, size=n_frail_stage, replace=False)
    stage[frail_stage_idx] = FRAIL_STAGE
    rest = np.setdiff1d(np.arange(spec.n), frail_stage_idx)
    stage[rest] = _labels({k: v for k, v in spec.stage.items() if k != FRAIL_STAGE}, rng)

    frail = np.isin(ecog, FRAIL_ECOG) | (stage == FRAIL_STAGE)
    p = np.where(frail, FRAIL_RESPONSE_WEIGHT, 1.0)
    responders = rng.choice(spec.n, size=spec.responders, replace=False, p=p / p.sum())
    outcome = np.zeros(spec.n, dtype=int)
    outcome[responders] = 1

    return pd.DataFrame({
        "source": spec.label,
        "outcome": outcome,
        "age": age,
        "sex": sex,
        "stage": stage.astype(str),
        "ecog": ecog,
    })


def generate_demo_frame(seed: int = 0) -> pd.DataFrame:
    """Trial rows first, then external rows, with categorical columns as labels."""
    rng = np.random.default_rng(seed)
    trial = _cohort_frame(TRIAL_COHORT, rng)
    external = _cohort_frame(EXTERNAL_COHORT, rng)
    return pd.concat([trial, external], ignore_index=True)


def demo_csv(frame: pd.DataFrame) -> str:
    """CSV text with categorical columns quoted, as the dataset reader expects."""
    return frame.to_csv(index=False, quoting=csv.QUOTE_NONNUMERIC)


def generate_demo_data(seed: int = 0) -> Dataset:
    return parse_csv_text(demo_csv(generate_demo_frame(seed)))


def write_demo_csv(path: str | os.PathLike, seed: int = 0) -> Path:
    return atomic_write_text(path, demo_csv(generate_demo_frame(seed)))
