"""Propensity model: ridge-penalized logistic regression for Pr(trial | covariates)."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..core.types import Dataset
from ..errors import InputError

logger = logging.getLogger(__name__)

DEFAULT_RIDGE = 1e-4
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100
MAX_STEP_HALVINGS = 30

_SCORE_FLOOR = np.finfo(np.float64).tiny
_SCORE_CEIL = 1.0 - np.finfo(np.float64).epsneg


@dataclass(frozen=True, eq=False)
class PropensityModel:
    """Fitted logistic model on standardized covariates.

    ``coefficients`` act on ``(x - covariate_means) / covariate_sds``; the
    ridge penalty applies to them but not to ``intercept``.
    """

    intercept: float
    coefficients: np.ndarray
    covariate_means: np.ndarray
    covariate_sds: np.ndarray
    ridge: float
    converged: bool
    iterations: int
    gradient_norm: float

    @property
    def k(self) -> int:
        return len(self.coefficients)

    def predict(self, data: Dataset) -> np.ndarray:
        return predict_scores(self, data)


def _standardize(covariates: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    means = covariates.mean(axis=0)
    sds = covariates.std(axis=0)
    constant = ~(sds > 0)
    if np.any(constant):
        logger.warning("%d constant covariate column(s); left unscaled", int(constant.sum()))
        sds = np.where(constant, 1.0, sds)
    return means, sds


def _penalized_loglik(
    design: np.ndarray, z: np.ndarray, params: np.ndarray, ridge: float
) -> float:
    eta = design @ params
    return float(np.sum(z * eta - np.logaddexp(0.0, eta)) - 0.5 * ridge * np.sum(params[1:] ** 2))


def fit_propensity(
    data: Dataset,
    ridge: float = DEFAULT_RIDGE,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> PropensityModel:
    """Fit λ(x) = Pr(Z = 1 | X = x) by Newton–Raphson with step halving.

    Returns the last iterate with ``converged=False`` when the gradient
    max-norm does not drop below ``tol`` within ``max_iter`` iterations.
    """
    if ridge < 0 or tol <= 0 or max_iter < 1:
        raise InputError(f"invalid fit settings ridge={ridge}, tol={tol}, max_iter={max_iter}")
    if data.n_external < 1:
        raise InputError("propensity fit needs at least one external patient")

    means, sds = _standardize(data.covariates)
    design = np.column_stack([np.ones(data.n), (data.covariates - means) / sds])
    z = data.is_trial.astype(np.float64)
    penalty = np.full(design.shape[1], ridge)
    penalty[0] = 0.0

    params = np.zeros(design.shape[1])
    # Intercept-only start at the marginal log-odds
    params[0] = np.log(data.n_trial / data.n_external)
    loglik = _penalized_loglik(design, z, params, ridge)

    converged = False
    grad_norm = np.inf
    iteration = 0
    for iteration in range(1, max_iter + 1):
        p = expit(design @ params)
        grad = design.T @ (z - p) - penalty * params
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm < tol:
            converged = True
            iteration -= 1
            break

        info = (design * (p * (1.0 - p))[:, None]).T @ design + np.diag(penalty)
        try:
            step = np.linalg.solve(info, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(info, grad, rcond=None)[0]

        scale = 1.0
        for _ in range(MAX_STEP_HALVINGS):
            candidate = params + scale * step
            cand_loglik = _penalized_loglik(design, z, candidate, ridge)
            if cand_loglik >= loglik:
                break
            scale *= 0.5
        params, loglik = candidate, cand_loglik
    else:
        p = expit(design @ params)
        grad = design.T @ (z - p) - penalty * params
        grad_norm = float(np.max(np.abs(grad)))
        converged = grad_norm < tol

    if converged:
        logger.debug("propensity fit converged in %d iterations", iteration)
    else:
        logger.warning(
            "propensity fit did not converge after %d iterations (gradient max-norm %.3g)",
            max_iter, grad_norm,
        )

    return PropensityModel(
        intercept=float(params[0]),
        coefficients=params[1:].copy(),
        covariate_means=means,
        covariate_sds=sds,
        ridge=ridge,
        converged=converged,
        iterations=iteration,
        gradient_norm=grad_norm,
    )


def predict_scores(model: PropensityModel, data: Dataset) -> np.ndarray:
    """λᵢ = expit(intercept + coefficients · standardized xᵢ), kept inside (0, 1)."""
    if data.k != model.k:
        raise InputError(f"model expects {model.k} covariates, dataset has {data.k}")
    standardized = (data.covariates - model.covariate_means) / model.covariate_sds
    scores = expit(model.intercept + standardized @ model.coefficients)
    return np.clip(scores, _SCORE_FLOOR, _SCORE_CEIL)
