"""Pipeline: dataset -> propensity model -> weights -> posterior -> result document."""

from __future__ import annotations

import logging
import time

import numpy as np

from .borrowing.base import BorrowingInput
from .borrowing.conjugate import fit_external_only, fit_fixed_power, fit_ignore, fit_pooled
from .borrowing.dynamic import delta_posterior_grid, fit_mpp, fit_propp
from .borrowing.wang import fit_wang_stratified, stratify
from .config import AnalysisConfig, MethodSpec
from .core.types import Dataset, PosteriorSummary
from .errors import DiagnosticUnavailableError
from .io.results import ResultDocument
from .propensity.balance import score_histograms, standardized_mean_diff
from .propensity.model import fit_propensity
from .propensity.weights import WeightedDataset, compute_weights, weight_dataset

logger = logging.getLogger(__name__)


def entropy_seed() -> int:
    """A fresh non-negative 32-bit seed from system entropy."""
    return int(np.random.SeedSequence().generate_state(1)[0])


class AnalysisPipeline:
    """Runs one configured analysis on a dataset.

    Usage::

        pipeline = AnalysisPipeline(AnalysisConfig(method="propp", seed=7))
        document = pipeline.run(data)
    """

    def __init__(self, config: AnalysisConfig | None = None, record_timing: bool = False):
        config = config or AnalysisConfig()
        if config.seed is None:
            config = config.with_seed(entropy_seed())
            logger.info("no seed given; using %d", config.seed)
        self.config = config
        self.spec: MethodSpec = config.method_spec()
        self.record_timing = record_timing
        self._timing: dict[str, float] = {}

    def _timed(self, key: str, start: float) -> None:
        self._timing[key] = time.perf_counter() - start

    def _weigh(self, data: Dataset) -> tuple[WeightedDataset, dict]:
        c = self.config
        start = time.perf_counter()
        model = fit_propensity(data, ridge=c.ridge, tol=c.tol, max_iter=c.max_iter)
        wd = weight_dataset(data, model, c.scheme(), c.weight_floor)
        self._timed("propensity", start)
        return wd, self._propensity_diagnostics(wd, model)

    def _propensity_diagnostics(self, wd: WeightedDataset, model) -> dict:
        data = wd.dataset
        external = ~data.is_trial
        w_ext = wd.weights[external]
        unfloored = compute_weights(wd.scores, data.source, wd.scheme)[external]

        diagnostics = {
            "model": {
                "converged": model.converged,
                "iterations": model.iterations,
                "gradient_norm": model.gradient_norm,
                "intercept": model.intercept,
                "coefficients": dict(zip(data.covariate_names, model.coefficients.tolist())),
            },
            "weight_scheme": wd.scheme.label,
            "score_histogram": score_histograms(data, wd.scores),
            "external_weights": {
                "sum": float(w_ext.sum()),
                "min": float(w_ext.min()) if w_ext.size else None,
                "median": float(np.median(w_ext)) if w_ext.size else None,
                "max": float(w_ext.max()) if w_ext.size else None,
                "zero": int(np.sum(w_ext == 0.0)),
                "floored": int(np.sum((w_ext == 0.0) & (unfloored > 0.0))),
            },
        }
        for key, weights in (("smd_unweighted", np.ones(data.n)), ("smd_weighted", wd.weights)):
            try:
                smd = standardized_mean_diff(data, weights)
                diagnostics[key] = dict(zip(data.covariate_names, smd.tolist()))
            except DiagnosticUnavailableError as exc:
                logger.warning("%s unavailable: %s", key, exc)
                diagnostics[key] = None
        return diagnostics

    def _fit_method(self, data: Dataset, diagnostics: dict) -> PosteriorSummary:
        c = self.config
        kind = self.spec.kind
        if kind == "ignore":
            return fit_ignore(data)
        if kind == "pool":
            return fit_pooled(data)
        if kind == "fixed":
            return fit_fixed_power(data, self.spec.value)
        if kind == "mpp":
            grid = delta_posterior_grid(BorrowingInput.from_dataset(data), c.prior(), c.grid_size)
            diagnostics["delta_posterior"] = {"mean": grid.mean, "mode": grid.mode}
            _, summary = fit_mpp(data, c.prior(), c.n_samples, c.seed, c.grid_size)
            return summary

        wd, propensity = self._weigh(data)
        diagnostics["propensity"] = propensity
        if kind == "propp":
            grid = delta_posterior_grid(BorrowingInput.from_weighted(wd), c.prior(), c.grid_size)
            diagnostics["delta_posterior"] = {"mean": grid.mean, "mode": grid.mode}
            _, summary = fit_propp(wd, c.prior(), c.n_samples, c.seed, c.grid_size)
            return summary

        plan = stratify(data, wd.scores, c.n_strata, self.spec.value)
        diagnostics["strata"] = plan.to_dict()
        return fit_wang_stratified(
            data, wd.scores, c.n_strata, self.spec.value, seed=c.seed, n_draws=c.n_samples
        )

    def run(self, data: Dataset) -> ResultDocument:
        start = time.perf_counter()
        posteriors = {"trial_only": fit_ignore(data)}
        if data.n_external > 0:
            posteriors["external_only"] = fit_external_only(data)

        diagnostics: dict = {}
        method_start = time.perf_counter()
        posteriors[str(self.spec)] = self._fit_method(data, diagnostics)
        self._timed("method", method_start)
        self._timed("total", start)
        logger.info("analysis finished in %.3fs", self._timing["total"])

        trial = data.is_trial
        return ResultDocument(
            config=self.config.to_dict(),
            posteriors=posteriors,
            diagnostics=diagnostics,
            dataset={
                "n_trial": data.n_trial,
                "n_external": data.n_external,
                "trial_responders": int(data.outcome[trial].sum()),
                "external_responders": int(data.outcome[~trial].sum()),
                "covariates": list(data.covariate_names),
            },
            timing=dict(self._timing) if self.record_timing else None,
        )
