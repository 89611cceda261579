"""The four Bayesian conformity measures.

Each score bundles an evaluation rule with its orientation so engines can
rank candidates without knowing which measure they were handed:

* ``ppd``   — predictive density/pmf at the outcome (conformity).
* ``bres``  — absolute deviation from the predictive mean (non-conformity).
* ``qbres`` — signed exceedance of an inner predictive quantile band
  (non-conformity; negative strictly inside the band, by design not
  clipped so the interval algebra downstream stays exact).
* ``dbres`` — absolute density gap to the predictive mode (non-conformity).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from confbayes.core import ScoreOrientation
from confbayes.models import ModelFit, ppd_map, ppd_mean, ppd_quantile

SCORE_NAMES = ("ppd", "bres", "qbres", "dbres")

_ORIENTATION = {
    "ppd": ScoreOrientation.CONFORMITY,
    "bres": ScoreOrientation.NONCONFORMITY,
    "qbres": ScoreOrientation.NONCONFORMITY,
    "dbres": ScoreOrientation.NONCONFORMITY,
}


def score_ppd(y, fit: ModelFit):
    """Predictive density/pmf at y."""
    return fit.pmf(y) if hasattr(fit, "pmf") else fit.pdf(y)


def score_bres(y, fit: ModelFit):
    """Absolute deviation of y from the predictive mean."""
    return np.abs(np.asarray(y, dtype=np.float64) - ppd_mean(fit))


def score_qbres(y, fit: ModelFit, alpha_inner: float):
    """max(q_lo - y, y - q_hi) against the inner (alpha_inner) quantile band."""
    q_lo = ppd_quantile(fit, alpha_inner / 2.0)
    q_hi = ppd_quantile(fit, 1.0 - alpha_inner / 2.0)
    y = np.asarray(y, dtype=np.float64)
    return np.maximum(q_lo - y, y - q_hi)


def score_dbres(y, fit: ModelFit):
    """Absolute gap between the density at y and the density at the mode."""
    dens = score_ppd(y, fit)
    dens_map = score_ppd(ppd_map(fit), fit)
    return np.abs(dens - dens_map)


@dataclass(frozen=True)
class ConformityScoreSpec:
    """A named score, its orientation, and an evaluator closed over a fit."""

    name: str
    orientation: ScoreOrientation
    alpha_inner: Optional[float] = None

    def __post_init__(self):
        if self.name not in SCORE_NAMES:
            raise ValueError(f"unknown score {self.name!r}; pick one of {SCORE_NAMES}")
        if self.orientation is not _ORIENTATION[self.name]:
            raise ValueError(f"score {self.name!r} must use {_ORIENTATION[self.name]}")
        if (self.name == "qbres") != (self.alpha_inner is not None):
            raise ValueError("alpha_inner is required for qbres and only for qbres")

    def evaluator(self, fit: ModelFit) -> Callable:
        """Evaluation closure over a fitted model (vectorized over y)."""
        if self.name == "ppd":
            return lambda y: score_ppd(y, fit)
        if self.name == "bres":
            return lambda y: score_bres(y, fit)
        if self.name == "qbres":
            q_lo = ppd_quantile(fit, self.alpha_inner / 2.0)
            q_hi = ppd_quantile(fit, 1.0 - self.alpha_inner / 2.0)
            return lambda y: np.maximum(q_lo - np.asarray(y, dtype=np.float64),
                                        np.asarray(y, dtype=np.float64) - q_hi)
        dens_map_holder = {}

        def _dbres(y, fit=fit):
            if "v" not in dens_map_holder:
                dens_map_holder["v"] = score_ppd(ppd_map(fit), fit)
            return np.abs(score_ppd(y, fit) - dens_map_holder["v"])

        return _dbres


def make_score(name: str, alpha_inner: Optional[float] = None) -> ConformityScoreSpec:
    """Build the spec for a score name; qbres needs its inner level."""
    name = name.lower()
    if name not in SCORE_NAMES:
        raise ValueError(f"unknown score {name!r}; pick one of {SCORE_NAMES}")
    if name == "qbres":
        if alpha_inner is None:
            raise ValueError("qbres needs alpha_inner (defaults to the outer alpha)")
        return ConformityScoreSpec(name, _ORIENTATION[name], alpha_inner)
    return ConformityScoreSpec(name, _ORIENTATION[name])
