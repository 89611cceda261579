"""Split conformal prediction with a Bayesian training fit.

One random partition, one conjugate fit on the training half, calibration
scores on the held-out half, and a conformal quantile that adjusts the
calibration rank for the future unit. The residual and quantile-band
scores give explicit intervals; the density-valued scores go through the
hybrid route (calibrated threshold plus a grid search).

Calibration scores see the training outcomes only through the fitted
predictive distribution: each score closure is built from the fit alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from confbayes.core import (
    ObservedSample,
    PredictionSet,
    ScoreOrientation,
    conformal_quantile_conformity,
    conformal_quantile_nonconformity,
    passes_threshold,
)
from confbayes.errors import InsufficientData
from confbayes.full_cp import CandidateGrid, default_grid
from confbayes.models import BetaPrior, fit_ppd, ppd_mean, ppd_quantile
from confbayes.scores import make_score


@dataclass(frozen=True)
class SplitConfig:
    train_fraction: float = 0.5
    seed: int = 0
    min_cal: int = 1

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.min_cal < 1:
            raise ValueError("min_cal must be >= 1")


def split_data(data: ObservedSample, cfg: SplitConfig) -> Tuple[ObservedSample, ObservedSample]:
    """Disjoint exhaustive random partition, deterministic given the seed.

    Training size is train_fraction rounded half-up, so an odd sample at
    the default 50/50 split gives training the extra point; sizes are then
    clamped so both halves stay legal.
    """
    n = data.n
    if n < 2:
        raise InsufficientData(f"need n >= 2 to split, got {n}")
    n_t = int(math.floor(cfg.train_fraction * n + 0.5))
    n_t = max(1, min(n_t, n - cfg.min_cal))
    perm = np.random.default_rng(cfg.seed).permutation(n)
    ys = data.as_array()
    train = ObservedSample(ys[perm[:n_t]], trial_size=data.trial_size)
    cal = ObservedSample(ys[perm[n_t:]], trial_size=data.trial_size)
    return train, cal


def _discretize(lower: float, upper: float, m: int, flags=()) -> PredictionSet:
    members = [j for j in range(m + 1) if lower <= j <= upper]
    if not members:
        return PredictionSet.empty(tuple(list(flags) + ["empty"]))
    return PredictionSet.discrete(members, tuple(flags))


def split_cp_bres(
    data: ObservedSample, model, prior, cfg: SplitConfig, alpha: float
) -> PredictionSet:
    """Mean-centred split interval: fitted mean plus/minus the calibration
    quantile of absolute deviations."""
    train, cal = split_data(data, cfg)
    fit = fit_ppd(train, prior)
    mu = ppd_mean(fit)
    scores = np.abs(cal.as_array() - mu)
    q = conformal_quantile_nonconformity(scores, alpha)
    if math.isinf(q):
        if isinstance(prior, BetaPrior):
            return PredictionSet.discrete(range(data.trial_size + 1), ("infinite-quantile",))
        return PredictionSet.whole_line()
    if isinstance(prior, BetaPrior):
        return _discretize(mu - q, mu + q, data.trial_size)
    return PredictionSet.interval(mu - q, mu + q)


def split_cp_qbres(
    data: ObservedSample,
    model,
    prior,
    cfg: SplitConfig,
    alpha: float,
    alpha_inner: Optional[float] = None,
) -> PredictionSet:
    """Quantile-band split interval, expanded (or shrunk, when the
    calibration quantile is negative) by the conformal adjustment."""
    if alpha_inner is None:
        alpha_inner = alpha
    train, cal = split_data(data, cfg)
    fit = fit_ppd(train, prior)
    q_lo = float(ppd_quantile(fit, alpha_inner / 2.0))
    q_hi = float(ppd_quantile(fit, 1.0 - alpha_inner / 2.0))
    ys = cal.as_array()
    scores = np.maximum(q_lo - ys, ys - q_hi)
    q = conformal_quantile_nonconformity(scores, alpha)
    if math.isinf(q):
        if isinstance(prior, BetaPrior):
            return PredictionSet.discrete(range(data.trial_size + 1), ("infinite-quantile",))
        return PredictionSet.whole_line()
    lower, upper = q_lo - q, q_hi + q
    if lower > upper:
        return PredictionSet.empty()
    if isinstance(prior, BetaPrior):
        return _discretize(lower, upper, data.trial_size)
    return PredictionSet.interval(lower, upper)


def split_cp_density(
    data: ObservedSample,
    model,
    prior,
    cfg: SplitConfig,
    alpha: float,
    score_name: str = "ppd",
    grid: Optional[CandidateGrid] = None,
) -> PredictionSet:
    """Hybrid split route for density-valued scores: calibrate a threshold
    on the held-out half, then grid-search the candidates that pass it."""
    if score_name not in ("ppd", "dbres"):
        raise ValueError("hybrid route covers the density scores: ppd or dbres")
    train, cal = split_data(data, cfg)
    fit = fit_ppd(train, prior)
    spec = make_score(score_name)
    ev = spec.evaluator(fit)
    scores = np.asarray(ev(cal.as_array()), dtype=np.float64)
    if spec.orientation is ScoreOrientation.CONFORMITY:
        q = conformal_quantile_conformity(scores, alpha)
    else:
        q = conformal_quantile_nonconformity(scores, alpha)
    if grid is None:
        grid = default_grid(data, prior)
    cand_scores = np.asarray(ev(grid.points), dtype=np.float64)
    mask = np.array(
        [passes_threshold(float(s), q, spec.orientation) for s in cand_scores], dtype=bool
    )
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return PredictionSet.empty()
    flags = []
    if np.any(np.diff(idx) != 1):
        flags.append("grid-gap")
    if grid.discrete:
        return PredictionSet.discrete([int(grid.points[i]) for i in idx], tuple(flags))
    return PredictionSet.interval(
        float(grid.points[idx[0]]), float(grid.points[idx[-1]]), flags=tuple(flags)
    )
