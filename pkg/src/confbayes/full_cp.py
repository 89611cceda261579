"""Grid-based full conformal prediction, the p-value variant, and
posterior-draw recycling through add-one-in / leave-one-out importance
weights.

For the two conjugate models the candidate-augmented and deleted refits are
available exactly, so the engines default to exact refits; the importance
weight path is the validated approximation used by the generic model
interface. Candidate evaluations are independent and deterministic given
(data, grid, alpha), so the per-candidate loop parallelizes trivially.

Inclusion rule. Both engines accept a candidate when at least
floor(alpha*(n+1)) observed scores are at least as implausible as the
candidate's own score. This is the rank-threshold rule and is equivalent to
keeping candidates whose conformal p-value strictly exceeds alpha; the
non-strict form (p >= alpha) differs only when alpha*(n+1) is an integer
and a candidate's p-value equals alpha exactly, and would break the exact
agreement between the threshold, the p-value, and the closed-form engines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from confbayes import _kernels as K
from confbayes.core import (
    ObservedSample,
    PredictionSet,
    ScoreOrientation,
    floor_rank,
    plausibility_count,
)
from confbayes.errors import DegenerateWeights
from confbayes.models import (
    BetaPrior,
    PosteriorDrawSet,
    StudentTPPD,
    betabinomial_ppd_from_stats,
    normal_ppd_from_stats,
)
from confbayes.scores import ConformityScoreSpec

_SCORE_IDS = {"ppd": K.SCORE_PPD, "bres": K.SCORE_BRES, "qbres": K.SCORE_QBRES, "dbres": K.SCORE_DBRES}


@dataclass(frozen=True)
class CandidateGrid:
    """Sorted candidate outcomes: the full support for a Binomial model, a
    uniform real grid for a continuous one."""

    points: np.ndarray
    discrete: bool

    def __init__(self, points: Sequence[float], discrete: bool):
        arr = np.asarray(points, dtype=np.float64)
        if arr.size == 0:
            raise ValueError("grid must be non-empty")
        if np.any(np.diff(arr) <= 0):
            raise ValueError("grid points must be strictly increasing")
        object.__setattr__(self, "points", arr)
        object.__setattr__(self, "discrete", bool(discrete))

    @staticmethod
    def binomial_support(m: int) -> "CandidateGrid":
        return CandidateGrid(np.arange(m + 1, dtype=np.float64), discrete=True)

    @staticmethod
    def continuous(lo: float, hi: float, n_points: int = 2001) -> "CandidateGrid":
        return CandidateGrid(np.linspace(lo, hi, n_points), discrete=False)

    @staticmethod
    def for_fit(fit: StudentTPPD, n_points: int = 2001, half_width: float = 10.0) -> "CandidateGrid":
        """Default continuous grid: centre +- half_width predictive sds."""
        if fit.dof > 2.0:
            sd = math.sqrt(fit.scale2 * fit.dof / (fit.dof - 2.0))
        else:
            sd = 5.0 * math.sqrt(fit.scale2)  # variance undefined, pad wide
        return CandidateGrid.continuous(
            fit.location - half_width * sd, fit.location + half_width * sd, n_points
        )


@dataclass(frozen=True)
class ImportanceWeights:
    """Normalized non-negative weights over posterior draws."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        object.__setattr__(self, "weights", w)

    @property
    def ess(self) -> float:
        """Effective sample size 1 / sum(w^2)."""
        return float(1.0 / np.sum(self.weights**2))


@dataclass
class FullCpDiagnostics:
    """Per-run record: candidate p-values, ESS traces, degeneracy flags."""

    candidates: np.ndarray
    pvalues: np.ndarray
    ess: Optional[np.ndarray] = None
    degenerate: list = field(default_factory=list)
    flags: tuple = ()

    def to_dict(self) -> dict:
        out = {
            "candidates": [float(v) for v in self.candidates],
            "pvalues": [float(v) for v in self.pvalues],
            "flags": list(self.flags),
            "degenerate": [list(map(float, pair)) for pair in self.degenerate],
        }
        if self.ess is not None:
            out["ess"] = [float(v) for v in self.ess]
        return out


def conformal_pvalue(
    scores_obs: Sequence[float], score_candidate: float, orientation: ScoreOrientation
) -> float:
    """Rank-based p-value of a candidate among exchangeable scores.

    The candidate counts itself, so the value lies in [1/(n+1), 1].
    """
    arr = np.asarray(scores_obs, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("need at least one observed score")
    c = plausibility_count(arr, score_candidate, orientation)
    return (c + 1) / (arr.size + 1)


def _augmented_fit(data: ObservedSample, prior, y: float):
    if isinstance(prior, BetaPrior):
        s = int(data.as_int_array().sum())
        return betabinomial_ppd_from_stats(data.trial_size, data.n + 1, s + int(y), prior)
    ys = data.as_array()
    return normal_ppd_from_stats(
        data.n + 1, float(ys.sum()) + y, float((ys * ys).sum()) + y * y, prior
    )


def _mask_to_set(
    grid: CandidateGrid, mask: np.ndarray, diagnostics: Optional[FullCpDiagnostics] = None
):
    flags = []
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        flags.append("empty")
        return PredictionSet.empty(tuple(flags)), flags
    if grid.discrete:
        members = [int(grid.points[i]) for i in idx]
        if np.any(np.diff(idx) != 1):
            flags.append("grid-gap")
        return PredictionSet.discrete(members, tuple(flags)), flags
    if np.any(np.diff(idx) != 1):
        flags.append("grid-gap")
    lo = float(grid.points[idx[0]])
    hi = float(grid.points[idx[-1]])
    return PredictionSet.interval(lo, hi, open_ends=False, flags=tuple(flags)), flags


def _generic_masks(data, prior, score: ConformityScoreSpec, grid: CandidateGrid, alpha: float):
    ys = data.as_array()
    n = data.n
    k = floor_rank(alpha, n)
    counts = np.empty(grid.points.size, dtype=np.int64)
    for i, y in enumerate(grid.points):
        fit = _augmented_fit(data, prior, float(y))
        ev = score.evaluator(fit)
        r_obs = np.asarray(ev(ys), dtype=np.float64)
        r_cand = float(ev(float(y)))
        counts[i] = plausibility_count(r_obs, r_cand, score.orientation)
    mask = (counts >= k).astype(np.uint8)
    pvalues = (counts + 1) / (n + 1)
    return mask, counts, pvalues


def full_cp_grid(
    data: ObservedSample,
    model,
    prior,
    score: ConformityScoreSpec,
    grid: Optional[CandidateGrid] = None,
    alpha: float = 0.1,
    engine: str = "auto",
    return_diagnostics: bool = False,
):
    """Full conformal prediction set by grid search with exact refits.

    For every candidate the model is refitted on the augmented sample, all
    observed outcomes and the candidate are scored under that refit, and
    the candidate is kept by the rank rule described in the module
    docstring. Binomial samples use the compiled kernel unless
    ``engine='generic'`` forces the reference path.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if grid is None:
        grid = default_grid(data, prior)
    n = data.n
    k = floor_rank(alpha, n)

    binomial = isinstance(prior, BetaPrior)
    use_fast = engine == "fast" or (engine == "auto" and binomial and grid.discrete)
    if use_fast:
        if not binomial:
            raise ValueError("fast engine only exists for the Binomial model")
        if grid.points.size != data.trial_size + 1 or not grid.discrete:
            use_fast = False
    if use_fast:
        alpha_inner = score.alpha_inner if score.alpha_inner is not None else alpha
        mask = K.bb_full_cp_mask(
            data.as_int_array(),
            data.trial_size,
            prior.a,
            prior.b,
            k,
            _SCORE_IDS[score.name],
            alpha_inner,
        )
        pvalues = None
        if return_diagnostics:
            _, counts, pvalues = _generic_masks(data, prior, score, grid, alpha)
    else:
        mask, _, pvalues = _generic_masks(data, prior, score, grid, alpha)

    pred, flags = _mask_to_set(grid, mask)
    if not return_diagnostics:
        return pred
    diag = FullCpDiagnostics(
        candidates=grid.points.copy(),
        pvalues=pvalues if pvalues is not None else np.array([]),
        flags=tuple(flags),
    )
    return pred, diag


def full_cp_pvalue(
    data: ObservedSample,
    model,
    prior,
    score: ConformityScoreSpec,
    grid: Optional[CandidateGrid] = None,
    alpha: float = 0.1,
    return_diagnostics: bool = False,
):
    """Full conformal set by test inversion: keep candidates whose conformal
    p-value exceeds alpha.

    Produces exactly the same set as :func:`full_cp_grid` for every input;
    the candidate count is recovered from the p-value so the boundary
    comparison is integer-exact rather than float-sensitive.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if grid is None:
        grid = default_grid(data, prior)
    ys = data.as_array()
    n = data.n
    k = floor_rank(alpha, n)
    pvalues = np.empty(grid.points.size, dtype=np.float64)
    mask = np.zeros(grid.points.size, dtype=np.uint8)
    for i, y in enumerate(grid.points):
        fit = _augmented_fit(data, prior, float(y))
        ev = score.evaluator(fit)
        r_obs = np.asarray(ev(ys), dtype=np.float64)
        r_cand = float(ev(float(y)))
        p = conformal_pvalue(r_obs, r_cand, score.orientation)
        pvalues[i] = p
        count = int(round(p * (n + 1))) - 1
        mask[i] = 1 if count >= k else 0

    pred, flags = _mask_to_set(grid, mask)
    if not return_diagnostics:
        return pred
    diag = FullCpDiagnostics(candidates=grid.points.copy(), pvalues=pvalues, flags=tuple(flags))
    return pred, diag


def default_grid(data: ObservedSample, prior) -> CandidateGrid:
    """Binomial: the full support. Normal: 2001 points around the fit."""
    if isinstance(prior, BetaPrior):
        return CandidateGrid.binomial_support(data.trial_size)
    from confbayes.models import normal_ppd

    return CandidateGrid.for_fit(normal_ppd(data, prior))


def aoi_weights(y_candidate: float, draws: PosteriorDrawSet, model) -> ImportanceWeights:
    """Add-one-in weights: each draw weighted by the candidate's likelihood.

    Computed in log space with max subtraction; raises DegenerateWeights
    when the candidate has zero likelihood under every draw.
    """
    lw = np.asarray(model.log_likelihood_draws(y_candidate, draws.draws), dtype=np.float64)
    lw = np.where(np.isnan(lw), -math.inf, lw)
    mx = float(np.max(lw))
    if not math.isfinite(mx):
        raise DegenerateWeights(f"candidate {y_candidate} has zero likelihood at every draw")
    w = np.exp(lw - mx)
    w /= w.sum()
    return ImportanceWeights(w)


def aoi_ppd(y_tilde, y_candidate: float, draws: PosteriorDrawSet, model):
    """Candidate-augmented predictive estimate as a likelihood mixture."""
    w = aoi_weights(y_candidate, draws, model).weights
    y_tilde_arr = np.atleast_1d(np.asarray(y_tilde, dtype=np.float64))
    out = np.empty(y_tilde_arr.size, dtype=np.float64)
    for j, yt in enumerate(y_tilde_arr):
        lik = np.exp(np.asarray(model.log_likelihood_draws(float(yt), draws.draws)))
        out[j] = float(np.sum(w * lik))
    if np.isscalar(y_tilde) or np.asarray(y_tilde).ndim == 0:
        return float(out[0])
    return out


def loo_weights(
    y_candidate: float, y_deleted: float, draws: PosteriorDrawSet, model
) -> ImportanceWeights:
    """Leave-one-out weights: candidate likelihood over deleted-point likelihood.

    Raises DegenerateWeights when the deleted point has zero likelihood at
    every draw (the nearest-neighbour / noiseless-interpolator failure mode
    of draw recycling). Draws where only the deleted likelihood vanishes
    dominate the mixture and are kept with uniform weight among themselves.
    """
    lc = np.asarray(model.log_likelihood_draws(y_candidate, draws.draws), dtype=np.float64)
    ld = np.asarray(model.log_likelihood_draws(y_deleted, draws.draws), dtype=np.float64)
    if not np.any(np.isfinite(ld)):
        raise DegenerateWeights(f"deleted point {y_deleted} has zero likelihood at every draw")
    lw = lc - ld
    lw = np.where(np.isnan(lw), -math.inf, lw)
    if np.any(np.isposinf(lw)):
        dom = np.isposinf(lw).astype(np.float64)
        return ImportanceWeights(dom / dom.sum())
    mx = float(np.max(lw))
    if not math.isfinite(mx):
        raise DegenerateWeights(f"candidate {y_candidate} has zero likelihood at every draw")
    w = np.exp(lw - mx)
    w /= w.sum()
    return ImportanceWeights(w)


def loo_ppd(
    y_tilde: float, y_candidate: float, y_deleted: float, draws: PosteriorDrawSet, model
) -> float:
    """Deleted-sample predictive estimate via leave-one-out weights."""
    w = loo_weights(y_candidate, y_deleted, draws, model).weights
    lik = np.exp(np.asarray(model.log_likelihood_draws(float(y_tilde), draws.draws)))
    return float(np.sum(w * lik))


def _deleted_fit(data: ObservedSample, prior, y_cand: float, i: int):
    # Refit on the augmented sample with observation i removed (n points).
    if isinstance(prior, BetaPrior):
        ys = data.as_int_array()
        s = int(ys.sum()) - int(ys[i]) + int(y_cand)
        return betabinomial_ppd_from_stats(data.trial_size, data.n, s, prior)
    ys = data.as_array()
    sum_y = float(ys.sum()) - float(ys[i]) + y_cand
    sum_y2 = float((ys * ys).sum()) - float(ys[i]) ** 2 + y_cand * y_cand
    return normal_ppd_from_stats(data.n, sum_y, sum_y2, prior)


def full_cp_loo(
    data: ObservedSample,
    model,
    prior,
    draws: Optional[PosteriorDrawSet] = None,
    grid: Optional[CandidateGrid] = None,
    alpha: float = 0.1,
    return_diagnostics: bool = False,
):
    """Full conformal prediction with deleted-sample predictive scores.

    Each observed outcome is scored by the predictive density of the
    augmented sample with itself removed; the candidate is scored by the
    predictive density of the original sample. With ``draws=None`` the
    deleted refits are exact (conjugate models); otherwise they are
    approximated by leave-one-out reweighting of the supplied posterior
    draws, and any degenerate (candidate, i) pair scores zero and is
    flagged in the diagnostics.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if grid is None:
        grid = default_grid(data, prior)
    ys = data.as_array()
    n = data.n
    k = floor_rank(alpha, n)

    if draws is None:
        from confbayes.models import fit_ppd

        base_fit = fit_ppd(data, prior)
        base_density = np.asarray(base_fit.pmf(grid.points) if hasattr(base_fit, "pmf_all") else base_fit.pdf(grid.points))
    else:
        base_density = np.empty(grid.points.size, dtype=np.float64)
        for j, y in enumerate(grid.points):
            lik = np.exp(np.asarray(model.log_likelihood_draws(float(y), draws.draws)))
            base_density[j] = float(np.mean(lik))

    mask = np.zeros(grid.points.size, dtype=np.uint8)
    pvalues = np.empty(grid.points.size, dtype=np.float64)
    degenerate = []
    for j, y in enumerate(grid.points):
        r_cand = float(base_density[j])
        r_obs = np.empty(n, dtype=np.float64)
        for i in range(n):
            if draws is None:
                fit_del = _deleted_fit(data, prior, float(y), i)
                dens = fit_del.pmf(ys[i]) if hasattr(fit_del, "pmf_all") else fit_del.pdf(ys[i])
                r_obs[i] = float(dens)
            else:
                try:
                    r_obs[i] = loo_ppd(float(ys[i]), float(y), float(ys[i]), draws, model)
                except DegenerateWeights:
                    r_obs[i] = 0.0
                    degenerate.append((float(y), float(ys[i])))
        count = plausibility_count(r_obs, r_cand, ScoreOrientation.CONFORMITY)
        pvalues[j] = (count + 1) / (n + 1)
        mask[j] = 1 if count >= k else 0

    pred, flags = _mask_to_set(grid, mask)
    if degenerate:
        flags = list(flags) + ["degenerate-weights"]
        pred = PredictionSet(pred.kind, tuple(flags))
    if not return_diagnostics:
        return pred
    diag = FullCpDiagnostics(
        candidates=grid.points.copy(),
        pvalues=pvalues,
        degenerate=degenerate,
        flags=tuple(flags),
    )
    return pred, diag
