"""Closed-form full conformal intervals for the Normal and Binomial models,
plus the equivalent-conformity-measure checker.

For both models the per-observation acceptance region of a candidate y
against an observed y_i is an interval whose endpoints are y_i itself and a
partner value: the candidate for which y and y_i sit equally far from the
predictive mean refitted on the candidate-augmented sample. Sorting all 2n
endpoint values and reading off the k-th / (2n-k+1)-th order statistics
yields the full conformal set without any grid search.

Binomial caveat: the simple mirror ``2*mean - y_i`` about the unaugmented
predictive mean is NOT the exact partner bound, because the candidate
shifts the refitted mean. Solving the equidistance identity exactly gives

    (2*m*(sum_y + a) - y_i*(n*m + m + a + b)) / (n*m + a + b - m),

and exhaustive comparison against the grid engine confirms that this form,
with closed endpoints, reproduces the grid set exactly; the simple mirror
does not. Both are exposed; the interval builder uses the exact bound. The
Normal-model bound needs no such correction (its equidistance identity is
solved exactly below).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from confbayes.core import ObservedSample, PredictionSet, REL_TIE_TOL, floor_rank
from confbayes.errors import SingularReflection
from confbayes.full_cp import CandidateGrid, _augmented_fit, _deleted_fit
from confbayes.models import BetaPrior, NormalGammaPrior, fit_ppd
from confbayes.scores import make_score


@dataclass(frozen=True)
class ReflectionVector:
    """The 2n per-observation acceptance bounds plus the order-statistic rank."""

    v: np.ndarray  # observed outcomes followed by their partner bounds
    k: int

    def __post_init__(self):
        if self.v.size % 2 != 0:
            raise ValueError("bound vector must hold 2n values")


def normal_reflection(y_i: float, data: ObservedSample, prior: NormalGammaPrior) -> float:
    """Partner acceptance bound of one observation under the Normal model.

    Affine decreasing in y_i; the map is singular only in the improper
    limit where 1/tau2 + n + 1 approaches 2 (n = 1 with enormous tau2).
    """
    s = float(data.as_array().sum())
    shrink = 1.0 / (1.0 / prior.tau2 + data.n + 1.0)
    denom = 1.0 - 2.0 * shrink
    if abs(denom) < 1e-14:
        raise SingularReflection("reflection denominator vanished (n<=1, huge tau2)")
    return (2.0 * (prior.mu / prior.tau2 + s) * shrink - y_i) / denom


def binomial_reflection(y_i: float, data: ObservedSample, prior: BetaPrior) -> float:
    """Mirror of one observation about the unaugmented predictive mean.

    This is the simple ``2*mean - y_i`` form (an involution). It shares its
    fixed point with the exact bound below but has unit slope, so it is NOT
    the bound the grid engine traces; see the module docstring.
    """
    s = float(data.as_int_array().sum())
    m = data.trial_size
    n = data.n
    return 2.0 * m * (s + prior.a) / (n * m + prior.a + prior.b) - y_i


def binomial_boundary(y_i: float, data: ObservedSample, prior: BetaPrior) -> float:
    """Exact partner acceptance bound of one observation under the Binomial
    model: the candidate equally far from the candidate-augmented
    predictive mean as y_i. Real-valued; not rounded to the support."""
    s = float(data.as_int_array().sum())
    m = data.trial_size
    n = data.n
    num = 2.0 * m * (s + prior.a) - y_i * (n * m + m + prior.a + prior.b)
    den = n * m + prior.a + prior.b - m
    return num / den


def reflection_vector(data: ObservedSample, prior, alpha: float) -> ReflectionVector:
    """All 2n acceptance bounds (observations plus partners), with the rank."""
    ys = data.as_array()
    k = floor_rank(alpha, data.n)
    if isinstance(prior, BetaPrior):
        partners = np.array([binomial_boundary(y, data, prior) for y in ys])
    elif isinstance(prior, NormalGammaPrior):
        partners = np.array([normal_reflection(y, data, prior) for y in ys])
    else:
        raise TypeError(f"unsupported prior type {type(prior).__name__}")
    return ReflectionVector(v=np.concatenate([ys, partners]), k=k)


def analytic_full_cp(data: ObservedSample, prior, alpha: float) -> PredictionSet:
    """Closed-form full conformal set from the sorted acceptance bounds.

    Rank k = floor(alpha*(n+1)); k = 0 yields the whole space. Binomial
    output is the integer support intersected with the closed bound
    interval (endpoint outcomes are genuine acceptance ties and belong in
    the set — the grid engine adjudicates); Normal output is the interval
    between the k-th and (2n-k+1)-th sorted bounds. The set always contains
    the posterior predictive mean.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    rv = reflection_vector(data, prior, alpha)
    n = data.n
    if rv.k < 1:
        if isinstance(prior, BetaPrior):
            return PredictionSet.discrete(range(data.trial_size + 1), ("infinite-quantile",))
        return PredictionSet.whole_line()
    v = np.sort(rv.v)
    lo = float(v[rv.k - 1])
    hi = float(v[2 * n - rv.k])
    if isinstance(prior, BetaPrior):
        m = data.trial_size
        lo_c = max(lo, 0.0)
        hi_c = min(hi, float(m))
        members = [j for j in range(m + 1) if lo_c <= j <= hi_c]
        if not members:
            return PredictionSet.empty()
        return PredictionSet.discrete(members)
    return PredictionSet.interval(lo, hi, open_ends=True)


SchemeFn = Callable[[ObservedSample, object, float], Tuple[np.ndarray, float]]


def augmented_scheme(score_name: str, alpha_inner: float = 0.1) -> SchemeFn:
    """Score every point, candidate included, under the candidate-augmented fit."""
    spec = make_score(score_name, alpha_inner if score_name == "qbres" else None)

    def scheme(data: ObservedSample, prior, y: float):
        fit = _augmented_fit(data, prior, y)
        ev = spec.evaluator(fit)
        return np.asarray(ev(data.as_array()), dtype=np.float64), float(ev(y))

    return scheme


def deleted_scheme(score_name: str, alpha_inner: float = 0.1) -> SchemeFn:
    """Score each observation under the augmented fit with itself removed;
    the candidate is scored under the original-sample fit."""
    spec = make_score(score_name, alpha_inner if score_name == "qbres" else None)

    def scheme(data: ObservedSample, prior, y: float):
        n = data.n
        r_obs = np.empty(n, dtype=np.float64)
        ys = data.as_array()
        for i in range(n):
            fit_i = _deleted_fit(data, prior, y, i)
            r_obs[i] = float(spec.evaluator(fit_i)(float(ys[i])))
        fit0 = fit_ppd(data, prior)
        return r_obs, float(spec.evaluator(fit0)(y))

    return scheme


def ecm_check(
    data: ObservedSample,
    model,
    prior,
    scheme_a: SchemeFn,
    scheme_b: SchemeFn,
    grid: CandidateGrid,
) -> Tuple[bool, Optional[Tuple[int, float]]]:
    """Do two scoring schemes induce identical acceptance indicators?

    For every candidate y in the grid and every observation index i, checks
    that the indicator of "observation i scores at most the candidate"
    agrees between the schemes (tie-tolerant, like the engines). Returns
    (True, None) or (False, (i, y)) with the first violation.
    """
    ys = data.as_array()
    for y in grid.points:
        ra_obs, ra_cand = scheme_a(data, prior, float(y))
        rb_obs, rb_cand = scheme_b(data, prior, float(y))
        for i in range(ys.size):
            ia = _le_tol(ra_obs[i], ra_cand)
            ib = _le_tol(rb_obs[i], rb_cand)
            if ia != ib:
                return False, (i, float(y))
    return True, None


def _le_tol(r_i: float, r_cand: float) -> bool:
    scale = max(abs(r_i), abs(r_cand))
    return r_cand - r_i >= -REL_TIE_TOL * scale
