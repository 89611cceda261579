"""Domain types, order statistics, and the two conformal-quantile rules.

Everything here is a pure function of its inputs and safe to call from
concurrent workers. Score vectors are validated on the way in: NaN means an
upstream numeric failure, not data, and is rejected.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from confbayes.errors import EmptyCalibration

_RANK_SNAP = 1e-9

# Scores that agree to this relative precision are treated as tied. Exact
# rational ties (integer outcomes against rational predictive means) land a
# few ulp apart in floats; counting them as ties keeps every engine on the
# decision exact arithmetic would make, and erring toward inclusion is the
# conservative side for coverage.
REL_TIE_TOL = 1e-9


class ScoreOrientation(enum.Enum):
    """Whether larger score values mean more or less plausible."""

    CONFORMITY = "conformity"  # higher = more plausible
    NONCONFORMITY = "nonconformity"  # lower = more plausible


@dataclass(frozen=True)
class ObservedSample:
    """Exchangeable univariate outcomes with model metadata.

    ``outcomes`` are real numbers for the Normal model or counts in
    ``{0..trial_size}`` for the Binomial model; the order of the entries
    carries no meaning.
    """

    outcomes: tuple
    trial_size: Optional[int] = None

    def __init__(self, outcomes: Sequence[float], trial_size: Optional[int] = None):
        arr = np.asarray(outcomes, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("outcomes must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError("outcomes must be finite (NaN/inf rejected)")
        if trial_size is not None:
            trial_size = int(trial_size)
            if trial_size < 1:
                raise ValueError("trial_size must be a positive integer")
            if np.any(arr != np.round(arr)):
                raise ValueError("Binomial outcomes must be integers")
            if np.any(arr < 0) or np.any(arr > trial_size):
                raise ValueError("Binomial outcomes must lie in {0..trial_size}")
        object.__setattr__(self, "outcomes", tuple(float(v) for v in arr))
        object.__setattr__(self, "trial_size", trial_size)

    @property
    def n(self) -> int:
        return len(self.outcomes)

    @property
    def is_binomial(self) -> bool:
        return self.trial_size is not None

    def as_array(self) -> np.ndarray:
        return np.asarray(self.outcomes, dtype=np.float64)

    def as_int_array(self) -> np.ndarray:
        if not self.is_binomial:
            raise ValueError("integer view requires a Binomial sample")
        return np.asarray(self.outcomes, dtype=np.int64)


@dataclass(frozen=True)
class ContinuousInterval:
    lower: float
    upper: float
    open_ends: bool = False

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("interval endpoints must not be NaN")
        if self.lower > self.upper:
            raise ValueError("interval requires lower <= upper")

    @property
    def size(self) -> float:
        return self.upper - self.lower

    def contains(self, y: float) -> bool:
        if self.open_ends:
            return self.lower < y < self.upper
        return self.lower <= y <= self.upper


@dataclass(frozen=True)
class DiscreteSet:
    members: tuple

    def __init__(self, members: Sequence[int]):
        ms = tuple(int(v) for v in members)
        if any(b <= a for a, b in zip(ms, ms[1:])):
            raise ValueError("members must be strictly increasing")
        object.__setattr__(self, "members", ms)

    @property
    def size(self) -> float:
        return float(len(self.members))

    def contains(self, y: float) -> bool:
        return int(y) in self.members and y == int(y)


@dataclass(frozen=True)
class PredictionSet:
    """A prediction region: either a continuous interval or an explicit
    finite set of discrete outcomes, with its size measure (Lebesgue length
    or cardinality)."""

    kind: Union[ContinuousInterval, DiscreteSet]
    flags: tuple = field(default_factory=tuple)

    @property
    def size(self) -> float:
        return self.kind.size

    @property
    def is_empty(self) -> bool:
        if isinstance(self.kind, DiscreteSet):
            return len(self.kind.members) == 0
        return False

    def contains(self, y: float) -> bool:
        return self.kind.contains(y)

    @staticmethod
    def interval(lower: float, upper: float, open_ends: bool = False, flags=()) -> "PredictionSet":
        return PredictionSet(ContinuousInterval(lower, upper, open_ends), tuple(flags))

    @staticmethod
    def discrete(members: Sequence[int], flags=()) -> "PredictionSet":
        return PredictionSet(DiscreteSet(members), tuple(flags))

    @staticmethod
    def empty(flags=("empty",)) -> "PredictionSet":
        return PredictionSet(DiscreteSet(()), tuple(flags))

    @staticmethod
    def whole_line(flags=("infinite-quantile",)) -> "PredictionSet":
        return PredictionSet(ContinuousInterval(-math.inf, math.inf), tuple(flags))


def _validated_scores(values: Sequence[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("scores must be one-dimensional")
    if np.any(np.isnan(arr)):
        raise ValueError("NaN score rejected: upstream numeric failure")
    return arr


def order_statistic(values: Sequence[float], k: int) -> float:
    """k-th smallest element of ``values`` (1-indexed, ties preserved)."""
    arr = _validated_scores(values)
    if not 1 <= k <= arr.size:
        raise IndexError(f"order statistic rank {k} out of range 1..{arr.size}")
    return float(np.sort(arr, kind="stable")[k - 1])


def _snap(x: float) -> float:
    # Rank products like 20*(1-0.1) land a few ulp off the integer they
    # represent; snap before floor/ceil so the rank matches exact arithmetic.
    r = round(x)
    if abs(x - r) <= _RANK_SNAP * max(1.0, abs(x)):
        return float(r)
    return x


def floor_rank(alpha: float, n: int) -> int:
    """floor(alpha * (n + 1)) with float snapping."""
    return int(math.floor(_snap(alpha * (n + 1))))


def ceil_rank(alpha: float, n: int) -> int:
    """ceil((n + 1) * (1 - alpha)) with float snapping."""
    return int(math.ceil(_snap((n + 1) * (1.0 - alpha))))


def conformal_quantile_nonconformity(scores: Sequence[float], alpha: float) -> float:
    """Calibration quantile for non-conformity scores.

    Returns the order statistic at rank ceil((n+1)(1-alpha)); when the rank
    exceeds n the prediction set must be the whole space, signalled by
    +infinity.
    """
    arr = _validated_scores(scores)
    if arr.size == 0:
        raise EmptyCalibration("no calibration scores")
    rank = ceil_rank(alpha, arr.size)
    if rank > arr.size:
        return math.inf
    return float(np.sort(arr, kind="stable")[rank - 1])


def conformal_quantile_conformity(scores: Sequence[float], alpha: float) -> float:
    """Calibration quantile for conformity scores.

    Returns the order statistic at rank floor(alpha*(n+1)); when the rank
    falls below 1 every candidate is accepted, signalled by -infinity.
    """
    arr = _validated_scores(scores)
    if arr.size == 0:
        raise EmptyCalibration("no calibration scores")
    rank = floor_rank(alpha, arr.size)
    if rank < 1:
        return -math.inf
    return float(np.sort(arr, kind="stable")[rank - 1])


def plausibility_count(
    observed_scores: np.ndarray, candidate_score: float, orientation: ScoreOrientation
) -> int:
    """Number of observed scores at least as implausible as the candidate's.

    For conformity scores this counts R_i <= R_cand, for non-conformity
    scores R_i >= R_cand, with near-ties within REL_TIE_TOL counted as
    ties. Both conformal engines accept a candidate when this count reaches
    floor(alpha*(n+1)), which makes the rank-threshold and p-value routes
    coincide for every alpha and n.
    """
    r_obs = np.asarray(observed_scores, dtype=np.float64)
    scale = np.maximum(np.abs(r_obs), abs(candidate_score))
    if orientation is ScoreOrientation.CONFORMITY:
        return int(np.sum(candidate_score - r_obs >= -REL_TIE_TOL * scale))
    return int(np.sum(r_obs - candidate_score >= -REL_TIE_TOL * scale))


def passes_threshold(score: float, threshold: float, orientation: ScoreOrientation) -> bool:
    """Tie-tolerant acceptance of one score against a calibration quantile."""
    if math.isinf(threshold):
        return (threshold > 0) is (orientation is ScoreOrientation.NONCONFORMITY)
    scale = max(abs(score), abs(threshold))
    if orientation is ScoreOrientation.CONFORMITY:
        return score - threshold >= -REL_TIE_TOL * scale
    return threshold - score >= -REL_TIE_TOL * scale
