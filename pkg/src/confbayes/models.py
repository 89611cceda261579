"""Conjugate Bayesian working models with exact posterior predictive
distributions, posterior samplers, and the highest-predictive-density
baseline interval.

Two families ship: a Normal outcome model with a normal-times-gamma prior
on (mean, precision), whose predictive is a location-scale Student-t, and a
Binomial outcome model with a Beta prior, whose predictive is
Beta-Binomial. Model fits are immutable and safe to share across workers;
samplers own their RNG state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from confbayes import _kernels as K
from confbayes.core import ObservedSample, PredictionSet
from confbayes.errors import (
    DomainError,
    NumericError,
    SamplerDiagnosticError,
    UndefinedMoment,
)

_LOG_2PI = 1.8378770664093453


@dataclass(frozen=True)
class NormalGammaPrior:
    """Prior mean/scale for the Normal mean and gamma halves for the precision."""

    mu: float
    tau2: float
    a: float
    b: float

    def __post_init__(self):
        if not (self.tau2 > 0 and self.a > 0 and self.b > 0):
            raise ValueError("tau2, a, b must all be positive")


@dataclass(frozen=True)
class BetaPrior:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ValueError("a and b must be positive")

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)


class BinomialModel:
    """Binomial(m, theta) likelihood with a common trial count."""

    kind = "binomial"

    def __init__(self, m: int):
        if int(m) < 1:
            raise ValueError("m must be a positive integer")
        self.m = int(m)
        self._logc = K.log_binom(float(self.m), np.arange(self.m + 1, dtype=np.float64))

    def support(self) -> np.ndarray:
        return np.arange(self.m + 1, dtype=np.int64)

    def log_likelihood(self, y: float, theta: float) -> float:
        if not 0.0 < theta < 1.0:
            raise DomainError(f"theta={theta} outside (0, 1)")
        if y != int(y) or not 0 <= y <= self.m:
            return -math.inf
        yi = int(y)
        return float(self._logc[yi] + yi * math.log(theta) + (self.m - yi) * math.log1p(-theta))

    def log_likelihood_draws(self, y: float, draws: np.ndarray) -> np.ndarray:
        """Vectorized log likelihood of one outcome under many theta draws."""
        theta = np.asarray(draws, dtype=np.float64)
        if np.any(theta <= 0.0) or np.any(theta >= 1.0):
            raise DomainError("theta draws outside (0, 1)")
        if y != int(y) or not 0 <= y <= self.m:
            return np.full(theta.shape, -math.inf)
        yi = int(y)
        return self._logc[yi] + yi * np.log(theta) + (self.m - yi) * np.log1p(-theta)


class NormalModel:
    """Normal(theta, sigma2) likelihood; draws are (theta, sigma2) pairs."""

    kind = "normal"

    def support(self) -> None:
        return None

    def log_likelihood(self, y: float, theta) -> float:
        mean, sigma2 = float(theta[0]), float(theta[1])
        if sigma2 <= 0.0:
            raise DomainError(f"sigma2={sigma2} must be positive")
        return -0.5 * (_LOG_2PI + math.log(sigma2)) - (y - mean) ** 2 / (2.0 * sigma2)

    def log_likelihood_draws(self, y: float, draws: np.ndarray) -> np.ndarray:
        arr = np.asarray(draws, dtype=np.float64)
        mean = arr[:, 0]
        sigma2 = arr[:, 1]
        if np.any(sigma2 <= 0.0):
            raise DomainError("sigma2 draws must be positive")
        return -0.5 * (_LOG_2PI + np.log(sigma2)) - (y - mean) ** 2 / (2.0 * sigma2)


def log_likelihood(y: float, theta, model) -> float:
    """Exact log density/pmf of one outcome under one parameter value."""
    return model.log_likelihood(y, theta)


@dataclass(frozen=True)
class StudentTPPD:
    """Location-scale Student-t posterior predictive for the Normal model."""

    dof: float  # a + n
    location: float  # posterior predictive centre
    scale2: float  # b_sigma * (1 + tau2_theta) / dof
    b_sigma: float
    tau2_theta: float

    def __post_init__(self):
        if not (self.dof > 0 and self.scale2 > 0):
            raise ValueError("dof and scale2 must be positive")

    @property
    def mean(self) -> float:
        if self.dof <= 1.0:
            raise UndefinedMoment(f"Student-t mean undefined for dof={self.dof}")
        return self.location

    @property
    def map_point(self) -> float:
        return self.location

    def logpdf(self, y):
        return K.t_logpdf(y, self.dof, self.location, self.scale2)

    def pdf(self, y):
        return np.exp(self.logpdf(y))

    def cdf(self, y: float) -> float:
        return K.t_cdf(float(y), self.dof, self.location, self.scale2)

    def quantile(self, p: float) -> float:
        """Smallest x with CDF(x) >= p, to absolute CDF tolerance 1e-10."""
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        scale = math.sqrt(self.scale2)
        lo = self.location - 50.0 * scale
        hi = self.location + 50.0 * scale
        while self.cdf(lo) > p:
            lo = self.location - 2.0 * (self.location - lo)
        while self.cdf(hi) < p:
            hi = self.location + 2.0 * (hi - self.location)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            c = self.cdf(mid)
            if abs(c - p) <= 1e-12 or hi - lo <= 1e-13 * max(1.0, abs(mid)):
                return mid
            if c < p:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def rvs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.location + math.sqrt(self.scale2) * rng.standard_t(self.dof, size=size)


@dataclass(frozen=True)
class BetaBinomialPPD:
    """Beta-Binomial posterior predictive for the Binomial model."""

    m: int
    a_post: float
    b_post: float

    def __post_init__(self):
        if not (self.a_post > 0 and self.b_post > 0):
            raise ValueError("posterior Beta parameters must be positive")

    @property
    def mean(self) -> float:
        return self.m * self.a_post / (self.a_post + self.b_post)

    @property
    def map_point(self) -> int:
        return int(np.argmax(self.pmf_all()))  # first index on ties

    def logpmf(self, y):
        return K.bb_logpmf(y, self.m, self.a_post, self.b_post)

    def pmf(self, y):
        return np.exp(self.logpmf(y))

    def pmf_all(self) -> np.ndarray:
        return np.exp(K.bb_logpmf_all(self.m, self.a_post, self.b_post))

    def quantile(self, p: float) -> int:
        """Smallest integer whose cumulative pmf reaches p."""
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        cdf = np.cumsum(self.pmf_all())
        hit = np.nonzero(cdf >= p)[0]
        if hit.size == 0:  # cumulative rounding left the last cdf just under 1
            return self.m
        return int(hit[0])

    def rvs(self, rng: np.random.Generator, size: int) -> np.ndarray:
        theta = rng.beta(self.a_post, self.b_post, size=size)
        return rng.binomial(self.m, theta)


ModelFit = Union[StudentTPPD, BetaBinomialPPD]


def normal_ppd(data: ObservedSample, prior: NormalGammaPrior) -> StudentTPPD:
    """Exact Student-t posterior predictive of the Normal working model."""
    ys = data.as_array()
    return normal_ppd_from_stats(data.n, float(ys.sum()), float((ys * ys).sum()), prior)


def normal_ppd_from_stats(
    n: int, sum_y: float, sum_y2: float, prior: NormalGammaPrior
) -> StudentTPPD:
    """Same fit from the sufficient statistics (n, sum, sum of squares)."""
    tau2_theta = 1.0 / (1.0 / prior.tau2 + n)
    mu_theta = (prior.mu / prior.tau2 + sum_y) * tau2_theta
    a_sigma = prior.a + n
    b_sigma = prior.b + sum_y2 + prior.mu**2 / prior.tau2 - mu_theta**2 / tau2_theta
    if b_sigma <= 0.0:
        raise NumericError(f"b_sigma={b_sigma} <= 0: catastrophic cancellation")
    scale2 = b_sigma * (1.0 + tau2_theta) / a_sigma
    return StudentTPPD(
        dof=a_sigma,
        location=mu_theta,
        scale2=scale2,
        b_sigma=b_sigma,
        tau2_theta=tau2_theta,
    )


def posterior_as_prior(fit: StudentTPPD, prior_unused=None) -> NormalGammaPrior:
    """Re-express a Normal-model posterior as a prior for sequential updating."""
    return NormalGammaPrior(
        mu=fit.location, tau2=fit.tau2_theta, a=fit.dof, b=fit.b_sigma
    )


def betabinomial_ppd(data: ObservedSample, prior: BetaPrior) -> BetaBinomialPPD:
    """Exact Beta-Binomial posterior predictive of the Binomial working model."""
    if not data.is_binomial:
        raise DomainError("Binomial fit requires a sample with trial_size")
    ys = data.as_int_array()
    return betabinomial_ppd_from_stats(data.trial_size, data.n, int(ys.sum()), prior)


def betabinomial_ppd_from_stats(
    m: int, n: int, sum_y: int, prior: BetaPrior
) -> BetaBinomialPPD:
    """Same fit from the sufficient statistics (n, sum of counts)."""
    return BetaBinomialPPD(m=int(m), a_post=sum_y + prior.a, b_post=n * m - sum_y + prior.b)


def fit_ppd(data: ObservedSample, prior) -> ModelFit:
    """Dispatch the conjugate fit on the prior family."""
    if isinstance(prior, BetaPrior):
        return betabinomial_ppd(data, prior)
    if isinstance(prior, NormalGammaPrior):
        return normal_ppd(data, prior)
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


def ppd_mean(fit: ModelFit) -> float:
    """Posterior predictive mean (UndefinedMoment when it does not exist)."""
    return fit.mean


def ppd_quantile(fit: ModelFit, p: float) -> float:
    """Smallest outcome whose predictive CDF reaches p."""
    return fit.quantile(p)


def ppd_map(fit: ModelFit) -> float:
    """Predictive mode; smallest outcome on pmf ties."""
    return fit.map_point


@dataclass(frozen=True)
class PosteriorDrawSet:
    """G posterior parameter draws plus the provenance that produced them."""

    draws: np.ndarray  # (G,) theta for Binomial, (G, 2) (theta, sigma2) for Normal
    seed: int
    sampler: str  # "exact" | "metropolis"

    def __post_init__(self):
        arr = np.asarray(self.draws, dtype=np.float64)
        if arr.shape[0] < 1:
            raise ValueError("need at least one draw")
        if not np.all(np.isfinite(arr)):
            raise ValueError("draws must be finite")
        if arr.ndim == 1:
            if np.any(arr <= 0.0) or np.any(arr >= 1.0):
                raise ValueError("Binomial draws must lie in (0, 1)")
        else:
            if np.any(arr[:, 1] <= 0.0):
                raise ValueError("Normal draws need sigma2 > 0")
        object.__setattr__(self, "draws", arr)

    @property
    def G(self) -> int:
        return int(self.draws.shape[0])


def _binomial_log_posterior(theta: float, ys: np.ndarray, m: int, prior: BetaPrior) -> float:
    if not 0.0 < theta < 1.0:
        return -math.inf
    s = float(ys.sum())
    n = ys.size
    loglik = s * math.log(theta) + (n * m - s) * math.log1p(-theta)
    logprior = (prior.a - 1.0) * math.log(theta) + (prior.b - 1.0) * math.log1p(-theta)
    return loglik + logprior


def _metropolis_binomial(
    ys: np.ndarray,
    m: int,
    prior: BetaPrior,
    G: int,
    rng: np.random.Generator,
    adapt_steps: int = 1000,
    target_accept: float = 0.44,
) -> np.ndarray:
    theta = 0.5
    logp = _binomial_log_posterior(theta, ys, m, prior)
    scale = 0.1

    # adaptation window doubles as burn-in; scale nudged every 50 steps
    accepted = 0
    for step in range(adapt_steps):
        prop = theta + scale * rng.standard_normal()
        logp_prop = _binomial_log_posterior(prop, ys, m, prior)
        if math.log(rng.uniform()) < logp_prop - logp:
            theta, logp = prop, logp_prop
            accepted += 1
        if (step + 1) % 50 == 0:
            rate = accepted / 50.0
            scale *= math.exp(rate - target_accept)
            accepted = 0

    out = np.empty(G, dtype=np.float64)
    accepted = 0
    for g in range(G):
        prop = theta + scale * rng.standard_normal()
        logp_prop = _binomial_log_posterior(prop, ys, m, prior)
        if math.log(rng.uniform()) < logp_prop - logp:
            theta, logp = prop, logp_prop
            accepted += 1
        out[g] = theta
    rate = accepted / G
    if not 0.05 <= rate <= 0.95:
        raise SamplerDiagnosticError(
            f"post-adaptation acceptance rate {rate:.3f} outside [0.05, 0.95]"
        )
    return out


def sample_posterior(
    data: ObservedSample,
    prior,
    G: int,
    seed: int,
    sampler: str = "exact",
) -> PosteriorDrawSet:
    """Posterior parameter draws; exact conjugate samplers by default.

    The random-walk Metropolis fallback exists for the generic model
    interface (Gaussian proposal, 1000-step adaptation window targeting
    acceptance 0.44, burn-in folded into adaptation, no thinning); the
    exact samplers remain its test oracle. Identical seeds give identical
    draws.
    """
    if G < 1:
        raise ValueError("G must be >= 1")
    rng = np.random.default_rng(seed)
    if isinstance(prior, BetaPrior):
        if not data.is_binomial:
            raise DomainError("Beta prior requires a Binomial sample")
        ys = data.as_int_array()
        m = data.trial_size
        if sampler == "exact":
            s = int(ys.sum())
            draws = rng.beta(s + prior.a, data.n * m - s + prior.b, size=G)
            # numerical guard: keep draws strictly inside (0, 1)
            draws = np.clip(draws, 1e-15, 1.0 - 1e-15)
        elif sampler == "metropolis":
            draws = _metropolis_binomial(ys, m, prior, G, rng)
        else:
            raise ValueError(f"unknown sampler {sampler!r}")
        return PosteriorDrawSet(draws=draws, seed=seed, sampler=sampler)
    if isinstance(prior, NormalGammaPrior):
        if sampler != "exact":
            raise ValueError("only the exact sampler ships for the Normal model")
        fit = normal_ppd(data, prior)
        lam = rng.gamma(shape=fit.dof / 2.0, scale=2.0 / fit.b_sigma, size=G)
        sigma2 = 1.0 / lam
        theta = fit.location + np.sqrt(fit.tau2_theta * sigma2) * rng.standard_normal(G)
        return PosteriorDrawSet(
            draws=np.column_stack([theta, sigma2]), seed=seed, sampler=sampler
        )
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


def hppd_interval(fit: ModelFit, alpha: float) -> PredictionSet:
    """Highest-predictive-density region with predictive mass >= 1 - alpha.

    Continuous symmetric fits use the equal-tailed interval, which
    coincides with the highest-density region for symmetric unimodal
    densities. Discrete fits add outcomes in decreasing pmf order (ties to
    the smaller outcome) until the mass target is met; the result may be
    non-contiguous.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if isinstance(fit, StudentTPPD):
        return PredictionSet.interval(fit.quantile(alpha / 2.0), fit.quantile(1.0 - alpha / 2.0))
    pmf = fit.pmf_all()
    order = np.lexsort((np.arange(pmf.size), -pmf))  # pmf desc, outcome asc on ties
    mass = 0.0
    chosen = []
    for j in order:
        chosen.append(int(j))
        mass += float(pmf[j])
        if mass >= 1.0 - alpha:
            break
    return PredictionSet.discrete(sorted(chosen))
