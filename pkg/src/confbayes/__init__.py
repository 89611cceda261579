"""confbayes: Bayesian conformal prediction.

Finite-sample-valid prediction sets built from posterior predictive
distributions: full, split, and closed-form conformal procedures for
conjugate Normal and Binomial working models, plus a Monte Carlo harness
for coverage/width studies.
"""

__version__ = "0.1.0"

from confbayes._kernels import backend_name
from confbayes.core import (
    ContinuousInterval,
    DiscreteSet,
    ObservedSample,
    PredictionSet,
    ScoreOrientation,
    conformal_quantile_conformity,
    conformal_quantile_nonconformity,
    order_statistic,
)
from confbayes.models import (
    BetaBinomialPPD,
    BetaPrior,
    BinomialModel,
    NormalGammaPrior,
    NormalModel,
    PosteriorDrawSet,
    StudentTPPD,
    betabinomial_ppd,
    hppd_interval,
    log_likelihood,
    normal_ppd,
    ppd_map,
    ppd_mean,
    ppd_quantile,
    sample_posterior,
)
from confbayes.scores import ConformityScoreSpec, make_score
from confbayes.full_cp import (
    CandidateGrid,
    ImportanceWeights,
    aoi_ppd,
    aoi_weights,
    conformal_pvalue,
    full_cp_grid,
    full_cp_loo,
    full_cp_pvalue,
    loo_weights,
)
from confbayes.analytic_cp import (
    ReflectionVector,
    analytic_full_cp,
    binomial_boundary,
    binomial_reflection,
    ecm_check,
    normal_reflection,
)
from confbayes.split_cp import (
    SplitConfig,
    split_cp_bres,
    split_cp_density,
    split_cp_qbres,
    split_data,
)
from confbayes.sim import SimReport, StudyConfig, prior_sweep, run_replication, run_study

__all__ = [
    "__version__",
    "backend_name",
    "ObservedSample",
    "PredictionSet",
    "ContinuousInterval",
    "DiscreteSet",
    "ScoreOrientation",
    "order_statistic",
    "conformal_quantile_conformity",
    "conformal_quantile_nonconformity",
    "BetaPrior",
    "NormalGammaPrior",
    "BinomialModel",
    "NormalModel",
    "BetaBinomialPPD",
    "StudentTPPD",
    "PosteriorDrawSet",
    "betabinomial_ppd",
    "normal_ppd",
    "ppd_mean",
    "ppd_quantile",
    "ppd_map",
    "sample_posterior",
    "log_likelihood",
    "hppd_interval",
    "ConformityScoreSpec",
    "make_score",
    "CandidateGrid",
    "ImportanceWeights",
    "full_cp_grid",
    "full_cp_pvalue",
    "full_cp_loo",
    "conformal_pvalue",
    "aoi_weights",
    "aoi_ppd",
    "loo_weights",
    "ReflectionVector",
    "analytic_full_cp",
    "normal_reflection",
    "binomial_reflection",
    "binomial_boundary",
    "ecm_check",
    "SplitConfig",
    "split_data",
    "split_cp_bres",
    "split_cp_qbres",
    "split_cp_density",
    "StudyConfig",
    "SimReport",
    "run_replication",
    "run_study",
    "prior_sweep",
]
