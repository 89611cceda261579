"""Exception types shared across the package."""


class ConfBayesError(Exception):
    """Base class for all package-specific errors."""


class EmptyCalibration(ConfBayesError):
    """A conformal quantile was requested from an empty score set."""


class NumericError(ConfBayesError):
    """A numerically impossible intermediate was produced (upstream bug)."""


class UndefinedMoment(ConfBayesError):
    """A requested moment does not exist for the fitted distribution."""


class SamplerDiagnosticError(ConfBayesError):
    """An MCMC sampler failed its post-adaptation health check."""


class DomainError(ConfBayesError):
    """A parameter or outcome lies outside the model's domain."""


class DegenerateWeights(ConfBayesError):
    """All importance weights vanished; the reweighting identity broke down."""


class InsufficientData(ConfBayesError):
    """Not enough observations for the requested operation."""


class SingularReflection(ConfBayesError):
    """The reflection map is undefined for this prior/sample configuration."""
