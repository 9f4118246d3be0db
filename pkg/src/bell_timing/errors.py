"""Exception types raised across bell-timing."""


class ConfigError(ValueError):
    """Invalid scenario configuration (unknown key, wrong type, bad value)."""


class ModelContractError(ValueError):
    """A local model broke its contract (e.g. a response outside [0, 1])."""


class IndeterminateError(ValueError):
    """A zero-over-zero quantity (no events for a settings pair) or a missing input."""


class SinglesConditionError(ValueError):
    """Singles differ from 1/2, so the reduced CH form does not apply."""


class CounterfactualRangeError(ValueError):
    """A counterfactual expectation lies outside [-3, 3]."""


class QuadratureError(RuntimeError):
    """Step halving did not reach the requested tolerance."""


class AdmissibilityInputError(TypeError):
    """Admissibility was asked to judge something that is not a local model."""
