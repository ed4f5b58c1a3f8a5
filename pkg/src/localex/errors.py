"""Error types shared across the package.

The CLI maps ConfigError to exit code 1 and every other failure to exit
code 2, so keep configuration problems on the ConfigError branch.
"""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(EngineError):
    """Invalid configuration: bad file, missing field, violated invariant."""


class DimensionMismatch(EngineError):
    """Input width does not match the declared dimension."""


class LengthMismatch(EngineError):
    """Vector lengths disagree (raw space vs feature space)."""


class InvalidGrid(EngineError):
    """Grid segmentation parameters are non-positive or oversized."""


class RemoteUnavailable(EngineError):
    """Remote model endpoint unreachable, timed out, or returned HTTP >= 400."""


class RemoteMalformed(EngineError):
    """Remote model response did not match the request batch."""


class UnsupportedModel(EngineError):
    """Operation not defined for this model variant (e.g. gradient of Remote)."""


class ShapDegenerate(EngineError):
    """Shapley kernel weight requested for an all-on or all-off coalition."""


class SingularSystem(EngineError):
    """Unregularized normal equations are rank-deficient."""


class UnsupportedCombination(EngineError):
    """No closed-form moments for this distribution/weighting pair."""


class NotPositiveDefinite(EngineError):
    """Covariance parameters violate positive-definiteness of Sigma + lambda*I."""


class DimensionTooLarge(EngineError):
    """Exact coalition enumeration requested above the supported dimension."""


class IoFailure(EngineError):
    """Could not write an output artifact."""
