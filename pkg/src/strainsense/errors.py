"""Exception hierarchy shared by all strainsense modules.

Two families matter to callers: configuration problems (bad files, bad
units, bad CLI usage) and numeric guards (a computation refused to
proceed because its validity conditions were violated). The CLI maps
them to distinct exit codes.
"""

#: process exit codes used by the CLI
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class StrainSenseError(Exception):
    """Base class for all package-specific errors."""

    exit_code = EXIT_NUMERIC


class ConfigError(StrainSenseError):
    """Invalid configuration file, units declaration, or CLI arguments."""

    exit_code = EXIT_CONFIG


class ModelRangeError(StrainSenseError):
    """Input outside the validity range of a linearized model."""


class RegimeError(StrainSenseError):
    """Operation requires a parameter regime the inputs do not satisfy."""


class CutoffError(StrainSenseError):
    """Basis truncation too small for a converged result."""


class TruncationError(StrainSenseError):
    """Fock-space operation would push significant amplitude past the cutoff."""


class StepError(StrainSenseError):
    """Finite-difference step outside its admissible range, or step-size
    error estimate above tolerance."""


class StateError(StrainSenseError):
    """State fails a structural requirement (normalization, representation)."""


class DegenerateEstimatorError(StrainSenseError):
    """Estimator slope is zero; the parameter cannot be inverted."""


class UnidentifiableParameterError(StrainSenseError):
    """Fisher information is zero; no estimator can resolve the parameter."""


class ResourceGuardError(StrainSenseError):
    """Requested computation exceeds a hard resource limit."""
