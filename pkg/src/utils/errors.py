"""
Error types
Every failure raised by the library derives from NsvError; the CLI maps the
three families below to exit codes 2 (validation), 3 (runtime) and 4
(provenance mismatch).
"""

from typing import Any, Dict, Optional, Sequence, Tuple


class NsvError(Exception):
    """Base class for all library errors"""

    exit_code = 1

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.field = field

    def to_dict(self) -> Dict[str, Any]:
        """Structured form used by the CLI error printer"""
        data: Dict[str, Any] = {"error": type(self).__name__, "message": self.message}
        if self.field:
            data["field"] = self.field
        return data


# ============================================================================
# Validation (exit code 2)
# ============================================================================

class ValidationFailure(NsvError):
    """Invalid input detected before any computation"""

    exit_code = 2


class ConfigurationError(ValidationFailure, ValueError):
    """Invalid configuration value or combination"""


class DimensionError(ValidationFailure, ValueError):
    """Array length or shape does not match what the operation expects"""


class DegenerateInputError(ValidationFailure, ValueError):
    """Input is well-formed but carries no usable information"""


class MissingArtifactError(ValidationFailure, FileNotFoundError):
    """An upstream artifact a command depends on does not exist"""


# ============================================================================
# Runtime (exit code 3)
# ============================================================================

class RuntimeFailure(NsvError):
    """Computation failed after validation passed"""

    exit_code = 3


class IntegrationDivergenceError(RuntimeFailure):
    """Non-finite state produced during time integration"""

    def __init__(self, message: str, step_index: int):
        super().__init__(message)
        self.step_index = step_index

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["step_index"] = self.step_index
        return data


class SingularMatrixError(RuntimeFailure):
    """Linear system is numerically singular"""


class LiftConstructionError(RuntimeFailure):
    """No full-rank lift could be sampled"""


class ConvergenceError(RuntimeFailure):
    """An iterative solver stopped without meeting its tolerance"""

    def __init__(self, message: str, residuals: Sequence[float] = ()):
        super().__init__(message)
        self.residuals = list(residuals)

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["residuals"] = self.residuals
        return data


class StaleCacheError(RuntimeFailure):
    """Backward pass called with a cache from a different parameter set"""


class UnusableEmbeddingError(RuntimeFailure):
    """Trajectory filtering removed every trajectory"""


class TrainingDivergedError(RuntimeFailure):
    """Loss became non-finite; carries the last good model"""

    def __init__(self, message: str, step: int, last_good: Any = None):
        super().__init__(message)
        self.step = step
        self.last_good = last_good


# ============================================================================
# Provenance (exit code 4)
# ============================================================================

class ProvenanceError(NsvError):
    """Artifact hashes do not match the ones recorded downstream"""

    exit_code = 4

    def __init__(self, message: str, diff: Optional[Dict[str, Tuple[str, str]]] = None):
        super().__init__(message)
        self.diff = diff or {}

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["diff"] = {k: {"expected": e, "actual": a} for k, (e, a) in self.diff.items()}
        return data
