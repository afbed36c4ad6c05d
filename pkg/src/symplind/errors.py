"""Exception and warning types shared across the package.

Every error carries a short machine-readable ``code`` plus an optional
``context`` dict so the CLI can serialize failures as JSON objects.
"""

from __future__ import annotations


class SymplindError(Exception):
    """Base class for all library errors."""

    code = "error"

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def as_dict(self) -> dict:
        return {"code": self.code, "message": self.message, "context": _jsonable(self.context)}


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


# ---------------------------------------------------------------- input errors

class InputError(SymplindError):
    """Invalid user input (bad matrices, malformed files, bad flags)."""

    code = "input-error"


class DimensionMismatch(InputError):
    code = "dimension-mismatch"


class NonSymmetricInput(InputError):
    code = "non-symmetric-input"


class ModelParseError(InputError):
    """Model file violates the JSON schema; ``path`` names the offending node."""

    code = "model-parse-error"

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}", path=path)
        self.path = path


class IndexOutOfRange(InputError):
    code = "index-out-of-range"


class OffGrid(InputError):
    code = "off-grid"


class InsufficientGrid(InputError):
    code = "insufficient-grid"


# -------------------------------------------------------- computational errors

class ComputationError(SymplindError):
    """Numerically well-posed request that the algorithms cannot satisfy."""

    code = "computation-error"


class PairingFailure(ComputationError):
    code = "pairing-failure"


class SingularInput(ComputationError):
    code = "singular-input"


class BranchCutFailure(ComputationError):
    code = "branch-cut-failure"


class NotDiagonalizable(ComputationError):
    code = "not-diagonalizable"


class ResidualFailure(ComputationError):
    code = "residual-failure"


class UnsupportedJordanStructure(ComputationError):
    code = "unsupported-jordan-structure"


class GaugeFixFailure(ComputationError):
    code = "gauge-fix-failure"


class DriveAtCriticalMode(ComputationError):
    code = "drive-at-critical-mode"


class JordanFormRequiresGeneralizedTreatment(ComputationError):
    code = "jordan-form-requires-generalized-treatment"


class BranchCollision(ComputationError):
    code = "branch-collision"


class NonDiagonalizableOnPath(ComputationError):
    code = "non-diagonalizable-on-path"


class ResourceLimit(ComputationError):
    code = "resource-limit"


class TruncationWarning(UserWarning):
    """Fock cutoff looks too small for the stationary occupation."""
