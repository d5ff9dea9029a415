"""
Lab Errors

Single exception hierarchy for the laboratory.

Every error carries a stable machine code so the command layer can
report it as one parsable stderr line:

    error code=LENGTH_MISMATCH message="waveform has 1999 samples, expected 2000"
"""

import json
from typing import Any, Dict


class LabError(Exception):
    """Base class for every expected failure of the lab."""

    code = "LAB_ERROR"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_line(self) -> str:
        return f"error code={self.code} message={json.dumps(self.message)}"


# ============================================================================
# SIGNAL / DATASET
# ============================================================================

class LengthMismatch(LabError):
    code = "LENGTH_MISMATCH"


class InvalidConfig(LabError):
    code = "INVALID_CONFIG"


class ShapeMismatch(LabError):
    code = "SHAPE_MISMATCH"


class UnsupportedFormat(LabError):
    code = "UNSUPPORTED_FORMAT"


class ClipTooLong(LabError):
    code = "CLIP_TOO_LONG"


class UnknownClassFolder(LabError):
    code = "UNKNOWN_CLASS_FOLDER"


class ClassTooSmall(LabError):
    code = "CLASS_TOO_SMALL"


# ============================================================================
# MODEL / ATTACKS
# ============================================================================

class InvalidArch(LabError):
    code = "INVALID_ARCH"


class AlreadyFooled(LabError):
    code = "ALREADY_FOOLED"


class NoConvergence(LabError):
    code = "NO_CONVERGENCE"


# ============================================================================
# DOMINANCE / NUMERIC
# ============================================================================

class EmptyEvaluationSet(LabError):
    code = "EMPTY_EVALUATION_SET"


class EmptyAfterExclusion(LabError):
    code = "EMPTY_AFTER_EXCLUSION"


class ThresholdTooLow(LabError):
    code = "THRESHOLD_TOO_LOW"


class ZeroVariance(LabError):
    code = "ZERO_VARIANCE"


class NonFinite(LabError):
    code = "NON_FINITE"


class ZeroRow(LabError):
    code = "ZERO_ROW"


class DegenerateSeries(LabError):
    code = "DEGENERATE_SERIES"


# ============================================================================
# ARTIFACTS
# ============================================================================

class CheckpointFormatError(LabError):
    code = "CHECKPOINT_FORMAT"


class ArtifactMissing(LabError):
    code = "ARTIFACT_MISSING"
