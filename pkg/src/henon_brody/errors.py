"""Exception hierarchy. Every error carries a stable machine-readable code."""

from __future__ import annotations


class HenonError(Exception):
    code = "henon-error"

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.context = context

    def record(self) -> dict:
        return {"code": self.code, "message": self.message, "context": self.context}


class EscapedRange(HenonError):
    """Coordinates left the binary64-safe range; switch to projective/high precision."""

    code = "escaped-representable-range"


class IndeterminatePoint(HenonError):
    code = "indeterminate-point"


class GreenUndecided(HenonError):
    code = "green-undecided"


class NotContracting(HenonError):
    code = "not-contracting"


class ResonanceConditioning(HenonError):
    code = "resonance-like-conditioning"


class PrecisionExhausted(HenonError):
    code = "precision-exhausted"


class DegenerateRescale(HenonError):
    code = "degenerate-rescale"


class PipelineFailed(HenonError):
    code = "pipeline-failed"


class UsageError(HenonError):
    code = "usage-error"
