"""Error handling utilities.

Provides unified error types, their process exit codes, and mapping of
numerical/library errors onto them.
"""

from __future__ import annotations

from typing import Any, ClassVar

import numpy as np
import pydantic


class HermiteError(Exception):
    """Base error for toolkit operations."""

    exit_code: ClassVar[int] = 1

    def __init__(
        self,
        message: str,
        code: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.code = code
        self.details = details

    def __str__(self) -> str:
        return self.message

    def to_dict(self) -> dict[str, Any]:
        """Convert error to dictionary for JSON serialization."""
        result: dict[str, Any] = {
            "error": self.__class__.__name__,
            "message": self.message,
        }
        if self.code:
            result["code"] = self.code
        if self.details:
            result["details"] = self.details
        return result


class ValidationError(HermiteError):
    """Input parameter outside its domain."""

    exit_code = 2

    def __init__(
        self,
        message: str,
        field: str | None = None,
        code: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, code=code, details=details)
        self.field = field

    def to_dict(self) -> dict[str, Any]:
        result = super().to_dict()
        if self.field:
            result["field"] = self.field
        return result


class ConfigurationError(HermiteError):
    """Inconsistent configuration (e.g. paper_sigma with m != 2)."""

    exit_code = 2

    def __init__(
        self,
        message: str,
        setting: str | None = None,
        code: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, code=code, details=details)
        self.setting = setting

    def to_dict(self) -> dict[str, Any]:
        result = super().to_dict()
        if self.setting:
            result["setting"] = self.setting
        return result


class InsufficientDataError(HermiteError):
    """Too few usable Monte Carlo points for a statistical fit."""

    exit_code = 3


class DegenerateFitError(InsufficientDataError):
    """All observations degenerate (e.g. every tail estimate is zero)."""


class EmbeddingError(HermiteError):
    """Circulant embedding has more negative spectral mass than tolerated."""

    def __init__(
        self,
        message: str,
        clip_mass: float | None = None,
        code: str | None = "negative_mass",
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, code=code, details=details)
        self.clip_mass = clip_mass

    def to_dict(self) -> dict[str, Any]:
        result = super().to_dict()
        if self.clip_mass is not None:
            result["clip_mass"] = self.clip_mass
        return result


class NumericalError(HermiteError):
    """Numerical failure (non-PD factorization, non-finite evaluation)."""

    def __init__(
        self,
        message: str,
        pivot: float | None = None,
        code: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, code=code, details=details)
        self.pivot = pivot

    def to_dict(self) -> dict[str, Any]:
        result = super().to_dict()
        if self.pivot is not None:
            result["pivot"] = self.pivot
        return result


class WorkerError(HermiteError):
    """A replica task failed inside the parallel map."""

    def __init__(
        self,
        message: str,
        chunk: tuple[int, int] | None = None,
        code: str | None = "worker_failed",
        details: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(message, code=code, details=details)
        self.chunk = chunk

    def to_dict(self) -> dict[str, Any]:
        result = super().to_dict()
        if self.chunk is not None:
            result["chunk"] = list(self.chunk)
        return result


def handle_error(
    error: Exception,
    context: str | None = None,
) -> HermiteError:
    """
    Convert library errors to HermiteError.

    Args:
        error: Any exception raised while running an experiment.
        context: Optional operation name prefixed to the message.

    Returns:
        A HermiteError carrying the appropriate exit code.
    """
    # Pass through existing HermiteErrors
    if isinstance(error, HermiteError):
        return error

    msg = str(error)
    if context:
        msg = f"{context}: {msg}"

    if isinstance(error, pydantic.ValidationError):
        first = error.errors()[0] if error.errors() else {}
        field = ".".join(str(p) for p in first.get("loc", ())) or None
        return ValidationError(message=msg, field=field, code="parameter_domain")

    if isinstance(error, np.linalg.LinAlgError):
        return NumericalError(message=msg, code="not_positive_definite")

    if isinstance(error, FloatingPointError):
        return NumericalError(message=msg, code="non_finite")

    if isinstance(error, ValueError):
        return ValidationError(message=msg, code="parameter_domain")

    return HermiteError(message=msg)
