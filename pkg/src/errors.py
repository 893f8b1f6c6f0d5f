"""
Exception hierarchy shared by the library, the CLI and the HTTP API.

Every failure a caller can fix (bad input, exhausted limit) is a
WorkbenchError carrying an ErrorCode and, for text inputs, a position.
"""

from __future__ import annotations

from typing import Optional

from src.models import ErrorCode, ErrorDetail


class WorkbenchError(Exception):
    """Base class for all user-facing workbench errors."""

    code: ErrorCode = ErrorCode.invalid_input

    def __init__(
        self,
        message: str,
        *,
        line: Optional[int] = None,
        column: Optional[int] = None,
        token: Optional[str] = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.token = token

    def __str__(self) -> str:
        if self.line is not None and self.column is not None:
            return f"{self.message} (line {self.line}, column {self.column})"
        return self.message

    def detail(self) -> ErrorDetail:
        return ErrorDetail(
            code=self.code,
            message=str(self),
            line=self.line,
            column=self.column,
            token=self.token,
        )


class ResourceLimitError(WorkbenchError):
    """Raised when a computation would exceed a configured bound."""

    code = ErrorCode.resource_limit

    def __init__(self, bound: str, limit: int, requested: int) -> None:
        super().__init__(
            f"{bound} limit exceeded: requested {requested}, limit is {limit}"
        )
        self.bound = bound
        self.limit = limit
        self.requested = requested
