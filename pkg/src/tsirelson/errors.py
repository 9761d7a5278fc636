"""Exception hierarchy for tsirelson.

Every error carries a stable machine code so the CLI can report it as a single
parseable line, much like an HTTP status code paired with a detail message.
"""

from typing import Any


class TsirelsonError(Exception):
    """Base class for all domain errors."""

    code = "E_GENERIC"

    def __init__(self, detail: str, **context: Any) -> None:
        super().__init__(detail)
        self.detail = detail
        self.context = context

    def to_payload(self) -> dict[str, Any]:
        """Return the machine-readable form written by the CLI."""
        payload: dict[str, Any] = {"error": self.code, "message": self.detail}
        if self.context:
            payload["context"] = self.context
        return payload


class ValidationError(TsirelsonError):
    """Input violates a documented precondition."""

    code = "E_VALIDATION"


class InputFormatError(TsirelsonError):
    """Malformed JSON or an unknown vector/params format."""

    code = "E_JSON"


class UsageError(TsirelsonError):
    """Unknown flag or subcommand."""

    code = "E_USAGE"


class BudgetExceededError(TsirelsonError):
    """A computation would exceed a configured size budget."""

    code = "E_BUDGET"


class CertificateError(TsirelsonError):
    """A certificate tree breaks a closure rule at some node."""

    code = "E_CERTIFICATE"


class ConstructionError(TsirelsonError):
    """A constructive step produced output outside its guaranteed bounds."""

    code = "E_CONSTRUCTION"


class InsufficientInputError(ConstructionError):
    """Not enough input vectors to complete a construction."""

    code = "E_INSUFFICIENT_INPUT"

