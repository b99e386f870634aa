"""Exception types shared by all modules.

Every error carries a stable ``code`` string (``"not-found"``,
``"no-route"``, ...) which the command line reports verbatim.
"""


class QNetError(Exception):
    code = "error"

    def __init__(self, message: str = "", code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code

    def __str__(self) -> str:
        msg = super().__str__()
        return f"[{self.code}] {msg}" if msg else f"[{self.code}]"


class NotFound(QNetError, KeyError):
    code = "not-found"


class InvalidArgument(QNetError, ValueError):
    code = "invalid-argument"


class CapacityExceeded(QNetError):
    code = "capacity-exceeded"


class ImpossibleOutcome(QNetError):
    code = "impossible-outcome"


class NoRoute(QNetError):
    code = "no-route"


class InsufficientResources(QNetError):
    code = "insufficient-resources"


class DeviceDown(QNetError):
    code = "device-down"


class ScenarioError(QNetError):
    """Scenario text failed validation; ``errors`` holds ``(line, message)`` pairs."""

    code = "scenario-error"

    def __init__(self, errors: list[tuple[int, str]]):
        self.errors = list(errors)
        text = "; ".join(f"line {ln}: {msg}" for ln, msg in self.errors)
        super().__init__(text)
