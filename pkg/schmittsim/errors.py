from typing import Iterable

# -------------------------
# Error codes
# -------------------------
ERR_CODES = {
    "E100": "SYNTAX",
    "E101": "UNKNOWN_KEY",
    "E102": "UNIT",
    "E103": "DUPLICATE_ID",
    "E104": "MISSING_KEY",
    "E105": "VERSION",
    "E200": "REFERENCE",
    "E201": "BISTABILITY",
    "E202": "RANGE",
    "E203": "SEPARATION",
    "E204": "ANALYSIS",
    "E205": "CYCLE",
    "E206": "UNDRIVEN",
    "W300": "UNUSED_BLOCK",
    "W301": "NO_PROBE",
}


def describe_code(code: str) -> str:
    return ERR_CODES.get(code, "UNKNOWN")


# -------------------------
# Exceptions
# -------------------------
class SchmittSimError(Exception):
    """Base class for every error raised by schmittsim."""


class ConfigurationError(SchmittSimError):
    pass


class DomainError(SchmittSimError, ValueError):
    pass


class NetworkError(SchmittSimError):
    def __init__(self, message: str, ids: Iterable[str] = ()):
        self.ids = tuple(ids)
        super().__init__(message)


class DuplicateIdError(NetworkError):
    pass


class DanglingNetError(NetworkError):
    pass


class CycleError(NetworkError):
    pass


class MissingSourceError(NetworkError):
    pass


class StimulusError(SchmittSimError):
    pass


class SeparationError(StimulusError):
    def __init__(self, message: str, first, second):
        self.first = first
        self.second = second
        super().__init__(message)


class IntegrationError(SchmittSimError):
    def __init__(self, message: str, bound: float):
        self.bound = bound
        super().__init__(message)


class NotApplicable(SchmittSimError):
    """A measurement could not be taken on the given data (no transition etc.)."""


class ScenarioError(SchmittSimError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        count = len(self.diagnostics)
        super().__init__(f"{count} diagnostic{'s' if count != 1 else ''} reported")
