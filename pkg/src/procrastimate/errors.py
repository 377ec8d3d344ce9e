"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ProcrastimateError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ProcrastimateError):
    """A value is outside its domain (bad card id, malformed cause, ...)."""


class DeckError(DomainError):
    """The card-deck document failed validation."""

    def __init__(self, message: str, offending_ids: list[int] | None = None):
        super().__init__(message)
        self.offending_ids = offending_ids or []


class StateError(ProcrastimateError):
    """An action is illegal in the current game state."""

    def __init__(self, message: str, code: str = "STATE"):
        super().__init__(message)
        self.code = code


class EconomyError(StateError):
    """A card purchase violates the point economy."""

    def __init__(self, message: str, code: str = "ECONOMY"):
        super().__init__(message, code=code)


class RenderError(ProcrastimateError):
    """A prompt template referenced a placeholder that was not bound."""

    def __init__(self, message: str, placeholder: str):
        super().__init__(message)
        self.placeholder = placeholder


class ProviderError(ProcrastimateError):
    """The remote dialogue provider failed or timed out."""


class PackError(ProcrastimateError):
    """A story pack could not be parsed; carries the ordered diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = "; ".join(f"{d.code} at {d.path}: {d.message}" for d in self.diagnostics)
        super().__init__(f"invalid story pack: {lines}")


class SaveError(ProcrastimateError):
    """Base class for persistence failures."""


class CorruptionError(SaveError):
    """Save payload does not match its checksum."""


class VersionError(SaveError):
    """Save format version is not recognized."""


class TamperError(SaveError):
    """Loaded state violates a game-state invariant."""
