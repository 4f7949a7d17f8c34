from __future__ import annotations


class QuickDrawError(Exception):
    """Base class for every error raised by this package."""


class InputError(QuickDrawError, ValueError):
    pass


class ConfigError(QuickDrawError, ValueError):
    pass


class PolicyStateError(QuickDrawError, RuntimeError):
    pass


class FactorizationError(QuickDrawError, RuntimeError):
    pass


class IngestError(QuickDrawError, ValueError):
    def __init__(self, message: str, bad_rows: list[tuple[int, str]]):
        super().__init__(message)
        self.bad_rows = bad_rows  # [(line_number, reason)]


class EnsembleError(QuickDrawError, RuntimeError):
    def __init__(self, message: str, seed: int):
        super().__init__(message)
        self.seed = seed
