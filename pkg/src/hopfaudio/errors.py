"""Exception types shared across the package."""


class ContractError(ValueError):
    """An input violated a documented precondition or invariant."""


class DivergenceError(RuntimeError):
    """Numerical state became non-finite during integration or training."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class WavFormatError(ValueError):
    """WAV container could not be parsed; carries the offending byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset
