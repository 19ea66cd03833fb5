"""Exception types shared across the toolkit."""


class DimensionMismatchError(ValueError):
    """Array dimensions do not conform to the operator or geometry."""


class GeometryError(ValueError):
    """Scan geometry is degenerate or inconsistent."""


class NumericalDivergenceError(RuntimeError):
    """Non-finite values appeared during an iterative computation.

    Carries the stage name and iteration index where the blow-up was
    detected.
    """

    def __init__(self, stage: str, iteration: int):
        self.stage = stage
        self.iteration = iteration
        super().__init__(f"non-finite values in stage '{stage}' at iteration {iteration}")


class ConfigError(ValueError):
    """Experiment configuration is invalid; message names the field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")


class RawFormatError(ValueError):
    """On-disk raw file violates the expected format; carries a byte offset."""

    def __init__(self, message: str, byte_offset: int):
        self.byte_offset = byte_offset
        super().__init__(f"{message} (byte offset {byte_offset})")
