"""Exception types shared across the simulator."""

from __future__ import annotations


class QflError(Exception):
    """Base class for all qflsim errors."""


class CapacityError(QflError):
    """A requested register exceeds the simulator's qubit budget."""


class EncodingError(QflError):
    """A feature vector cannot be turned into a valid quantum state."""


class ParameterShapeError(QflError):
    """A parameter vector does not match the circuit it is bound to."""


class OptimizationError(QflError):
    """The objective returned a non-finite value during optimization."""

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class DatasetParseError(QflError):
    """A dataset file violates the CSV schema.

    ``line`` is the 1-based line number of the offending row (0 for
    file-level problems such as a bad header).
    """

    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


class ConfigError(QflError):
    """A run configuration is invalid; ``key`` names the offending entry."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


class FederationError(QflError):
    """A federation run aborted; carries (epoch, stage, client) context."""

    def __init__(self, message: str, epoch: int | None = None,
                 stage: str | None = None, client_id: int | None = None):
        parts = []
        if epoch is not None:
            parts.append(f"epoch {epoch}")
        if stage is not None:
            parts.append(f"stage {stage}")
        if client_id is not None:
            parts.append(f"client {client_id}")
        prefix = f"[{', '.join(parts)}] " if parts else ""
        super().__init__(prefix + message)
        self.epoch = epoch
        self.stage = stage
        self.client_id = client_id
