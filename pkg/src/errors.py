"""
Exception hierarchy shared by every layer of the simulator.
"""

from typing import Dict, Optional


class FedHapError(Exception):
    """Base class for all simulator errors."""


class ConfigurationError(FedHapError):
    """Invalid configuration value, dimension mismatch or infeasible size."""


class UsageError(FedHapError):
    """API used out of order, e.g. backward with a tape from another network."""


class TrainingError(FedHapError):
    """Non-finite loss or gradient during local training."""

    def __init__(self, message: str, diagnostics: Optional[Dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ProtocolError(FedHapError):
    """Client/server exchange violated the round protocol."""


class DomainError(FedHapError):
    """Math operation outside its domain (zero-vector cosine, empty mAP)."""


class DiscriminatorUnavailable(DomainError):
    """No valid prototype exists, so the adversarial phase must be skipped."""


class ParseError(FedHapError):
    """Malformed dataset file."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class TrainingAborted(FedHapError):
    """A run stopped on a TrainingError; points at the diagnostic snapshot."""

    def __init__(self, message: str, snapshot_path: Optional[str] = None,
                 diagnostics: Optional[Dict] = None):
        super().__init__(message)
        self.snapshot_path = snapshot_path
        self.diagnostics = diagnostics or {}
