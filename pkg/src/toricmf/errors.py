"""Shared exception types."""
from __future__ import annotations


class ToricmfError(Exception):
    """Base class for package errors."""


class InputError(ToricmfError):
    """Malformed or out-of-domain user input (polytope, basepoint, schema)."""


class MonoidMismatchError(ToricmfError):
    """Operands belong to different disk-class registries."""


class CutoffError(ToricmfError):
    """A requested computation does not fit under the configured cutoffs."""


class InconsistentSystemError(ToricmfError):
    """The completion solver met an unsatisfiable linear constraint."""

    def __init__(self, message, instances=None):
        super().__init__(message)
        self.instances = instances or []
