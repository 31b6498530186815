"""Exception types shared across the pipeline."""

from __future__ import annotations


class DataError(Exception):
    """Input data violates a panel, schema, or configuration contract."""


class NumericalError(Exception):
    """A numerical routine left its accuracy contract."""
