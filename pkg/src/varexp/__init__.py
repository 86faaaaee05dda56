"""Weighted variable-exponent Lebesgue spaces on discrete measure spaces."""

__version__ = "0.1.0"
