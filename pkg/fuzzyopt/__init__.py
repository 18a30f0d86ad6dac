"""Fuzzy-constraint repair-based optimization."""
__version__ = "1.0.0"
