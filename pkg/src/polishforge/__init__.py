"""PolishForge - Finite-stage presentations of compact Polish spaces."""

__version__ = "0.1.0"
