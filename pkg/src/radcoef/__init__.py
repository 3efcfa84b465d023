"""Rational changes of variables for differential equations with radical coefficients."""

__version__ = "0.1.0"
