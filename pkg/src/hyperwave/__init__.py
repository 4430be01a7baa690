"""Numerical laboratory for self-similar blowup of the focusing cubic wave equation
in hyperboloidal similarity coordinates."""

__version__ = "0.1.0"
