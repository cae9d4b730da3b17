"""Hitting-time tails of radial Dunkl processes in Weyl chambers."""

__version__ = "0.1.0"
