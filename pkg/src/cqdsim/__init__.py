"""Simulator for controlled quantum dialogue and related secure direct communication protocols."""

__version__ = "0.1.0"
