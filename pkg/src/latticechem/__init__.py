"""Desk-scale numerical toolkit for a cold-atom quantum-chemistry simulator."""

__version__ = "0.1.0"
