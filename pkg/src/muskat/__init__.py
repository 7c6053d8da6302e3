"""Boundary-integral simulator for a one-phase porous-media interface."""

__version__ = "1.0.0"
