"""Informativity and identifiability analysis for structured linear dynamic networks."""

__version__ = "0.1.0"
