"""Alternating negative-momentum GDA with an exact convergence certificate."""

__version__ = "0.1.0"
