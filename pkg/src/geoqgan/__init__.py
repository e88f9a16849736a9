"""Hybrid quantum-classical GANs for geometrically constrained K4 graph generation."""

__version__ = "0.1.0"
