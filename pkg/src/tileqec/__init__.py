"""Tile quantum LDPC codes: construction, Clifford deformation, logical-operator
analysis, analytic bounds, decoding, and circuit-level simulation under biased
Pauli noise."""

__version__ = "0.1.0"
