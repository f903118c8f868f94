"""Verification toolkit for discrete Schrodinger lower-bound machinery:
weighted operator identities, unitary lattice evolutions, decay-rate scans,
and an exact two-dimensional stationary counterexample."""

__version__ = "0.1.0"
