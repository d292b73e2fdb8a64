"""Exact symbolic engine for invariants of conformal Galilei algebras with half-integer ell."""

__version__ = "0.1.0"
