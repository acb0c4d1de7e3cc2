"""Exact certification that the planar equal-mass three-body problem has no
motions with exactly one constant mutual distance."""

__version__ = "0.1.0"
