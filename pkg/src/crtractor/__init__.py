"""Pseudo-Hermitian geometry, generalized Fefferman metrics, and conformal
tractor calculus on chart-local example CR manifolds, with a verification
harness that checks every closed-form identity against an independent
coordinate-geometry oracle."""

from ._kernel import IMPLEMENTATION as kernel_implementation  # noqa: F401

__version__ = "0.1.0"
