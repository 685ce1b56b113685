"""Numerical experiments on the Clifford torus as a Lagrangian self-shrinker."""

from .errors import ShrinkerLabError

__all__ = ["ShrinkerLabError"]
__version__ = "0.1.0"
