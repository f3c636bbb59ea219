"""Numerical construction of an injective Brody curve inside the forward Julia
set of a hyperbolic generalized Hénon map."""

from .henon import DEFAULT_MAP, AffinePoint, HenonMap, Polynomial, ProjectivePoint

__all__ = ["DEFAULT_MAP", "AffinePoint", "HenonMap", "Polynomial", "ProjectivePoint"]
