"""Geometric-operator (GO) features for 2D profiles and 3D meshes, and the
surrogate, subspace, sensitivity and quality studies built on them."""

__version__ = "0.1.0"
