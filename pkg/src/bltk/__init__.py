"""Numerical toolkit for multilinear kj-plane estimates.

Subpackages cover wedge-norm calculus, origin-symmetric ellipsoid duality,
visibility of polynomial zero sets, translation-averaged intersection
identities, Brascamp-Lieb constants, and slab-configuration functionals,
plus a deterministic CLI (`bltk`) that reports JSON or CSV.
"""

__version__ = "0.1.0"

from . import errors  # noqa: F401
