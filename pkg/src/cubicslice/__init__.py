"""Linearization radii, bifurcation measures and potentials on slices of cubic polynomials."""

import os

import numba

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is too old for numba; fall back to its own thread pool
    numba.config.THREADING_LAYER = "workqueue"

from .family import CubicSlicePoint, UnmarkedCoords, coordinates, eval_cubic, fiber_cardinality  # noqa: E402
from .grid import GridField, GridSpec  # noqa: E402
from .parabolic import DiracMeasure, UPoly, cq_poly, cq_roots, parabolic_measure  # noqa: E402
from .rotation import RotationNumber, golden_mean  # noqa: E402
from .series import CoeffSequence, RadiusEstimate, hadamard_radius, linearize  # noqa: E402

__all__ = [
    "CoeffSequence",
    "CubicSlicePoint",
    "DiracMeasure",
    "GridField",
    "GridSpec",
    "RadiusEstimate",
    "RotationNumber",
    "UPoly",
    "UnmarkedCoords",
    "coordinates",
    "cq_poly",
    "cq_roots",
    "eval_cubic",
    "fiber_cardinality",
    "golden_mean",
    "hadamard_radius",
    "linearize",
    "parabolic_measure",
]
