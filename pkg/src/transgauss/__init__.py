"""Translational structures on round spheres, their Gauss maps and curvature,
a numerical Gauss-Bonnet check, and sampled rigidity certificates."""
from . import beltrami, curvature, gauss_bonnet, rigidity, sphere, structures, surfaces
from .errors import GeometryError
from .structures import FrameStructure, ParallelTransportStructure, QuaternionStructure
from .surfaces import (ParametricImmersion, make_clifford, make_geodesic_sphere, make_grid,
                       make_perturbed_sphere)

__version__ = "0.1.0"

__all__ = [
    "FrameStructure", "GeometryError", "ParallelTransportStructure", "ParametricImmersion",
    "QuaternionStructure", "beltrami", "curvature", "gauss_bonnet", "make_clifford",
    "make_geodesic_sphere", "make_grid", "make_perturbed_sphere", "rigidity", "sphere",
    "structures", "surfaces",
]
