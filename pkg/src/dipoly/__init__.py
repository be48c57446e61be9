"""Exact dipolyhedral chain calculus for soap-film models."""

from .coefficients import Coeff, Group
from .dipolyhedra import (E4, Cube, Dipolyhedron, JunctionParityError, cone, intersect_cube,
                          intersect_halfspace, project, slice, soap_film)
from .flatnorm import (Decomposition, EmbeddingError, Scaffold, energy_flat, flat_poly,
                       verify_witness)
from .geom import HalfSpace, Simplex, clip, refine
from .natural_norm import (Multicell, NaturalWitness, cartan_residual, cauchy_gap, expand,
                           multicell_norm, prism_approximant, witness_value)
from .polychain import ChainError, PLMap, PolyChain, canonicalize, pushforward

__all__ = [
    "Coeff", "Group", "E4", "Cube", "Dipolyhedron", "JunctionParityError", "cone", "intersect_cube",
    "intersect_halfspace", "project", "slice", "soap_film", "Decomposition", "EmbeddingError",
    "Scaffold", "energy_flat", "flat_poly", "verify_witness", "HalfSpace", "Simplex", "clip",
    "refine", "Multicell", "NaturalWitness", "cartan_residual", "cauchy_gap", "expand",
    "multicell_norm", "prism_approximant", "witness_value", "ChainError", "PLMap", "PolyChain",
    "canonicalize", "pushforward",
]
