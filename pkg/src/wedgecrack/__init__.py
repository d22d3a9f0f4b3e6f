"""Stress intensity factors for cracks in elastic wedges via Wiener-Hopf factorization."""
from .edge import LoadSpec, sif_edge_constant, sif_edge_eigen, solve_edge_general, weight_matrix
from .factor import build_khrapkov, build_scalar_factor
from .halfplane import koiter_gamma, solve_halfplane
from .internal import SifResult, solve_internal
from .kernels import MaterialSpec, WedgeGeometry
from .oracle import sie_solve
from .quadrature import QuadratureSettings

__all__ = [
    "LoadSpec",
    "MaterialSpec",
    "QuadratureSettings",
    "SifResult",
    "WedgeGeometry",
    "build_khrapkov",
    "build_scalar_factor",
    "koiter_gamma",
    "sie_solve",
    "sif_edge_constant",
    "sif_edge_eigen",
    "solve_edge_general",
    "solve_halfplane",
    "solve_internal",
    "weight_matrix",
]

__version__ = "0.1.0"
