"""Slow-fast analysis of a Holling type III predator-prey model.

Critical-manifold geometry, canard-point normal forms, first and second
Lyapunov coefficients, stiff simulation of relaxation oscillations and
bifurcation-diagram sweeps.
"""

from canardkit.model import DimensionalParams, Equilibrium, Params, equilibria, vector_field
from canardkit.manifold import FoldPoint, SingularOrbit, fold_points, singular_orbit

__all__ = [
    "DimensionalParams",
    "Equilibrium",
    "FoldPoint",
    "Params",
    "SingularOrbit",
    "equilibria",
    "fold_points",
    "singular_orbit",
    "vector_field",
]

__version__ = "0.1.0"
