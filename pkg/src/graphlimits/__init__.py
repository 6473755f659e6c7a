"""Finite-graph tools for distributional limits of bounded-valence graphs.

Rotation-system embeddings and face triangulation, Cheeger constants,
p-capacity and modulus, rooted-ball statistics, and supported points of
finite metric spaces.
"""

from .errors import NonConvergenceError, PreconditionError
from .graph import Graph, RootedSubgraph, ball, build_graph, distances_from, maximal_net, sphere

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "NonConvergenceError",
    "PreconditionError",
    "RootedSubgraph",
    "ball",
    "build_graph",
    "distances_from",
    "maximal_net",
    "sphere",
]
