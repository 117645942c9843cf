"""Spatial-constraint graph over patches.

Every pair of patches carries a reference distance xi; a candidate's part
arrangement is scored by how far the observed pairwise distances deviate
from those references, through a Gaussian-shaped penalty with stiffness K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import MissingPosition

Position = tuple[float, float]


@dataclass(frozen=True)
class GraphEdge:
    i: int
    j: int
    xi: float


@dataclass(frozen=True)
class SpatialGraph:
    """Complete graph over patch ids; positions are patch centers relative
    to the object-box center."""

    node_positions: dict[int, Position]
    edges: tuple[GraphEdge, ...]
    stiffness: float

    def __post_init__(self):
        if self.stiffness < 0:
            raise ValueError("stiffness must be >= 0")
        for e in self.edges:
            if e.i == e.j:
                raise ValueError("self-edges are not allowed")
            if e.xi < 0:
                raise ValueError("reference distances must be >= 0")


def _distance(a: Position, b: Position) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def build_graph(positions: Mapping[int, Position], stiffness: float) -> SpatialGraph:
    """Complete graph whose references are the current pairwise distances."""
    ids = sorted(positions)
    edges = tuple(
        GraphEdge(i, j, _distance(positions[i], positions[j]))
        for a, i in enumerate(ids) for j in ids[a + 1:]
    )
    return SpatialGraph(dict(positions), edges, stiffness)


def spatial_likelihood(d: float, xi: float, k: float) -> float:
    """exp(-k * (d - xi)^2): 1 at the reference distance, decaying with
    deviation."""
    return math.exp(-k * (d - xi) ** 2)


def graph_score(g: SpatialGraph, positions: Mapping[int, Position]) -> float:
    """Geometric mean of the pairwise likelihoods; 1 for single-patch graphs.

    Computed in log space so heavy deviations cannot underflow the mean.
    """
    if not g.edges:
        return 1.0
    total = 0.0
    for e in g.edges:
        if e.i not in positions or e.j not in positions:
            raise MissingPosition(f"positions missing for edge ({e.i}, {e.j})")
        d = _distance(positions[e.i], positions[e.j])
        total += (d - e.xi) ** 2
    return math.exp(-g.stiffness * total / len(g.edges))


def update_references(g: SpatialGraph, observed_positions: Mapping[int, Position],
                      rate: float) -> SpatialGraph:
    """Blend each reference toward the observed pairwise distance and adopt
    the observed node positions."""
    for node in g.node_positions:
        if node not in observed_positions:
            raise MissingPosition(f"no observed position for node {node}")
    edges = tuple(
        GraphEdge(e.i, e.j,
                  (1.0 - rate) * e.xi
                  + rate * _distance(observed_positions[e.i], observed_positions[e.j]))
        for e in g.edges
    )
    return SpatialGraph({n: observed_positions[n] for n in g.node_positions},
                        edges, g.stiffness)
