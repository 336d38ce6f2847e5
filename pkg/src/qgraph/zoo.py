"""Standard example graphs used across tests, docs and the CLI."""

from __future__ import annotations

from fractions import Fraction

from .graphs import CombinatorialGraph
from .metric import MetricGraph


def circle(length=1.0) -> MetricGraph:
    return MetricGraph(CombinatorialGraph(1, ((0, 0),)), (length,))


def theta(l1=1, l2=1, l3=1) -> MetricGraph:
    return MetricGraph(CombinatorialGraph(2, ((0, 1), (0, 1), (0, 1))), (l1, l2, l3))


def figure_eight(l1=1, l2=1) -> MetricGraph:
    return MetricGraph(CombinatorialGraph(1, ((0, 0), (0, 0))), (l1, l2))


def dumbbell(l1=1, l2=1, bridge=1) -> MetricGraph:
    return MetricGraph(
        CombinatorialGraph(2, ((0, 0), (1, 1), (0, 1))), (l1, l2, bridge)
    )


def complete_graph(n: int) -> CombinatorialGraph:
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n))
    return CombinatorialGraph(n, edges)


def k4(lengths=None) -> MetricGraph:
    g = complete_graph(4)
    if lengths is None:
        lengths = (1,) * 6
    return MetricGraph(g, tuple(lengths))


def k5() -> CombinatorialGraph:
    return complete_graph(5)


def k33() -> CombinatorialGraph:
    edges = tuple((i, 3 + j) for i in range(3) for j in range(3))
    return CombinatorialGraph(6, edges)


def prism(lengths=None) -> MetricGraph:
    """Triangular prism: two triangles joined by a matching."""
    edges = ((0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5))
    if lengths is None:
        lengths = (1,) * 9
    return MetricGraph(CombinatorialGraph(6, edges), tuple(lengths))


def cube(lengths=None) -> MetricGraph:
    """3-cube; vertices are binary triples ordered 000..111."""
    verts = list(range(8))
    edges = []
    for v in verts:
        for bit in (1, 2, 4):
            w = v ^ bit
            if v < w:
                edges.append((v, w))
    if lengths is None:
        lengths = (1,) * 12
    return MetricGraph(CombinatorialGraph(8, tuple(edges)), tuple(lengths))


def star(n_leaves: int, lengths=None) -> MetricGraph:
    edges = tuple((0, i + 1) for i in range(n_leaves))
    if lengths is None:
        lengths = (1,) * n_leaves
    return MetricGraph(CombinatorialGraph(n_leaves + 1, edges), tuple(lengths))


def path_graph(n_edges: int, lengths=None) -> MetricGraph:
    edges = tuple((i, i + 1) for i in range(n_edges))
    if lengths is None:
        lengths = (1,) * n_edges
    return MetricGraph(CombinatorialGraph(n_edges + 1, edges), tuple(lengths))


def cancellation_example() -> MetricGraph:
    """Quantum graph whose trace-formula terms at length 23/5 cancel exactly.

    All four vertices have degree 4; the orbit doubling the 23/10 edge has
    coefficient 23/20 while four one-backtrack orbits contribute -23/80
    each, so the aggregate at 23/5 vanishes identically.
    """
    edges = ((0, 1), (0, 2), (0, 3), (0, 3), (1, 2), (1, 3), (1, 3), (2, 2))
    lengths = (
        Fraction(1),
        Fraction(1),
        Fraction(6, 5),
        Fraction(7, 5),
        Fraction(23, 10),
        Fraction(3),
        Fraction(4),
        Fraction(5),
    )
    return MetricGraph(CombinatorialGraph(4, edges), lengths)


def hexagon() -> CombinatorialGraph:
    return CombinatorialGraph(6, tuple((i, (i + 1) % 6) for i in range(6)))


SEIDEL_C6_PATTERN = (
    (0, 0, 1, 0, 1, 1),
    (1, 1, 0, 1, 0, 0),
    (1, 1, 0, 0, 1, 0),
    (1, 1, 1, 0, 0, 0),
    (0, 0, 1, 1, 0, 1),
    (0, 0, 0, 1, 1, 1),
)
"""Half-adjacency pattern between two hexagons whose Seidel switch yields a
non-isomorphic graph-isospectral pair of 5-regular graphs on 12 vertices."""


def block_chain_example() -> MetricGraph:
    """Two K4 blocks and one loop joined by bridges (block-tree test case)."""
    # vertices 0..3: first K4, 4..7: second K4, 8: loop anchor
    edges = []
    lengths = []
    for i in range(4):
        for j in range(i + 1, 4):
            edges.append((i, j))
            lengths.append(Fraction(1))
    for i in range(4):
        for j in range(i + 1, 4):
            edges.append((4 + i, 4 + j))
            lengths.append(Fraction(1))
    edges.append((8, 8))
    lengths.append(Fraction(2))
    edges.append((0, 4))  # bridge between the K4s
    lengths.append(Fraction(3, 2))
    edges.append((5, 8))  # bridge to the loop
    lengths.append(Fraction(5, 2))
    return MetricGraph(CombinatorialGraph(9, tuple(edges)), tuple(lengths))
