"""Metric structure: edge lengths, harmonic 1-forms, Hodge projection,
homology inner products, Albanese/Jacobian Gram matrices.

Edge lengths may be floats or exact Fractions; exact lengths propagate
through all purely combinatorial-metric computations.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InputError, NumericError
from .graphs import (
    CombinatorialGraph,
    OrientedCycle,
    incidence_vector,
    int_rank,
    spanning_tree_cycle_basis,
)

_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


@dataclass(frozen=True)
class MetricGraph:
    graph: CombinatorialGraph
    lengths: tuple

    def __post_init__(self):
        if len(self.lengths) != self.graph.edge_count:
            raise InputError("one length per edge required")
        for eid, l in enumerate(self.lengths):
            if not l > 0:
                raise InputError(f"edge {eid} has nonpositive length {l}")

    @property
    def total_length(self):
        return sum(self.lengths)

    def lengths_float(self) -> np.ndarray:
        return np.array([float(l) for l in self.lengths])

    def bond_length(self, bond: int):
        return self.lengths[bond // 2]

    def is_rational(self) -> bool:
        return all(isinstance(l, (int, Fraction)) for l in self.lengths)


@dataclass(frozen=True)
class OneForm:
    """Harmonic-per-edge 1-form: one value per edge along its reference
    orientation (units 1/length); the value on the reversed bond is negated."""

    values: tuple[float, ...]

    def bond_value(self, bond: int) -> float:
        v = self.values[bond // 2]
        return v if bond % 2 == 0 else -v

    @staticmethod
    def zero(g: MetricGraph) -> "OneForm":
        return OneForm((0.0,) * g.graph.edge_count)

    def scaled(self, t: float) -> "OneForm":
        return OneForm(tuple(t * v for v in self.values))


@dataclass(frozen=True)
class VertexPotential:
    values: tuple[float, ...]

    def __getitem__(self, v: int) -> float:
        return self.values[v]


def bond_integral(g: MetricGraph, form: OneForm, bond: int) -> float:
    """Integral of the form along one bond."""
    return form.bond_value(bond) * float(g.bond_length(bond))


# --- elementary metric surgeries -----------------------------------------


def suppress_degree_two(g: MetricGraph) -> MetricGraph:
    """Merge chains through degree-2 vertices into single edges.

    A component that is a bare circle is kept as one loop at one vertex.
    Isolated vertices are dropped.
    """
    edges = [list(e) for e in g.graph.edges]
    lengths = list(g.lengths)
    nv = g.graph.vertex_count
    while True:
        deg = [0] * nv
        incident = [[] for _ in range(nv)]
        for i, (a, b) in enumerate(edges):
            deg[a] += 1
            deg[b] += 1
            incident[a].append(i)
            if b != a:
                incident[b].append(i)
        target = None
        for v in range(nv):
            if deg[v] == 2 and len(incident[v]) == 2:
                target = v
                break
        if target is None:
            break
        i1, i2 = incident[target]
        a = edges[i1][0] if edges[i1][1] == target else edges[i1][1]
        b = edges[i2][0] if edges[i2][1] == target else edges[i2][1]
        edges[i1] = [a, b]
        lengths[i1] = lengths[i1] + lengths[i2]
        del edges[i2]
        del lengths[i2]
    used = sorted({v for e in edges for v in e})
    relabel = {v: i for i, v in enumerate(used)}
    new_edges = tuple((relabel[a], relabel[b]) for a, b in edges)
    return MetricGraph(CombinatorialGraph(len(used), new_edges), tuple(lengths))


def split_loops(g: MetricGraph) -> MetricGraph:
    """Replace each loop of length l by two parallel edges of length l/2."""
    edges = []
    lengths = []
    tail_edges = []
    tail_lengths = []
    nv = g.graph.vertex_count
    for (a, b), l in zip(g.graph.edges, g.lengths):
        if a == b:
            half = l / 2 if isinstance(l, Fraction) else l / 2.0
            edges.append((a, nv))
            lengths.append(half)
            tail_edges.append((nv, a))
            tail_lengths.append(half)
            nv += 1
        else:
            edges.append((a, b))
            lengths.append(l)
    return MetricGraph(
        CombinatorialGraph(nv, tuple(edges + tail_edges)),
        tuple(lengths + tail_lengths),
    )


# --- Hodge decomposition ---------------------------------------------------


def form_divergence(g: MetricGraph, form: OneForm) -> list[float]:
    """Vertex-condition defect: sum of form values over bonds ending at v."""
    div = [0.0] * g.graph.vertex_count
    for b in range(g.graph.bond_count):
        div[g.graph.terminus(b)] += form.bond_value(b)
    return div


def is_harmonic(g: MetricGraph, form: OneForm, tol: float = 1e-9) -> bool:
    return max(abs(x) for x in form_divergence(g, form)) <= tol


def hodge_project(g: MetricGraph, beta: OneForm):
    """Unique decomposition beta = d(psi) + harmonic part.

    Returns (psi, harmonic) with psi fixed to 0 at the lowest vertex id of
    each component; cycle integrals of the harmonic part equal those of
    beta.
    """
    gr = g.graph
    nv = gr.vertex_count
    M = np.zeros((nv, nv))
    rhs = np.array(form_divergence(g, beta))
    for b in range(gr.bond_count):
        v, u = gr.terminus(b), gr.origin(b)
        w = 1.0 / float(g.bond_length(b))
        M[v][v] += w
        M[v][u] -= w
    for comp in gr.components():
        anchor = comp[0]
        M[anchor, :] = 0.0
        M[anchor, anchor] = 1.0
        rhs[anchor] = 0.0
    try:
        psi = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - connected inputs
        raise NumericError(f"singular vertex system in Hodge projection: {exc}")
    values = []
    for eid, (a, b) in enumerate(gr.edges):
        dpsi = (psi[b] - psi[a]) / float(g.lengths[eid])
        values.append(float(beta.values[eid]) - dpsi)
    harmonic = OneForm(tuple(values))
    defect = max(abs(x) for x in form_divergence(g, harmonic))
    if defect > 1e-8:
        raise NumericError(f"Hodge projection defect {defect:.2e}")
    return VertexPotential(tuple(float(x) for x in psi)), harmonic


def add_exact_form(alpha: OneForm, psi: VertexPotential, g: MetricGraph) -> OneForm:
    """alpha + d(psi); all cycle fluxes are unchanged."""
    values = []
    for eid, (a, b) in enumerate(g.graph.edges):
        dpsi = (psi[b] - psi[a]) / float(g.lengths[eid])
        values.append(alpha.values[eid] + dpsi)
    return OneForm(tuple(values))


# --- homology inner products ----------------------------------------------


def expand_homology_vector(g: MetricGraph, vec, basis=None):
    """Edge chain (signed multiplicities) of a homology vector in a cycle basis."""
    if basis is None:
        basis = spanning_tree_cycle_basis(g.graph)
    if len(vec) != len(basis):
        raise InputError("homology vector dimension does not match basis")
    chain = [0] * g.graph.edge_count
    for coef, cyc in zip(vec, basis):
        if coef == 0:
            continue
        for e, m in enumerate(incidence_vector(g.graph, cyc)):
            chain[e] += coef * m
    return chain


def chain_inner_product(g: MetricGraph, chain_p, chain_q):
    return sum(
        l * mp * mq for l, mp, mq in zip(g.lengths, chain_p, chain_q) if mp and mq
    )


def homology_inner_product(p, q, g: MetricGraph, basis=None):
    """<p,q> = sum over edges of L(e) times the signed multiplicities."""
    return chain_inner_product(
        g, expand_homology_vector(g, p, basis), expand_homology_vector(g, q, basis)
    )


def cycle_inner_product(g: MetricGraph, c1: OrientedCycle, c2: OrientedCycle):
    return chain_inner_product(
        g, incidence_vector(g.graph, c1), incidence_vector(g.graph, c2)
    )


def albanese_gram(g: MetricGraph, basis: list[OrientedCycle]):
    """Gram matrix of a homology basis of cycles; entries keep the length
    arithmetic (exact for rational lengths)."""
    vecs = [incidence_vector(g.graph, c) for c in basis]
    if int_rank(vecs) != len(basis):
        raise InputError("cycle family is not a homology basis (rank deficient)")
    n = len(basis)
    gram = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            val = chain_inner_product(g, vecs[i], vecs[j])
            gram[i][j] = gram[j][i] = val
    arr = np.array([[float(x) for x in row] for row in gram])
    if n and np.linalg.eigvalsh(arr).min() <= 0:
        raise NumericError("Albanese Gram matrix is not positive definite")
    return gram


def gram_as_array(gram) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in gram])


def jacobian_gram(g: MetricGraph, basis: list[OrientedCycle]) -> np.ndarray:
    """Gram of the dual basis of harmonic forms under the L2 pairing.

    Computed by explicitly building the dual harmonic forms and integrating,
    which keeps it an independent route from inverting albanese_gram.
    """
    n = len(basis)
    vecs = [incidence_vector(g.graph, c) for c in basis]
    if int_rank(vecs) != n:
        raise InputError("cycle family is not a homology basis (rank deficient)")
    L = g.lengths_float()
    M = np.array(vecs, dtype=float)  # n x E signed multiplicities
    G = (M * L) @ M.T
    duals = np.linalg.solve(G, M)  # rows: edge values of the dual forms
    return (duals * L) @ duals.T


def flux(alpha: OneForm, p, g: MetricGraph, basis=None) -> float:
    """Magnetic flux 2*pi * integral of alpha over the homology class p."""
    chain = expand_homology_vector(g, p, basis)
    total = sum(
        float(alpha.values[e]) * float(g.lengths[e]) * m
        for e, m in enumerate(chain)
        if m
    )
    return 2.0 * math.pi * total


def cycle_flux(alpha: OneForm, cyc: OrientedCycle, g: MetricGraph) -> float:
    total = sum(bond_integral(g, alpha, b) for b in cyc.bonds)
    return 2.0 * math.pi * total


def harmonic_form_with_fluxes(g: MetricGraph, basis, fluxes) -> OneForm:
    """Harmonic form whose flux over basis[i] is fluxes[i] (flux = 2*pi*integral)."""
    n = len(basis)
    vecs = [incidence_vector(g.graph, c) for c in basis]
    L = g.lengths_float()
    M = np.array(vecs, dtype=float)
    G = (M * L) @ M.T
    target = np.array([float(f) for f in fluxes]) / (2.0 * math.pi)
    x = np.linalg.solve(G, target)
    values = x @ M
    form = OneForm(tuple(float(v) for v in values))
    if not is_harmonic(g, form):
        raise NumericError("constructed form violates the vertex condition")
    return form


def generic_one_form(g: MetricGraph, seed: int = 0) -> OneForm:
    """Harmonic form with rationally independent basis fluxes.

    Basis fluxes are square roots of distinct primes scaled by
    1/(4*pi*max) so every basis frequency lies in (0,1); the seed permutes
    the prime assignment.
    """
    basis = spanning_tree_cycle_basis(g.graph)
    n = len(basis)
    if n == 0:
        raise InputError("tree has trivial Bloch data")
    if n > len(_PRIMES):
        raise InputError(f"first Betti number {n} exceeds supported maximum")
    idx = list(range(n))
    random.Random(seed).shuffle(idx)
    raw = [math.sqrt(_PRIMES[i]) for i in idx]
    fluxes = [r / (4.0 * math.pi * max(raw)) for r in raw]
    return harmonic_form_with_fluxes(g, basis, fluxes)


def basis_fluxes(g: MetricGraph, form: OneForm, basis=None) -> list[float]:
    if basis is None:
        basis = spanning_tree_cycle_basis(g.graph)
    return [cycle_flux(form, c, g) for c in basis]


# --- tree reconstruction from leaf distances --------------------------------


@dataclass(frozen=True)
class MetricTree:
    graph: MetricGraph
    leaves: tuple[int, ...]


def _check_tree_metric(D, tol):
    m = len(D)
    for i in range(m):
        if abs(float(D[i][i])) > tol:
            raise InputError(f"nonzero self-distance at leaf {i}")
        for j in range(i + 1, m):
            if abs(float(D[i][j]) - float(D[j][i])) > tol:
                raise InputError(f"distance matrix not symmetric at ({i},{j})")
            if float(D[i][j]) <= tol:
                raise InputError(f"coincident leaves {i} and {j}")
    for i, j, k in _triples(m):
        if float(D[i][j]) > float(D[i][k]) + float(D[k][j]) + tol:
            raise InputError(f"triangle inequality fails on ({i},{j},{k})")
    for q in _quadruples(m):
        i, j, k, l = q
        s = sorted([D[i][j] + D[k][l], D[i][k] + D[j][l], D[i][l] + D[j][k]])
        if abs(float(s[2]) - float(s[1])) > tol:
            raise InputError(f"four-point condition fails on quadruple {q}")


def _triples(m):
    for i in range(m):
        for j in range(m):
            for k in range(m):
                if len({i, j, k}) == 3:
                    yield i, j, k


def _quadruples(m):
    from itertools import combinations

    return combinations(range(m), 4)


class _TreeBuilder:
    def __init__(self, n_leaves):
        self.adj: dict[int, dict[int, float]] = {v: {} for v in range(n_leaves)}
        self.next_vertex = n_leaves

    def add_edge(self, u, v, l):
        self.adj.setdefault(u, {})
        self.adj.setdefault(v, {})
        self.adj[u][v] = l
        self.adj[v][u] = l

    def remove_edge(self, u, v):
        del self.adj[u][v]
        del self.adj[v][u]

    def new_vertex(self):
        v = self.next_vertex
        self.next_vertex += 1
        self.adj[v] = {}
        return v

    def path(self, u, w):
        prev = {u: None}
        stack = [u]
        while stack:
            v = stack.pop()
            if v == w:
                break
            for x in self.adj[v]:
                if x not in prev:
                    prev[x] = v
                    stack.append(x)
        if w not in prev:
            raise NumericError("tree became disconnected")
        path = [w]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        return list(reversed(path))

    def locate(self, u, w, x, tol):
        """Point at distance x from u along the path to w.

        Returns ('vertex', v) or ('edge', a, b, offset_from_a).
        """
        path = self.path(u, w)
        acc = 0.0
        for a, b in zip(path, path[1:]):
            l = self.adj[a][b]
            if x <= acc + tol:
                return ("vertex", a)
            if x < acc + l - tol:
                return ("edge", a, b, x - acc)
            acc += l
        return ("vertex", path[-1])

    def subtree_leaf(self, root, banned, n_leaves):
        """A leaf id reachable from root without entering banned vertices."""
        seen = {root} | set(banned)
        stack = [root]
        while stack:
            v = stack.pop()
            if v < n_leaves and v != root:
                return v
            for x in self.adj[v]:
                if x not in seen:
                    seen.add(x)
                    stack.append(x)
        return None


def tree_from_leaf_distances(D, tol: float = 1e-9) -> MetricTree:
    """Reconstruct the metric tree realizing a leaf distance matrix.

    Implements the constructive induction: three-leaf branch lengths
    (d_ij + d_ik - d_jk)/2, then iterative attachment of further leaves.
    Inner vertices of the true tree must have degree >= 3.
    """
    D = [[float(x) for x in row] for row in D]
    m = len(D)
    if m < 2:
        raise InputError("need at least two leaves")
    _check_tree_metric(D, tol)
    tb = _TreeBuilder(m)
    tb.add_edge(0, 1, D[0][1])
    for t in range(2, m):
        i, j = 0, 1
        while True:
            x = (D[i][t] + D[i][j] - D[j][t]) / 2.0
            lt = D[i][t] - x
            if lt <= tol:
                raise InputError(
                    f"leaf {t} would attach with nonpositive branch length"
                )
            loc = tb.locate(i, j, x, tol)
            if loc[0] == "edge":
                _, a, b, off = loc
                u = tb.new_vertex()
                l = tb.adj[a][b]
                tb.remove_edge(a, b)
                tb.add_edge(a, u, off)
                tb.add_edge(u, b, l - off)
                tb.add_edge(u, t, lt)
                break
            u = loc[1]
            if u == i or u == j:
                raise InputError(
                    f"leaf {t} branches at leaf {u}: inner degree < 3 in input"
                )
            path_vertices = tb.path(i, j)
            k = tb.subtree_leaf(u, path_vertices, m)
            if k is None or k == t:
                tb.add_edge(u, t, lt)
                break
            j = k
    edges = []
    lengths = []
    for u in sorted(tb.adj):
        for v, l in sorted(tb.adj[u].items()):
            if u < v:
                edges.append((u, v))
                lengths.append(l)
    mg = MetricGraph(CombinatorialGraph(tb.next_vertex, tuple(edges)), tuple(lengths))
    tree = MetricTree(mg, tuple(range(m)))
    realized = leaf_distance_matrix(tree)
    for i in range(m):
        for j in range(m):
            if abs(realized[i][j] - D[i][j]) > 1e-7:
                raise NumericError(
                    f"reconstructed tree misrealizes d({i},{j}): "
                    f"{realized[i][j]} vs {D[i][j]}"
                )
    return tree


def leaf_distance_matrix(tree: MetricTree):
    g = tree.graph
    adj = {v: {} for v in range(g.graph.vertex_count)}
    for eid, (a, b) in enumerate(g.graph.edges):
        adj[a][b] = float(g.lengths[eid])
        adj[b][a] = float(g.lengths[eid])
    out = []
    for s in tree.leaves:
        dist = {s: 0.0}
        stack = [s]
        while stack:
            v = stack.pop()
            for w, l in adj[v].items():
                if w not in dist:
                    dist[w] = dist[v] + l
                    stack.append(w)
        out.append([dist[t] for t in tree.leaves])
    return out
