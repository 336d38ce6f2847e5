"""Combinatorial multigraph layer.

Vertices are integers 0..V-1.  Edges are unordered pairs (loops and parallel
edges allowed) with stable integer ids 0..E-1.  Every edge e carries two
bonds (oriented edges): bond 2e runs from edges[e][0] to edges[e][1], bond
2e+1 is its reversal.
"""

from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass
from fractions import Fraction

from .errors import InconclusiveError, InputError


@dataclass(frozen=True)
class CombinatorialGraph:
    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        for eid, (a, b) in enumerate(self.edges):
            if not (0 <= a < self.vertex_count and 0 <= b < self.vertex_count):
                raise InputError(
                    f"edge {eid} endpoint out of range: ({a},{b}) with "
                    f"{self.vertex_count} vertices"
                )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def bond_count(self) -> int:
        return 2 * len(self.edges)

    # bond helpers -----------------------------------------------------
    @staticmethod
    def edge_of(bond: int) -> int:
        return bond // 2

    @staticmethod
    def reverse(bond: int) -> int:
        return bond ^ 1

    def origin(self, bond: int) -> int:
        a, b = self.edges[bond // 2]
        return a if bond % 2 == 0 else b

    def terminus(self, bond: int) -> int:
        a, b = self.edges[bond // 2]
        return b if bond % 2 == 0 else a

    # derived structure ------------------------------------------------
    def degree(self, v: int) -> int:
        d = 0
        for a, b in self.edges:
            if a == v:
                d += 1
            if b == v:
                d += 1
        return d

    def degrees(self) -> list[int]:
        d = [0] * self.vertex_count
        for a, b in self.edges:
            d[a] += 1
            d[b] += 1
        return d

    def bonds_from(self, v: int) -> list[int]:
        """Bonds with origin v, in bond-id order."""
        out = []
        for eid, (a, b) in enumerate(self.edges):
            if a == v:
                out.append(2 * eid)
            if b == v:
                out.append(2 * eid + 1)
        return out

    def components(self) -> list[list[int]]:
        """Connected components as sorted vertex lists (isolated vertices count)."""
        seen = [False] * self.vertex_count
        adj = defaultdict(list)
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        comps = []
        for s in range(self.vertex_count):
            if seen[s]:
                continue
            comp = []
            stack = [s]
            seen[s] = True
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def betti_number(self) -> int:
        return len(self.edges) - self.vertex_count + len(self.components())


@dataclass(frozen=True)
class OrientedCycle:
    """Closed walk with no repeated edges or vertices, as a bond sequence."""

    bonds: tuple[int, ...]

    def __len__(self):
        return len(self.bonds)

    def edge_ids(self) -> frozenset[int]:
        return frozenset(b // 2 for b in self.bonds)

    def reversed_(self) -> "OrientedCycle":
        return OrientedCycle(tuple((b ^ 1) for b in reversed(self.bonds)))


def check_cycle(g: CombinatorialGraph, cycle: OrientedCycle) -> None:
    bonds = cycle.bonds
    if not bonds:
        raise InputError("empty cycle")
    seen_edges = set()
    seen_vertices = set()
    for i, b in enumerate(bonds):
        nxt = bonds[(i + 1) % len(bonds)]
        if g.terminus(b) != g.origin(nxt):
            raise InputError(f"cycle bonds do not chain at position {i}")
        e = b // 2
        if e in seen_edges:
            raise InputError(f"cycle repeats edge {e}")
        seen_edges.add(e)
        v = g.origin(b)
        if v in seen_vertices:
            raise InputError(f"cycle repeats vertex {v}")
        seen_vertices.add(v)


def canonical_cycle(g: CombinatorialGraph, bonds) -> OrientedCycle:
    """Canonical representative: lowest edge id first, orientation breaking
    ties by the following edge ids."""
    bonds = tuple(bonds)
    cands = []
    for seq in (bonds, tuple((b ^ 1) for b in reversed(bonds))):
        eids = [b // 2 for b in seq]
        i = eids.index(min(eids))
        rot = seq[i:] + seq[:i]
        cands.append(rot)
    return OrientedCycle(min(cands, key=lambda s: ([b // 2 for b in s], s)))


def incidence_vector(g: CombinatorialGraph, cycle: OrientedCycle) -> tuple[int, ...]:
    """Signed edge multiplicities of a cycle (+1 along reference orientation)."""
    vec = [0] * g.edge_count
    for b in cycle.bonds:
        vec[b // 2] += 1 if b % 2 == 0 else -1
    return tuple(vec)


# --- spanning tree and homology ---------------------------------------


def spanning_forest(g: CombinatorialGraph):
    """BFS forest in edge-id order.

    Returns (parent_bond, tree_edges, nontree_edges) where parent_bond[v] is
    the bond pointing from the parent of v to v (None at roots), tree_edges
    is a set of edge ids and nontree_edges the sorted rest (loops included).
    """
    parent_bond: list[int | None] = [None] * g.vertex_count
    tree_edges: set[int] = set()
    visited = [False] * g.vertex_count
    adj = defaultdict(list)
    for eid, (a, b) in enumerate(g.edges):
        adj[a].append(2 * eid)
        adj[b].append(2 * eid + 1)
    for root in range(g.vertex_count):
        if visited[root]:
            continue
        visited[root] = True
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for b in sorted(adj[v]):
                w = g.terminus(b)
                if not visited[w]:
                    visited[w] = True
                    parent_bond[w] = b
                    tree_edges.add(b // 2)
                    queue.append(w)
    nontree = sorted(set(range(g.edge_count)) - tree_edges)
    return parent_bond, tree_edges, nontree


def tree_path_bonds(g: CombinatorialGraph, parent_bond, u: int, w: int) -> list[int]:
    """Bond path from u to w inside the spanning forest."""
    anc_u = [u]
    v = u
    while parent_bond[v] is not None:
        v = g.origin(parent_bond[v])
        anc_u.append(v)
    anc_set = {v: i for i, v in enumerate(anc_u)}
    path_w = []
    v = w
    while v not in anc_set:
        b = parent_bond[v]
        if b is None:
            raise InputError(f"vertices {u} and {w} lie in different components")
        path_w.append(b)
        v = g.origin(b)
    # up from u to the meeting vertex, then down to w
    up = [parent_bond[x] ^ 1 for x in anc_u[: anc_set[v]]]
    return up + list(reversed(path_w))


def spanning_tree_cycle_basis(g: CombinatorialGraph) -> list[OrientedCycle]:
    """One oriented cycle per non-tree edge; a homology basis.

    For disconnected graphs the per-component bases are concatenated (the
    non-tree edge order is global, so coordinates stay well defined).
    """
    parent_bond, _, nontree = spanning_forest(g)
    basis = []
    for eid in nontree:
        a, b = g.edges[eid]
        if a == b:
            basis.append(OrientedCycle((2 * eid,)))
        else:
            back = tree_path_bonds(g, parent_bond, b, a)
            basis.append(OrientedCycle(tuple([2 * eid] + back)))
    for c in basis:
        check_cycle(g, c)
    return basis


def fundamental_edges(g: CombinatorialGraph) -> list[int]:
    """Non-tree edge ids indexing the homology coordinates."""
    _, _, nontree = spanning_forest(g)
    return nontree


def walk_homology(g: CombinatorialGraph, bonds, nontree=None) -> tuple[int, ...]:
    """Homology coordinates of a closed walk in the spanning-tree basis."""
    if nontree is None:
        nontree = fundamental_edges(g)
    index = {e: i for i, e in enumerate(nontree)}
    vec = [0] * len(nontree)
    for b in bonds:
        i = index.get(b // 2)
        if i is not None:
            vec[i] += 1 if b % 2 == 0 else -1
    return tuple(vec)


# --- small exact linear algebra ---------------------------------------


def int_rank(rows) -> int:
    """Rank over Q of integer row vectors."""
    mat = [list(map(Fraction, r)) for r in rows]
    rank = 0
    ncols = len(mat[0]) if mat else 0
    for col in range(ncols):
        piv = None
        for r in range(rank, len(mat)):
            if mat[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        pr = mat[rank]
        inv = pr[col]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                f = mat[r][col] / inv
                mat[r] = [x - f * y for x, y in zip(mat[r], pr)]
        rank += 1
        if rank == len(mat):
            break
    return rank


def int_det(rows) -> Fraction:
    """Determinant over Q of a square integer matrix."""
    mat = [list(map(Fraction, r)) for r in rows]
    n = len(mat)
    det = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if mat[r][col] != 0:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            mat[col], mat[piv] = mat[piv], mat[col]
            det = -det
        det *= mat[col][col]
        inv = mat[col][col]
        for r in range(col + 1, n):
            if mat[r][col] != 0:
                f = mat[r][col] / inv
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
    return det


# --- simple cycle enumeration ------------------------------------------


def enumerate_simple_cycles(g: CombinatorialGraph) -> list[OrientedCycle]:
    """All simple cycles, each once up to rotation and reversal."""
    bonds_at = [g.bonds_from(v) for v in range(g.vertex_count)]
    found: dict[tuple[int, ...], OrientedCycle] = {}

    def close(path):
        cyc = canonical_cycle(g, path)
        found.setdefault(cyc.bonds, cyc)

    for s in range(g.vertex_count):
        # paths from s through vertices > s only
        stack = [(s, (), frozenset())]
        while stack:
            v, path, used_edges = stack.pop()
            for b in bonds_at[v]:
                e = b // 2
                if e in used_edges:
                    continue
                w = g.terminus(b)
                if w == s:
                    close(path + (b,))
                elif w > s and all(g.origin(x) != w for x in path):
                    stack.append((w, path + (b,), used_edges | {e}))
    cycles = sorted(found.values(), key=lambda c: (len(c.bonds), c.bonds))
    return cycles


# --- overlap ------------------------------------------------------------


def overlap(c1: OrientedCycle, c2: OrientedCycle):
    """Shared edges split by traversal direction: (positive, negative)."""
    dir1 = {b // 2: b % 2 for b in c1.bonds}
    pos, neg = set(), set()
    for b in c2.bonds:
        e = b // 2
        if e in dir1:
            if dir1[e] == b % 2:
                pos.add(e)
            else:
                neg.add(e)
    return frozenset(pos), frozenset(neg)


# --- block structure ----------------------------------------------------


@dataclass(frozen=True)
class BlockTree:
    blocks: tuple[frozenset[int], ...]
    bridges: tuple[int, ...]
    cut_vertices: tuple[int, ...]

    def nodes(self):
        return [("block", i) for i in range(len(self.blocks))] + [
            ("bridge", e) for e in self.bridges
        ]

    def node_vertices(self, g: CombinatorialGraph, node) -> frozenset[int]:
        kind, i = node
        if kind == "bridge":
            return frozenset(g.edges[i])
        verts = set()
        for e in self.blocks[i]:
            verts.update(g.edges[e])
        return frozenset(verts)

    def adjacency(self, g: CombinatorialGraph):
        """Bipartite cut-tree: edges between cut vertices and incident nodes."""
        edges = []
        for node in self.nodes():
            vs = self.node_vertices(g, node)
            for v in self.cut_vertices:
                if v in vs:
                    edges.append((("cut", v), node))
        return edges


def block_decomposition(g: CombinatorialGraph) -> BlockTree:
    """Blocks are edge-sharing closures of cycles; loops are singleton blocks;
    edges on no cycle are bridges."""
    loops = [eid for eid, (a, b) in enumerate(g.edges) if a == b]
    # iterative DFS biconnected components on the loopless part
    adj = defaultdict(list)
    for eid, (a, b) in enumerate(g.edges):
        if a != b:
            adj[a].append((b, eid))
            adj[b].append((a, eid))
    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    comps: list[set[int]] = []
    estack: list[int] = []
    timer = itertools.count()
    for root in range(g.vertex_count):
        if root in disc:
            continue
        stack = [(root, -1, iter(adj[root]))]
        disc[root] = low[root] = next(timer)
        while stack:
            v, in_edge, it = stack[-1]
            advanced = False
            for w, eid in it:
                if eid == in_edge:
                    continue
                if w not in disc:
                    disc[w] = low[w] = next(timer)
                    estack.append(eid)
                    stack.append((w, eid, iter(adj[w])))
                    advanced = True
                    break
                elif disc[w] < disc[v]:
                    estack.append(eid)
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if stack:
                pv = stack[-1][0]
                low[pv] = min(low[pv], low[v])
                if low[v] >= disc[pv]:
                    comp = set()
                    while estack:
                        comp.add(estack.pop())
                        if in_edge in comp:
                            break
                    comps.append(comp)
    blocks = [frozenset(c) for c in comps if len(c) >= 2]
    blocks += [frozenset([e]) for e in loops]
    bridges = tuple(sorted(c.pop() for c in comps if len(c) == 1))
    blocks.sort(key=lambda s: sorted(s))
    # cut vertices: shared by two nodes, or inside a node and also on a bridge
    membership = defaultdict(list)
    for i, blk in enumerate(blocks):
        verts = set()
        for e in blk:
            verts.update(g.edges[e])
        for v in verts:
            membership[v].append(("block", i))
    for e in bridges:
        for v in g.edges[e]:
            membership[v].append(("bridge", e))
    cuts = tuple(sorted(v for v, mem in membership.items() if len(mem) >= 2))
    return BlockTree(tuple(blocks), bridges, cuts)


def cut_tree_signature(g: CombinatorialGraph, bt: BlockTree) -> tuple:
    """Canonical (AHU) signature of the block/cut tree with node labels.

    Blocks are labeled by (edge count, loop flag); bridges by 'bridge'.
    Two graphs have isomorphic block structures iff signatures match.
    """
    nodes = {}
    for i, blk in enumerate(bt.blocks):
        is_loop = len(blk) == 1 and len(set(g.edges[next(iter(blk))])) == 1
        nodes[("block", i)] = ("block", len(blk), is_loop)
    for e in bt.bridges:
        nodes[("bridge", e)] = ("bridge",)
    for v in bt.cut_vertices:
        nodes[("cut", v)] = ("cut",)
    adj = defaultdict(set)
    for a, b in bt.adjacency(g):
        adj[a].add(b)
        adj[b].add(a)

    def ahu(node, parent):
        subs = sorted(ahu(c, node) for c in adj[node] if c != parent)
        return (nodes[node], tuple(subs))

    if not nodes:
        return ()
    # root at the canonically smallest label for determinism
    roots = sorted(nodes, key=lambda n: (nodes[n], n))
    return min(ahu(r, None) for r in roots)


# --- non-positive basis search (MacLane) --------------------------------


class _ParityUF:
    """Union-find with parity for orientation constraints."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.par = [0] * n

    def find(self, x):
        p = []
        while self.parent[x] != x:
            p.append(x)
            x = self.parent[x]
        s = 0
        for y in reversed(p):
            s ^= self.par[y]
            self.parent[y] = x
            self.par[y] = s
        return x

    def relation(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            return None
        return self.par[a] ^ self.par[b]

    def union(self, a, b, parity) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return (self.par[a] ^ self.par[b]) == parity
        self.parent[ra] = rb
        self.par[ra] = self.par[a] ^ self.par[b] ^ parity
        return True

    def snapshot(self):
        return list(self.parent), list(self.par)

    def restore(self, snap):
        self.parent, self.par = list(snap[0]), list(snap[1])


def nonpositive_basis_search(
    g: CombinatorialGraph, node_cap: int = 2_000_000
) -> list[OrientedCycle] | None:
    """Homology basis of oriented cycles with no pairwise positive overlap,
    or None if no such basis exists (iff the graph is non-planar).

    Exhaustive over independent cycle subsets, smallest total edge count
    first, pruned by MacLane sparsity (each edge in at most 2 basis cycles)
    and by orientation consistency (2-coloring with parity).
    """
    n = g.betti_number()
    if n == 0:
        return []
    cycles = enumerate_simple_cycles(g)
    m = len(cycles)
    vecs = [incidence_vector(g, c) for c in cycles]
    # pairwise orientation constraints: None=free, 0=same, 1=opposite, 2=conflict
    rel = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            pos, neg = overlap(cycles[i], cycles[j])
            if pos and neg:
                r = 2
            elif pos:
                r = 1
            elif neg:
                r = 0
            else:
                r = None
            rel[i][j] = rel[j][i] = r

    order = sorted(range(m), key=lambda i: (len(cycles[i].bonds), cycles[i].bonds))
    chosen: list[int] = []
    uf = _ParityUF(m)
    edge_use = [0] * g.edge_count
    nodes = 0

    def reduce_rows(rows):
        return int_rank(rows)

    def dfs(start) -> list[int] | None:
        nonlocal nodes
        if len(chosen) == n:
            if reduce_rows([vecs[i] for i in chosen]) == n:
                return list(chosen)
            return None
        if m - start < n - len(chosen):
            return None
        for oi in range(start, m):
            i = order[oi]
            nodes += 1
            if nodes > node_cap:
                raise InconclusiveError(
                    "non-positive basis search exceeded node cap"
                )
            if any(rel[i][j] == 2 for j in chosen):
                continue
            if any(edge_use[e] >= 2 for e, x in enumerate(vecs[i]) if x):
                continue
            if reduce_rows([vecs[j] for j in chosen] + [vecs[i]]) != len(chosen) + 1:
                continue
            snap = uf.snapshot()
            ok = True
            for j in chosen:
                if rel[i][j] is not None and not uf.union(i, j, rel[i][j]):
                    ok = False
                    break
            if ok:
                chosen.append(i)
                for e, x in enumerate(vecs[i]):
                    if x:
                        edge_use[e] += 1
                res = dfs(oi + 1)
                if res is not None:
                    return res
                chosen.pop()
                for e, x in enumerate(vecs[i]):
                    if x:
                        edge_use[e] -= 1
            uf.restore(snap)
        return None

    picked = dfs(0)
    if picked is None:
        return None
    # assign orientations from the parity classes (free classes stay as-is)
    flips = {}
    for i in picked:
        r = uf.find(i)
        if r not in flips:
            flips[r] = uf.par[i]  # normalize: first member unflipped
    out = []
    for i in picked:
        flip = uf.par[i] ^ flips[uf.find(i)]
        out.append(cycles[i].reversed_() if flip else cycles[i])
    # final guard: pairwise no positive overlap
    for a, b in itertools.combinations(out, 2):
        pos, _ = overlap(a, b)
        assert not pos
    return out


# --- geometric dual ------------------------------------------------------


def geometric_dual(g: CombinatorialGraph, facial_basis: list[OrientedCycle]):
    """Dual graph on the faces (basis cycles plus the outer face).

    Returns (dual, edge_map) where edge_map[i] is the primal edge id of
    dual edge i; the dual has one edge per primal edge.
    """
    for a, b in itertools.combinations(facial_basis, 2):
        pos, _ = overlap(a, b)
        if pos:
            raise InputError("facial basis has edges of positive overlap")
    n = len(facial_basis)
    faces_of_edge = defaultdict(list)
    for fi, c in enumerate(facial_basis):
        for e in c.edge_ids():
            faces_of_edge[e].append(fi)
    dual_edges = []
    edge_map = []
    for e in range(g.edge_count):
        fs = faces_of_edge.get(e, [])
        if len(fs) > 2:
            raise InputError(f"edge {e} lies on more than two basis cycles")
        if len(fs) == 0:
            raise InputError(
                f"edge {e} lies on no basis cycle; graph is not 2-connected"
            )
        if len(fs) == 1:
            dual_edges.append((fs[0], n))  # shared with the outer face
        else:
            dual_edges.append((fs[0], fs[1]))
        edge_map.append(e)
    return CombinatorialGraph(n + 1, tuple(dual_edges)), edge_map


# --- isomorphism ---------------------------------------------------------


def _edge_key_multiset(g, v, lengths, tol_digits):
    out = []
    for eid, (a, b) in enumerate(g.edges):
        if v in (a, b):
            if lengths is None:
                out.append(0)
            else:
                out.append(round(float(lengths[eid]), tol_digits))
    return tuple(sorted(out))


def is_isomorphic(
    g: CombinatorialGraph,
    h: CombinatorialGraph,
    lengths_g=None,
    lengths_h=None,
    tol_digits: int = 8,
) -> bool:
    """Multigraph isomorphism by backtracking with degree pruning; when
    lengths are given the bijection must preserve them to tol_digits."""
    if g.vertex_count != h.vertex_count or g.edge_count != h.edge_count:
        return False
    if sorted(g.degrees()) != sorted(h.degrees()):
        return False

    def key(graph, lengths):
        ks = {}
        for v in range(graph.vertex_count):
            ks[v] = (graph.degree(v), _edge_key_multiset(graph, v, lengths, tol_digits))
        return ks

    kg, kh = key(g, lengths_g), key(h, lengths_h)
    if sorted(kg.values()) != sorted(kh.values()):
        return False

    def multi(graph, lengths):
        m = defaultdict(list)
        for eid, (a, b) in enumerate(graph.edges):
            val = 0 if lengths is None else round(float(lengths[eid]), tol_digits)
            m[frozenset((a, b)) if a != b else frozenset((a,))].append(val)
        return {k: tuple(sorted(v)) for k, v in m.items()}

    mg, mh = multi(g, lengths_g), multi(h, lengths_h)
    vg = sorted(range(g.vertex_count), key=lambda v: (kg[v], v))
    mapping: dict[int, int] = {}
    used = set()

    def consistent(v, w):
        if kg[v] != kh[w]:
            return False
        for u, x in mapping.items():
            a = mg.get(frozenset((v, u)) if v != u else frozenset((v,)), ())
            b = mh.get(frozenset((w, x)) if w != x else frozenset((w,)), ())
            if a != b:
                return False
        sv = mg.get(frozenset((v,)), ())
        sw = mh.get(frozenset((w,)), ())
        return sv == sw

    def bt(i):
        if i == len(vg):
            return True
        v = vg[i]
        for w in range(h.vertex_count):
            if w in used:
                continue
            if consistent(v, w):
                mapping[v] = w
                used.add(w)
                if bt(i + 1):
                    return True
                del mapping[v]
                used.remove(w)
        return False

    return bt(0)


def two_isomorphic(g: CombinatorialGraph, h: CombinatorialGraph) -> bool:
    """Whitney 2-isomorphism: an edge bijection carrying cycles to cycles."""
    if not (g.is_connected() and h.is_connected()):
        raise InputError("two_isomorphic expects connected graphs")
    if g.edge_count != h.edge_count:
        return False
    fam_g = {frozenset(c.edge_ids()) for c in enumerate_simple_cycles(g)}
    fam_h = {frozenset(c.edge_ids()) for c in enumerate_simple_cycles(h)}
    if len(fam_g) != len(fam_h):
        return False
    if sorted(len(c) for c in fam_g) != sorted(len(c) for c in fam_h):
        return False

    def profile(fam, E):
        prof = [defaultdict(int) for _ in range(E)]
        for c in fam:
            for e in c:
                prof[e][len(c)] += 1
        return [tuple(sorted(p.items())) for p in prof]

    def pair_counts(fam, E):
        pc = defaultdict(int)
        for c in fam:
            for a, b in itertools.combinations(sorted(c), 2):
                pc[(a, b)] += 1
        return pc

    E = g.edge_count
    pg, ph = profile(fam_g, E), profile(fam_h, E)
    if sorted(pg) != sorted(ph):
        return False
    cg, ch = pair_counts(fam_g, E), pair_counts(fam_h, E)
    candidates = [[f for f in range(E) if ph[f] == pg[e]] for e in range(E)]
    order = sorted(range(E), key=lambda e: len(candidates[e]))
    mapping: dict[int, int] = {}
    used = set()

    def bt(i):
        if i == E:
            mapped = {frozenset(mapping[e] for e in c) for c in fam_g}
            return mapped == fam_h
        e = order[i]
        for f in candidates[e]:
            if f in used:
                continue
            ok = True
            for e2, f2 in mapping.items():
                a = cg.get((min(e, e2), max(e, e2)), 0)
                b = ch.get((min(f, f2), max(f, f2)), 0)
                if a != b:
                    ok = False
                    break
            if ok:
                mapping[e] = f
                used.add(f)
                if bt(i + 1):
                    return True
                del mapping[e]
                used.remove(f)
        return False

    return bt(0)


# --- connectivity (Menger, with parallel edges) ---------------------------


def _max_disjoint_paths(g: CombinatorialGraph, s: int, t: int) -> int:
    """Max number of edge- and internally-vertex-disjoint s-t paths."""
    # split every vertex v != s,t into v_in -> v_out with capacity 1;
    # each parallel edge contributes capacity 1
    n = g.vertex_count
    INF = 10 ** 9

    def vin(v):
        return 2 * v

    def vout(v):
        return 2 * v + 1

    cap = defaultdict(int)
    adjn = defaultdict(set)

    def add(u, w, c):
        cap[(u, w)] += c
        adjn[u].add(w)
        adjn[w].add(u)

    for v in range(n):
        add(vin(v), vout(v), 1 if v not in (s, t) else INF)
    for a, b in g.edges:
        if a == b:
            continue
        add(vout(a), vin(b), 1)
        add(vout(b), vin(a), 1)
    source, sink = vout(s), vin(t)
    flow = 0
    while True:
        prev = {source: None}
        queue = deque([source])
        while queue and sink not in prev:
            u = queue.popleft()
            for w in adjn[u]:
                if w not in prev and cap[(u, w)] > 0:
                    prev[w] = u
                    queue.append(w)
        if sink not in prev:
            return flow
        w = sink
        while prev[w] is not None:
            u = prev[w]
            cap[(u, w)] -= 1
            cap[(w, u)] += 1
            w = u
        flow += 1


def is_k_connected(g: CombinatorialGraph, k: int) -> bool:
    """Every vertex pair joined by k disjoint paths (parallel edges count)."""
    if g.vertex_count < 2:
        return False
    if not g.is_connected():
        return False
    for s, t in itertools.combinations(range(g.vertex_count), 2):
        if _max_disjoint_paths(g, s, t) < k:
            return False
    return True
