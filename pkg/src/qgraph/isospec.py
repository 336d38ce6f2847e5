"""Isospectrality machinery: Seidel switching, spectral invariants,
finiteness bounds, and desk-scale isospectral family searches."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InconclusiveError, InputError, NumericError
from .graphs import CombinatorialGraph, is_isomorphic
from .metric import MetricGraph, split_loops
from .orbits import enumerate_orbits
from .spectral import combinatorial_spectrum, eigenvalues


@dataclass(frozen=True)
class SwitchingScheme:
    """Two regular simple graphs plus a bipartite half-adjacency pattern."""

    g1: CombinatorialGraph
    g2: CombinatorialGraph
    pattern: tuple[tuple[int, ...], ...]  # 0/1 matrix, rows = V1, cols = V2

    def validate(self) -> None:
        for g, name in ((self.g1, "G1"), (self.g2, "G2")):
            degs = g.degrees()
            if len(set(degs)) > 1:
                raise InputError(f"{name} is not regular")
            for a, b in g.edges:
                if a == b:
                    raise InputError(f"{name} has a loop; simple graphs required")
            seen = set()
            for a, b in g.edges:
                key = (min(a, b), max(a, b))
                if key in seen:
                    raise InputError(f"{name} has parallel edges; simple required")
                seen.add(key)
        n1, n2 = self.g1.vertex_count, self.g2.vertex_count
        if len(self.pattern) != n1 or any(len(r) != n2 for r in self.pattern):
            raise InputError("pattern shape does not match vertex counts")
        if n2 % 2 or n1 % 2:
            raise InputError("half adjacency requires even vertex counts")
        for i, row in enumerate(self.pattern):
            if sum(row) * 2 != n2:
                raise InputError(
                    f"vertex {i} of V1 is adjacent to {sum(row)} of {n2} in V2"
                )
        for j in range(n2):
            col = sum(self.pattern[i][j] for i in range(n1))
            if col * 2 != n1:
                raise InputError(
                    f"vertex {j} of V2 is adjacent to {col} of {n1} in V1"
                )


def seidel_switch(scheme: SwitchingScheme):
    """The switched pair (G, G~): G uses the pattern, G~ its complement."""
    scheme.validate()
    n1 = scheme.g1.vertex_count
    n2 = scheme.g2.vertex_count
    base = [tuple(e) for e in scheme.g1.edges]
    base += [(n1 + a, n1 + b) for a, b in scheme.g2.edges]
    e_on = list(base)
    e_off = list(base)
    for i in range(n1):
        for j in range(n2):
            if scheme.pattern[i][j]:
                e_on.append((i, n1 + j))
            else:
                e_off.append((i, n1 + j))
    return (
        CombinatorialGraph(n1 + n2, tuple(e_on)),
        CombinatorialGraph(n1 + n2, tuple(e_off)),
    )


def min_edge_length_from_orbits(g: MetricGraph):
    """Half the shortest periodic-orbit length, after splitting loops."""
    if any(d == 1 for d in g.graph.degrees()):
        raise InputError("minimum-edge-length invariant requires leafless graphs")
    split = split_loops(g)
    cutoff = 2 * min(split.lengths)
    orbits = enumerate_orbits(split, cutoff)
    shortest = min(o.length for o in orbits)
    return shortest / 2


def edge_count_bound(total_length, chi: int) -> int:
    """M = min(floor(L), 3*chi - 3) for leafless graphs with min length 1."""
    return min(int(math.floor(float(total_length))), 3 * chi - 3)


def family_size_bound(total_length, chi: int):
    """Exact bound (2M/3+1)^(2M) * M! * M^(4*floor(L)) on isospectral
    family sizes, plus the e^(7 L ln L) comparison value.

    Returns (bound_ceiling, exact_rational, loose_float).
    """
    M = edge_count_bound(total_length, chi)
    if M < 1:
        return 1, Fraction(1), float("nan")
    L = float(total_length)
    exact = (
        (Fraction(2 * M, 3) + 1) ** (2 * M)
        * math.factorial(M)
        * Fraction(M) ** (4 * int(math.floor(L)))
    )
    loose = math.exp(7.0 * L * math.log(L)) if L > 1 else float("nan")
    return -(-exact.numerator // exact.denominator), exact, loose


def _half_grid_values(limit: Fraction):
    v = Fraction(1)
    out = []
    while v <= limit:
        out.append(v)
        v += Fraction(1, 2)
    return out


def edge_length_lists(g: MetricGraph, cap: int = 1_000_000):
    """All candidate edge-length multisets for graphs isospectral to g.

    Enforces the four defining properties: every entry is a half-integer
    combination of g's lengths, entries sum to the total length, every
    length of g is a half-integer combination of the list, and the minimum
    entry is 1.  The count is guaranteed to stay below M^(4*floor(L)).

    Loops are split into half-length pairs first (the half-count convention).
    """
    g = split_loops(g)
    lengths = [Fraction(l) if not isinstance(l, Fraction) else l for l in g.lengths]
    if min(lengths) != 1:
        raise InputError("normalize the minimum edge length to 1 first")
    total = sum(lengths)
    # values reachable as (1/2)N-combinations of g's lengths, up to total
    reachable = {Fraction(0)}
    frontier = [Fraction(0)]
    while frontier:
        x = frontier.pop()
        for l in set(lengths):
            for mult in (Fraction(1, 2), Fraction(1)):
                y = x + mult * l
                if y <= total and y not in reachable:
                    reachable.add(y)
                    frontier.append(y)
    values = sorted(v for v in reachable if 1 <= v <= total)
    M = edge_count_bound(total, g.graph.betti_number())
    results = []
    counter = [0]

    def is_combination(target, pool):
        # can target be written as a (1/2)N-combination of pool values?
        reach = {Fraction(0)}
        stack = [Fraction(0)]
        while stack:
            x = stack.pop()
            for l in set(pool):
                y = x + l / 2
                if y == target:
                    return True
                if y < target and y not in reach:
                    reach.add(y)
                    stack.append(y)
        return False

    def rec(idx, remaining, current):
        counter[0] += 1
        if counter[0] > cap:
            raise InconclusiveError("edge length list enumeration exceeded cap")
        if remaining == 0:
            if len(current) > M or not current:
                return
            if min(current) != 1:
                return
            if all(is_combination(l, current) for l in set(lengths)):
                results.append(tuple(current))
            return
        if len(current) >= M:
            return
        for i in range(idx, len(values)):
            v = values[i]
            if v > remaining:
                break
            rec(i, remaining - v, current + [v])

    rec(0, total, [])
    bound = Fraction(M) ** (4 * int(math.floor(float(total))))
    if len(results) > bound:
        raise InconclusiveError("list count exceeds the theoretical bound")
    return results


# --- exhaustive quantum isospectral search ---------------------------------


def _leafless_multigraphs(max_edges: int):
    """Connected leafless multigraphs without degree-2 vertices (plus the
    bare loop), up to isomorphism, with at most max_edges edges."""
    found = []
    for n_vert in range(1, 2 * max_edges // 3 + 2):
        pairs = [(i, j) for i in range(n_vert) for j in range(i, n_vert)]
        for n_edges in range(1, max_edges + 1):
            for combo in itertools.combinations_with_replacement(pairs, n_edges):
                g = CombinatorialGraph(n_vert, tuple(combo))
                degs = g.degrees()
                if any(d < 3 for d in degs):
                    if not (n_vert == 1 and n_edges == 1 and combo[0] == (0, 0)):
                        continue
                if not g.is_connected():
                    continue
                if any(is_isomorphic(g, h) for h in found):
                    continue
                found.append(g)
    return found


def _length_assignments(n_edges: int, total_max: Fraction):
    """Half-integer length multisets (values >= 1) summing to <= total_max,
    expanded to all distinct orderings."""
    values = _half_grid_values(total_max)

    def rec(idx, remaining, current):
        if len(current) == n_edges:
            yield tuple(current)
            return
        for i in range(idx, len(values)):
            v = values[i]
            need = n_edges - len(current) - 1
            if v + v * need > remaining:
                break
            yield from rec(i, remaining - v, current + [v])

    for multiset in rec(0, total_max, []):
        yield from sorted(set(itertools.permutations(multiset)))


@dataclass(frozen=True)
class IsospectralFamily:
    members: tuple[MetricGraph, ...]
    wavenumbers: tuple[float, ...]
    confirmed: bool


def _is_half_combination(target: Fraction, pool) -> bool:
    reach = {Fraction(0)}
    stack = [Fraction(0)]
    while stack:
        x = stack.pop()
        for l in set(pool):
            y = x + Fraction(l) / 2
            if y == target:
                return True
            if y < target and y not in reach:
                reach.add(y)
                stack.append(y)
    return False


def verify_family_invariants(family: IsospectralFamily) -> None:
    """Trace-formula invariants inside a numerically isospectral family:
    equal total length, equal minimum edge length (loop-adjusted), and
    bidirectional half-integer combination of edge lengths."""
    members = family.members
    totals = {Fraction(m.total_length) for m in members}
    if len(totals) != 1:
        raise NumericError(f"family members differ in total length: {totals}")
    mins = {Fraction(min_edge_length_from_orbits(m)) for m in members}
    if len(mins) != 1:
        raise NumericError(f"family members differ in minimum edge length: {mins}")
    for a, b in itertools.permutations(members, 2):
        pool = [Fraction(l) for l in split_loops(a).lengths]
        for l in split_loops(b).lengths:
            if not _is_half_combination(Fraction(l), pool):
                raise NumericError(
                    f"edge length {l} is not a half-integer combination "
                    "of the partner's lengths"
                )


def quantum_isospectral_search(
    total_max, resolution: float = 1e-6, k_max: float = 20.0
) -> list[IsospectralFamily]:
    """Group all leafless quantum graphs with half-integer lengths, minimum
    edge length 1 and total length <= total_max by truncated spectrum.

    Families are numerically isospectral (slice agreement within the given
    resolution); the finiteness invariants are checked by the caller.
    """
    total_max = Fraction(total_max)
    graphs = _leafless_multigraphs(int(math.floor(float(total_max))))
    candidates = []
    for g in graphs:
        for lens in _length_assignments(g.edge_count, total_max):
            # loop half-count convention: a loop of length l counts as two
            # edges of length l/2, and the effective minimum must be 1
            effective = [
                l / 2 if a == b else l for (a, b), l in zip(g.edges, lens)
            ]
            if min(effective) != 1:
                continue
            mg = MetricGraph(g, lens)
            if any(
                is_isomorphic(g, other.graph, lens, other.lengths)
                for other in candidates
                if other.graph.edge_count == g.edge_count
            ):
                continue
            candidates.append(mg)
    slices = [
        (mg, tuple(eigenvalues(mg, None, k_max).wavenumbers())) for mg in candidates
    ]
    families: list[list[int]] = []
    for i, (_mg, wn) in enumerate(slices):
        placed = False
        for fam in families:
            ref = slices[fam[0]][1]
            if len(ref) == len(wn) and all(
                abs(a - b) <= resolution for a, b in zip(ref, wn)
            ):
                fam.append(i)
                placed = True
                break
        if not placed:
            families.append([i])
    out = []
    for fam in families:
        members = tuple(slices[i][0] for i in fam)
        family = IsospectralFamily(
            members, slices[fam[0]][1], confirmed=len(fam) == 1
        )
        if len(members) > 1:
            verify_family_invariants(family)
        out.append(family)
    return out


def exhaustive_switching_schemes(g1: CombinatorialGraph, g2: CombinatorialGraph):
    """All valid half-adjacency patterns between two regular graphs (desk
    scale: at most 4+4 vertices)."""
    n1, n2 = g1.vertex_count, g2.vertex_count
    if n1 > 4 or n2 > 4:
        raise InputError("exhaustive pattern search capped at 4+4 vertices")
    rows = [r for r in itertools.product((0, 1), repeat=n2) if 2 * sum(r) == n2]
    out = []
    for mat in itertools.product(rows, repeat=n1):
        if all(2 * sum(mat[i][j] for i in range(n1)) == n1 for j in range(n2)):
            scheme = SwitchingScheme(g1, g2, tuple(mat))
            try:
                scheme.validate()
            except InputError:
                continue
            out.append(scheme)
    return out
