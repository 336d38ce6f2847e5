"""Periodic orbits, trace-formula coefficients and minimal homology lengths.

Orbit lengths and scattering products stay exact (Fractions) whenever the
edge lengths are rational; the cancellation phenomena the trace formula
exhibits at rational lengths are only visible with exact arithmetic.
"""

from __future__ import annotations

import cmath
import heapq
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InconclusiveError, InputError, NumericError
from .graphs import fundamental_edges, spanning_tree_cycle_basis, walk_homology
from .metric import MetricGraph, OneForm, bond_integral, flux as class_flux
from .spectral import SpectrumSlice, scattering_coefficient

_WALK_CAP = 10_000_000


@dataclass(frozen=True)
class PeriodicOrbit:
    """Closed bond walk without a fixed start (canonical rotation stored)."""

    bonds: tuple[int, ...]
    length: object
    primitive_length: object
    repetition: int
    backtracks: int
    homology: tuple[int, ...]

    def reversed_(self, g: MetricGraph) -> "PeriodicOrbit":
        rev = tuple((b ^ 1) for b in reversed(self.bonds))
        return _make_orbit(g, _min_rotation(rev))


def _min_rotation(seq: tuple[int, ...]) -> tuple[int, ...]:
    rots = [seq[i:] + seq[:i] for i in range(len(seq))]
    return min(rots)


def _make_orbit(g: MetricGraph, seq: tuple[int, ...]) -> PeriodicOrbit:
    m = len(seq)
    length = sum(g.bond_length(b) for b in seq)
    rep = 1
    for p in range(1, m):
        if m % p == 0 and seq == seq[:p] * (m // p):
            rep = m // p
            break
    prim = sum(g.bond_length(b) for b in seq[: m // rep])
    back = sum(1 for i in range(m) if seq[(i + 1) % m] == seq[i] ^ 1)
    hom = walk_homology(g.graph, seq)
    return PeriodicOrbit(seq, length, prim, rep, back, hom)


def _vertex_distances(g: MetricGraph):
    """All-pairs shortest path lengths in the native length arithmetic."""
    n = g.graph.vertex_count
    adj = [[] for _ in range(n)]
    for eid, (a, b) in enumerate(g.graph.edges):
        if a != b:
            adj[a].append((b, g.lengths[eid]))
            adj[b].append((a, g.lengths[eid]))
    dist = []
    for s in range(n):
        d = {s: 0}
        heap = [(0, s)]
        while heap:
            dv, v = heapq.heappop(heap)
            if dv > d[v]:
                continue
            for w, l in adj[v]:
                nd = dv + l
                if w not in d or nd < d[w]:
                    d[w] = nd
                    heapq.heappush(heap, (nd, w))
        dist.append(d)
    return dist


def enumerate_orbits(g: MetricGraph, l_max) -> list[PeriodicOrbit]:
    """Every periodic orbit with length <= l_max, once per cyclic rotation;
    orientation-reversed partners are separate orbits."""
    if not l_max > 0:
        raise InputError("l_max must be positive")
    gr = g.graph
    nb = gr.bond_count
    succ = [gr.bonds_from(gr.terminus(b)) for b in range(nb)]
    term = [gr.terminus(b) for b in range(nb)]
    blen = [g.bond_length(b) for b in range(nb)]
    dmaps = _vertex_distances(g)
    out = []
    visited_count = 0
    for b0 in range(nb):
        root = gr.origin(b0)
        l0 = blen[b0]
        if l0 > l_max:
            continue
        # distance back to the walk root, pruned against the budget
        dist_root = dmaps[root]
        stack = [(b0, l0)]
        path = []
        while stack:
            b, ln = stack.pop()
            if b is None:
                path.pop()
                continue
            visited_count += 1
            if visited_count > _WALK_CAP:
                raise InconclusiveError("orbit enumeration exceeded walk cap")
            path.append(b)
            if term[b] == root:
                seq = tuple(path)
                if _is_canonical_start(seq, b0):
                    out.append(_make_orbit(g, seq))
            stack.append((None, None))
            for b2 in succ[b]:
                if b2 < b0:
                    continue
                ret = dist_root.get(term[b2])
                if ret is None or ln + blen[b2] + ret > l_max:
                    continue
                stack.append((b2, ln + blen[b2]))
    out.sort(key=lambda p: (float(p.length), p.bonds))
    return out


def _is_canonical_start(seq: tuple[int, ...], b0: int) -> bool:
    for i in range(1, len(seq)):
        if seq[i] == b0 and seq[i:] + seq[:i] < seq:
            return False
    return True


@dataclass(frozen=True)
class OrbitCoefficient:
    value: object  # Fraction for the zero form on rational graphs, else complex
    primitive_length: object
    flux: float
    scattering: Fraction


def orbit_coefficient(
    p: PeriodicOrbit, form: OneForm | None, g: MetricGraph
) -> OrbitCoefficient:
    """A_p(alpha) = primitive length * flux phase * product of scattering
    coefficients at the traversed vertices."""
    degs = g.graph.degrees()
    scat = Fraction(1)
    m = len(p.bonds)
    for i, b in enumerate(p.bonds):
        nxt = p.bonds[(i + 1) % m]
        scat *= scattering_coefficient(degs[g.graph.terminus(b)], nxt == b ^ 1)
    if form is None or all(v == 0 for v in form.values):
        return OrbitCoefficient(p.primitive_length * scat, p.primitive_length, 0.0, scat)
    integral = sum(bond_integral(g, form, b) for b in p.bonds)
    flux = 2.0 * math.pi * integral
    value = float(p.primitive_length) * cmath.exp(1j * flux) * float(scat)
    return OrbitCoefficient(value, p.primitive_length, flux, scat)


def sign_check(p: PeriodicOrbit, g: MetricGraph) -> int:
    """Sign of A_p at the zero form: (-1)^backtracks on leafless graphs."""
    degs = g.graph.degrees()
    if any(d == 1 for d in degs):
        raise InputError("positivity lemma requires a leafless graph")
    if any(d == 2 for d in degs):
        raise InputError("positivity lemma assumes no degree-2 vertices")
    return -1 if p.backtracks % 2 else 1


# --- length spectrum -----------------------------------------------------


def _canonical_class(vec: tuple[int, ...]):
    """Sign-normalized homology class: first nonzero coordinate positive."""
    for x in vec:
        if x > 0:
            return vec, 1
        if x < 0:
            return tuple(-y for y in vec), -1
    return vec, 1


@dataclass(frozen=True)
class LengthEntry:
    length: object
    constant: object  # sum of A_p over homologically trivial orbits
    terms: tuple  # ((class, nu, frequency), ...) for the ray t*alpha

    def aggregate(self, t: float) -> float:
        total = float(self.constant)
        for _cls, nu, mu in self.terms:
            total += float(nu) * math.cos(mu * t)
        return total

    def aggregate_at_zero(self):
        return self.constant + sum(nu for _cls, nu, _mu in self.terms)


@dataclass(frozen=True)
class LengthSpectrum:
    entries: tuple[LengthEntry, ...]
    l_max: object

    def entry_at(self, length, tol: float = 1e-9) -> LengthEntry | None:
        for e in self.entries:
            if e.length == length or abs(float(e.length) - float(length)) <= tol:
                return e
        return None


def length_spectrum(g: MetricGraph, form: OneForm | None, l_max) -> LengthSpectrum:
    """Group orbits by length along the ray t*alpha.

    Each entry stores the exact (nu, mu) cosine data: nu = 2*ltilde*prod(sigma)
    summed over the orbits in a homology-class pair, mu = |flux| of the class.
    """
    orbits = enumerate_orbits(g, l_max)
    if form is None:
        form = OneForm.zero(g)
    exact = g.is_rational()
    groups: dict = {}
    keys: list = []
    for p in orbits:
        key = None
        if exact:
            key = p.length
        else:
            for k in keys:
                if abs(float(k) - float(p.length)) <= 1e-9:
                    key = k
                    break
            if key is None:
                key = p.length
        if key not in groups:
            groups[key] = []
            keys.append(key)
        groups[key].append(p)
    entries = []
    basis = spanning_tree_cycle_basis(g.graph)
    for key in sorted(keys, key=float):
        const = Fraction(0) if exact else 0.0
        per_class: dict = {}
        for p in groups[key]:
            coeff = orbit_coefficient(p, None, g).value  # ltilde * prod sigma
            if all(x == 0 for x in p.homology):
                const = const + coeff
                continue
            cls, _sgn = _canonical_class(p.homology)
            per_class[cls] = per_class.get(cls, Fraction(0) if exact else 0.0) + coeff
        terms = []
        for cls, total in sorted(per_class.items()):
            # total sums l~*prod(sigma) over the orbits of BOTH orientations
            # (reversal maps class cls to -cls bijectively), so the pair sum
            # 2Re A_p collapses to total*cos(mu t)
            nu = total
            mu = abs(class_flux(form, cls, g, basis))
            if nu != 0:
                terms.append((cls, nu, mu))
        entries.append(LengthEntry(key, const, tuple(terms)))
    return LengthSpectrum(tuple(entries), l_max)


# --- trace formula check --------------------------------------------------


def _gauss(x: float, sigma: float) -> float:
    return math.exp(-(x * x) / (2.0 * sigma * sigma)) / (sigma * math.sqrt(2.0 * math.pi))


@dataclass(frozen=True)
class TraceRecord:
    length: float
    spectral: float
    geometric: float
    relative_error: float


@dataclass(frozen=True)
class TraceReport:
    records: tuple[TraceRecord, ...]
    fitted_constant: float
    chi_v_minus_e: int
    chi_v_minus_e_minus_1: int
    matching_convention: str
    truncation: float


def trace_check(
    g: MetricGraph,
    form: OneForm | None,
    slice_: SpectrumSlice,
    sigma_w: float,
    l_max: float,
) -> TraceReport:
    """Compare Gaussian-smoothed spectral and periodic-orbit sides of the
    wave trace at every orbit length up to l_max.

    The spectral side is the symmetrized damped sum over wavenumbers; its
    constant offset is fitted empirically and reported against both Euler
    characteristic conventions.
    """
    trunc = math.exp(-(sigma_w * slice_.k_max) ** 2 / 2.0)
    if trunc > 1e-4:
        need = math.sqrt(2.0 * math.log(1e6)) / sigma_w
        raise NumericError(
            f"k_max={slice_.k_max} too small for window {sigma_w}; "
            f"need k_max >= {need:.1f}"
        )
    ks = np.array(slice_.wavenumbers())
    damps = np.exp(-(sigma_w ** 2) * ks ** 2 / 2.0)
    m0 = slice_.zero_multiplicity()

    def spectral(l: float) -> float:
        # symmetrized over +-k_n, k = 0 counted once
        return float(2.0 * np.sum(damps * np.cos(l * ks))) - m0

    orbits = enumerate_orbits(g, l_max + 12.0 * sigma_w)
    coeffs = [(float(p.length), orbit_coefficient(p, form, g).value) for p in orbits]
    Ltot = float(g.total_length)

    def geometric(l: float) -> float:
        # orbit reversal conjugates A_p and both orientations are summed,
        # so the total is real; take the real part of the complex sum
        total = 2.0 * Ltot * _gauss(l, sigma_w) + 0j
        for lp, a in coeffs:
            c = complex(a)
            total += c * _gauss(l - lp, sigma_w) + c.conjugate() * _gauss(l + lp, sigma_w)
        return total.real

    lengths = sorted({round(lp, 9) for lp, _ in coeffs if lp <= l_max})
    probes = _constant_probes(lengths, sigma_w, l_max)
    fitted = float(np.median([spectral(l) for l in probes]))
    V, E = g.graph.vertex_count, g.graph.edge_count
    chi1, chi2 = V - E, V - E - 1
    matching = "V-E" if abs(fitted - chi1) <= abs(fitted - chi2) else "V-E-1"
    records = []
    for l in lengths:
        sp = spectral(l) - fitted
        ge = geometric(l)
        scale = max(abs(ge), 1e-9 * max(1.0, Ltot) * _gauss(0.0, sigma_w))
        records.append(TraceRecord(l, sp, ge, abs(sp - ge) / scale))
    return TraceReport(
        tuple(records), fitted, chi1, chi2, matching, trunc
    )


def _constant_probes(lengths, sigma_w, l_max):
    guard = 8.0 * sigma_w
    pts = []
    anchors = [0.0] + list(lengths) + [l_max + 20 * sigma_w]
    for a, b in zip(anchors, anchors[1:]):
        lo, hi = a + guard, b - guard
        if hi > lo:
            pts.extend(np.linspace(lo, hi, 5)[1:-1])
    if not pts:
        raise NumericError("no orbit-free window to fit the constant term")
    return pts


# --- minimal homology lengths ---------------------------------------------


class MinimalLengthOracle:
    """Minimal periodic-orbit length per integer homology class.

    Certified A* search over (vertex, partial class) states, expanding walks
    in length order; equivalent to adaptive orbit enumeration but with state
    dedup.  Values are exact for rational edge lengths.
    """

    def __init__(self, g: MetricGraph, state_cap: int = 2_000_000):
        gr = g.graph
        if any(d == 1 for d in gr.degrees()):
            raise InputError("length oracle requires a leafless graph")
        self.g = g
        self.nontree = fundamental_edges(gr)
        self.index = {e: i for i, e in enumerate(self.nontree)}
        self.basis = spanning_tree_cycle_basis(gr)
        self.dists = _vertex_distances(g)
        self.state_cap = state_cap
        self._cache: dict[tuple[int, ...], object] = {}
        self.n = len(self.nontree)

    def _upper_bound(self, mu):
        total = 0
        anchors = []
        for i, m in enumerate(mu):
            if m:
                c = self.basis[i]
                total += abs(m) * sum(self.g.bond_length(b) for b in c.bonds)
                anchors.append(self.g.graph.origin(c.bonds[0]))
        for a in anchors[1:]:
            total += 2 * self.dists[anchors[0]][a]
        return total

    def length(self, mu):
        mu = tuple(int(x) for x in mu)
        if len(mu) != self.n:
            raise InputError("class dimension does not match the homology rank")
        if all(x == 0 for x in mu):
            return 0
        key, _ = _canonical_class(mu)
        if key in self._cache:
            return self._cache[key]
        val = self._astar(key)
        self._cache[key] = val
        return val

    __call__ = length

    def _heuristic(self, v, h, mu, root):
        rem = 0.0
        for i, (hi, mi) in enumerate(zip(h, mu)):
            if hi != mi:
                rem += abs(mi - hi) * float(self.g.lengths[self.nontree[i]])
        back = float(self.dists[v].get(root, math.inf))
        return max(rem, back)

    def _astar(self, mu):
        gr = self.g.graph
        best = self._upper_bound(mu)
        zero = tuple(0 for _ in mu)
        bases = []
        for i, m in enumerate(mu):
            if m:
                e = self.nontree[i]
                for v in gr.edges[e]:
                    if v not in bases:
                        bases.append(v)
        result = None
        for root in bases:
            found = self._astar_from(root, mu, zero, best)
            if found is not None and (result is None or found < result):
                result = found
                best = min(best, found)
        if result is None:
            raise NumericError(f"no closed walk found for class {mu}")
        return result

    def _astar_from(self, root, mu, zero, best):
        gr = self.g.graph
        succ = {v: gr.bonds_from(v) for v in range(gr.vertex_count)}
        start = (root, zero)
        dist = {start: 0}
        heap = [(self._heuristic(root, zero, mu, root), 0, 0, root, zero)]
        counter = itertools.count(1)
        popped = 0
        while heap:
            _pri, _tie, d, v, h = heapq.heappop(heap)
            if d > dist.get((v, h), math.inf):
                continue
            if v == root and h == mu and d > 0:
                return d
            popped += 1
            if popped > self.state_cap:
                raise InconclusiveError("length oracle exceeded its state cap")
            for b in succ[v]:
                e = b // 2
                nd = d + self.g.lengths[e]
                i = self.index.get(e)
                if i is None:
                    nh = h
                else:
                    delta = 1 if b % 2 == 0 else -1
                    lst = list(h)
                    lst[i] += delta
                    nh = tuple(lst)
                w = gr.terminus(b)
                # admissible bound: states that cannot beat the known upper
                # bound are discarded, which also caps coordinate overshoot
                heur = self._heuristic(w, nh, mu, root)
                if float(nd) + heur > float(best) + 1e-12:
                    continue
                state = (w, nh)
                if float(nd) < float(dist.get(state, math.inf)) - 1e-15:
                    dist[state] = nd
                    heapq.heappush(heap, (float(nd) + heur, next(counter), nd, w, nh))
        return None


def minimal_length_oracle(g: MetricGraph, classes=None) -> MinimalLengthOracle:
    """Oracle mapping homology classes (spanning-tree basis coordinates) to
    minimal periodic-orbit lengths; requested classes are precomputed."""
    oracle = MinimalLengthOracle(g)
    if classes:
        for mu in classes:
            oracle.length(mu)
    return oracle
