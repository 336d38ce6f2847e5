"""Inverse pipeline: from Bloch-spectrum data to homology lengths, the
Albanese torus, block structure, planarity, a dual graph, and (for
3-connected planar graphs) the full quantum graph.

The pipeline consumes a BlochSource, which provides per-length cosine data
for the coefficient functions along the ray t*alpha.  Two sources exist:
an exact one backed by periodic-orbit data, and a numeric one backed by
eigenvalue slices on a t-grid.  Everything downstream only sees lengths
and frequencies.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from mpmath import mp, mpf, pslq

from .errors import InconclusiveError, InputError, NumericError
from .graphs import (
    CombinatorialGraph,
    int_det,
    int_rank,
    geometric_dual,
    is_k_connected,
    nonpositive_basis_search,
)
from .metric import (
    MetricGraph,
    MetricTree,
    OneForm,
    generic_one_form,
    tree_from_leaf_distances,
)
from .orbits import MinimalLengthOracle, length_spectrum
from .spectral import eigenvalues

mp.dps = 30

_MAX_COEFF = 32  # integer-relation coefficient bound
_BALL_CAP = 100_000


# --- frequency extraction from sampled cosine sums -------------------------


def extract_frequencies(samples, max_terms: int):
    """Recover ((mu_j, nu_j), ...) and the constant from uniform samples of
    a finite cosine sum via matrix-pencil harmonic retrieval.

    samples: list of (t, value) with uniform spacing and at least
    4*max_terms points.
    """
    ts = np.array([float(t) for t, _ in samples])
    xs = np.array([float(x) for _, x in samples])
    n = len(ts)
    if n < 4 * max_terms:
        raise InputError("need at least 4*max_terms samples")
    dt = ts[1] - ts[0]
    if np.max(np.abs(np.diff(ts) - dt)) > 1e-9 * max(abs(dt), 1.0):
        raise InputError("samples must be uniform")
    norm = float(np.linalg.norm(xs))
    if norm < 1e-14:
        return [], 0.0
    # Hankel matrix and signal subspace
    L = n // 2
    H = np.array([xs[i : i + L + 1] for i in range(n - L)])
    _u, s, vh = np.linalg.svd(H, full_matrices=False)
    r = int(np.sum(s > max(1e-10 * s[0], 1e-13 * norm)))
    r = min(r, 2 * max_terms + 1)
    w0 = vh[:r, :L]
    w1 = vh[:r, 1 : L + 1]
    poles = np.linalg.eigvals(np.linalg.pinv(w0.T) @ w1.T)
    omegas = np.abs(np.angle(poles)) / dt
    freqs: list[float] = []
    for om in sorted(omegas):
        if om < 1e-9 / max(dt, 1e-12):
            continue  # pole at 1: the constant term
        if any(abs(om - f) < 1e-9 for f in freqs):
            continue  # conjugate partner
        freqs.append(float(om))
    # amplitudes by least squares on [1, cos(mu t)]
    design = np.column_stack([np.ones(n)] + [np.cos(f * ts) for f in freqs])
    coef, *_ = np.linalg.lstsq(design, xs, rcond=None)
    fit = design @ coef
    resid = float(np.linalg.norm(xs - fit))
    if resid > 1e-6 * norm:
        raise NumericError(
            f"cosine fit residual {resid:.2e} exceeds threshold: "
            "model order exceeded or noise too high"
        )
    constant = float(coef[0])
    terms = [
        (f, float(a)) for f, a in zip(freqs, coef[1:]) if abs(a) > 1e-9 * max(norm, 1.0)
    ]
    return terms, constant


# --- Bloch sources ----------------------------------------------------------


@dataclass(frozen=True)
class LengthRecord:
    length: float
    exact_length: object
    cosines: tuple  # ((frequency, amplitude), ...)
    constant: float


class ExactBlochSource:
    """Bloch data read off the exact orbit-backed length spectrum."""

    freq_tol = 1e-9

    def __init__(self, g: MetricGraph, form: OneForm | None = None, seed: int = 0):
        self.g = g
        self.n = g.graph.betti_number()
        self.form = form if form is not None else (
            generic_one_form(g, seed) if self.n else OneForm.zero(g)
        )
        self._oracle = MinimalLengthOracle(g) if self.n else None
        from .graphs import spanning_tree_cycle_basis
        from .metric import cycle_flux

        self._basis = spanning_tree_cycle_basis(g.graph)
        self._fluxes = [cycle_flux(self.form, c, g) for c in self._basis]
        self._class_by_freq: list[tuple[float, tuple[int, ...]]] = []

    def rank_bound(self) -> int:
        return self.n

    def total_length(self) -> float:
        return float(self.g.total_length)

    def initial_lmax(self) -> float:
        if not self._basis:
            return float(self.g.total_length)
        longest = max(
            sum(float(self.g.bond_length(b)) for b in c.bonds) for c in self._basis
        )
        return 1.1 * longest

    def hard_cap(self) -> float:
        return 16.0 * self.total_length()

    def records(self, l_max: float) -> list[LengthRecord]:
        ls = length_spectrum(self.g, self.form, l_max)
        out = []
        for e in ls.entries:
            cosines = []
            for cls, nu, mu in e.terms:
                cosines.append((float(mu), float(nu)))
                self._remember(float(mu), cls)
            out.append(
                LengthRecord(float(e.length), e.length, tuple(cosines), float(e.constant))
            )
        return out

    def _remember(self, freq: float, cls: tuple[int, ...]) -> None:
        for f, _c in self._class_by_freq:
            if abs(f - freq) < self.freq_tol:
                return
        self._class_by_freq.append((freq, cls))

    def _resolve_class(self, freq: float) -> tuple[int, ...]:
        for f, c in self._class_by_freq:
            if abs(f - freq) < self.freq_tol:
                return c
        rel = pslq(
            [mpf(freq)] + [mpf(f) for f in self._fluxes],
            tol=mpf(1e-11),
            maxcoeff=8 * _MAX_COEFF,
        )
        if rel is None or rel[0] == 0:
            raise NumericError(f"frequency {freq} is not in the flux lattice")
        c0 = rel[0]
        if abs(c0) != 1:
            raise NumericError(f"frequency {freq} resolves with denominator {c0}")
        cls = tuple(int(-c * c0) for c in rel[1:])
        got = abs(sum(m * f for m, f in zip(cls, self._fluxes)))
        if abs(got - freq) > 1e-8:
            raise NumericError(f"frequency {freq} resolution mismatch ({got})")
        self._class_by_freq.append((freq, cls))
        return cls

    def min_length_at_frequency(self, freq: float):
        if abs(freq) < self.freq_tol:
            return 0
        return self._oracle.length(self._resolve_class(freq))


class NumericBlochSource:
    """Bloch data estimated from eigenvalue slices on a uniform t-grid.

    Spectra of the operators for t*alpha are computed up to k_max, smoothed
    with a Gaussian window, and the per-length coefficient samples are fed
    to the matrix-pencil extractor.
    """

    freq_tol = 1e-3

    def __init__(self, records, rank_bound, total_length, l_max):
        self._records = records
        self._rank = rank_bound
        self._total = total_length
        self._l_max = l_max

    @classmethod
    def from_graph(
        cls,
        g: MetricGraph,
        seed: int = 0,
        n_t: int = 64,
        k_max: float = 350.0,
        sigma_w: float = 0.02,
        l_max: float | None = None,
        max_terms: int = 6,
    ) -> "NumericBlochSource":
        form = generic_one_form(g, seed)
        from .graphs import spanning_tree_cycle_basis
        from .metric import cycle_flux

        basis = spanning_tree_cycle_basis(g.graph)
        max_flux = max(abs(cycle_flux(form, c, g)) for c in basis)
        T = 0.2 / max_flux
        ts = [T * j / n_t for j in range(n_t)]
        if l_max is None:
            l_max = 1.6 * max(
                sum(float(g.bond_length(b)) for b in c.bonds) for c in basis
            )
        slices = [eigenvalues(g, form.scaled(t), k_max) for t in ts]
        lengths = cls._detect_lengths(slices, sigma_w, l_max)
        gauss0 = 1.0 / (sigma_w * math.sqrt(2.0 * math.pi))
        records = []
        for l in lengths:
            samples = []
            for t, sl in zip(ts, slices):
                samples.append((t, cls._smoothed(sl, l, sigma_w) / gauss0))
            terms, const = extract_frequencies(samples, max_terms)
            records.append(LengthRecord(l, l, tuple(terms), const))
        rank = g.graph.betti_number()  # equals -chi, which the trace constant fits
        return cls(records, rank, float(g.total_length), l_max)

    @staticmethod
    def _smoothed(sl, l, sigma_w):
        # fully symmetrized trace (zero modes weighted 2): continuous in t
        # as flux branches emerge from k = 0
        ks = np.array(sl.wavenumbers())
        damps = np.exp(-(sigma_w ** 2) * ks ** 2 / 2.0)
        return float(2.0 * np.sum(damps * np.cos(l * ks)))

    @staticmethod
    def _detect_lengths(slices, sigma_w, l_max):
        grid = np.arange(2.0 * sigma_w, l_max, sigma_w / 3.0)
        profile = np.zeros_like(grid)
        for sl in slices:
            ks = np.array(sl.wavenumbers())
            damps = np.exp(-(sigma_w ** 2) * ks ** 2 / 2.0)
            vals = 2.0 * (damps[None, :] * np.cos(np.outer(grid, ks))).sum(axis=1)
            profile += np.abs(vals - np.median(vals))
        profile /= len(slices)
        thresh = 0.05 * profile.max()
        lengths = []
        for i in range(1, len(grid) - 1):
            if profile[i] > thresh and profile[i] >= profile[i - 1] and profile[i] > profile[i + 1]:
                # quadratic peak refinement
                a, b, c = profile[i - 1], profile[i], profile[i + 1]
                denom = a - 2 * b + c
                off = 0.5 * (a - c) / denom if abs(denom) > 1e-12 else 0.0
                lengths.append(float(grid[i] + off * (sigma_w / 3.0)))
        merged = []
        for l in lengths:
            if merged and l - merged[-1] < 4.0 * sigma_w:
                continue
            merged.append(l)
        return merged

    def rank_bound(self) -> int:
        return self._rank

    def total_length(self) -> float:
        return self._total

    def initial_lmax(self) -> float:
        return self._l_max

    def hard_cap(self) -> float:
        return self._l_max

    def records(self, l_max: float) -> list[LengthRecord]:
        if l_max > self._l_max * (1 + 1e-9):
            raise InconclusiveError(
                "numeric Bloch source sampled only up to "
                f"{self._l_max}; cannot serve {l_max}"
            )
        return [r for r in self._records if r.length <= l_max]

    def min_length_at_frequency(self, freq: float):
        if abs(freq) < 1e-9:
            return 0.0
        for r in self._records:
            for f, _nu in r.cosines:
                if abs(f - freq) < self.freq_tol:
                    return r.length
        raise InconclusiveError(
            f"frequency {freq} not observed up to length {self._l_max}"
        )


# --- recovered homology ------------------------------------------------------


@dataclass(frozen=True)
class FrequencyRow:
    frequency: float
    length: object
    amplitude: float
    coords: tuple[int, ...]


@dataclass(frozen=True)
class FrequencyTable:
    rows: tuple[FrequencyRow, ...]
    rank: int


class LengthOracle:
    """Minimal periodic-orbit length per class of the recovered lattice.

    Generators carry signed real flux values r_i; a class m maps to the
    frequency |sum m_i r_i|, which the backing source resolves.  The table
    of observed classes (everything with minimal length up to the walked
    depth) seeds candidate enumeration; deeper searches use the ellipsoid
    bound quad(mu) <= radius, valid because cycle classes satisfy
    l(mu) = quad(mu) under the Albanese Gram form.
    """

    def __init__(self, source, gen_values: tuple[float, ...], freq_tol: float):
        self.source = source
        self.gen_values = gen_values
        self.rank = len(gen_values)
        self.freq_tol = freq_tol
        self._cache: dict[tuple[int, ...], object] = {}
        self.observed: dict[tuple[int, ...], object] = {}
        self.observed_depth: float = 0.0
        self._gram: list | None = None
        self._gram_basis: list | None = None

    def frequency_of(self, m) -> float:
        return abs(sum(int(c) * g for c, g in zip(m, self.gen_values)))

    def query(self, m):
        m = tuple(int(x) for x in m)
        if len(m) != self.rank:
            raise InputError("class dimension mismatch")
        if all(x == 0 for x in m):
            return 0
        key = _sign_canonical(m)
        if key not in self._cache:
            self._cache[key] = self.source.min_length_at_frequency(
                self.frequency_of(key)
            )
        return self._cache[key]

    __call__ = query

    def ensure_gram(self):
        """Unimodular cycle-class basis and its Gram matrix (lazy)."""
        if self._gram is None:
            basis = cycle_generator_basis(self)
            self._gram_basis = basis
            self._gram = recover_albanese(self, basis)
        return self._gram_basis, self._gram

    def quad(self, m) -> float:
        """Quadratic length form of a class under the recovered Gram."""
        basis, gram = self.ensure_gram()
        x = _integer_coords_int(m, basis)
        return float(
            sum(
                float(gram[i][j]) * x[i] * x[j]
                for i in range(len(x))
                for j in range(len(x))
            )
        )

    def candidate_classes(self, radius: float) -> dict:
        """Sign-canonical classes that can participate in decompositions at
        length scale radius, with their lengths.

        Inside the observed depth the table itself is complete; beyond it,
        classes are enumerated over the ellipsoid quad <= radius, which
        contains every class whose minimal orbit repeats no edge.
        """
        out = {
            k: v for k, v in self.observed.items() if float(v) <= radius + 1e-9
        }
        if radius <= self.observed_depth + 1e-9:
            return out
        basis, gram = self.ensure_gram()
        for x in _ellipsoid_points(gram, radius * (1.0 + 1e-9) + 1e-9):
            m = _sign_canonical(
                tuple(
                    sum(x[i] * basis[i][j] for i in range(len(basis)))
                    for j in range(self.rank)
                )
            )
            if not any(m) or m in out:
                continue
            l = self.query(m)
            if float(l) <= radius + 1e-9:
                out[m] = l
        return out


def _sign_canonical(m: tuple[int, ...]) -> tuple[int, ...]:
    for x in m:
        if x > 0:
            return m
        if x < 0:
            return tuple(-y for y in m)
    return m


def _integer_coords_int(m, basis):
    """Integer coordinates of class m over integer basis rows."""
    q = [Fraction(int(x)) for x in m]
    bas = [[Fraction(int(v)) for v in row] for row in basis]
    return _integer_coords(q, bas)


def _le(a, b, tol: float = 1e-9) -> bool:
    """a <= b with an exact fast path for rational values."""
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a <= b
    return float(a) <= float(b) + tol


def _lt(a, b, tol: float = 1e-9) -> bool:
    if isinstance(a, (int, Fraction)) and isinstance(b, (int, Fraction)):
        return a < b
    return float(a) < float(b) - tol


def recover_homology_lengths(source, margin: float = 1.5):
    """Read frequencies and first lengths off the Bloch data; infer the
    lattice rank and a generating set; return (FrequencyTable, LengthOracle).
    """
    n = source.rank_bound()
    if n == 0:
        return FrequencyTable((), 0), LengthOracle(source, (), source.freq_tol)
    l_cap = source.initial_lmax()
    rows: list[tuple[float, object, float]] = []  # (freq, first length, amplitude)
    frame: list[float] = []  # rationally independent reference frequencies
    qcoords: list[list[Fraction]] = []  # coords of each row over the frame
    while True:
        rows.clear()
        frame.clear()
        qcoords.clear()
        rank_done_at = None
        lattice_changed_at = 0.0
        lattice_hnf: list | None = None
        for rec in source.records(l_cap):
            for freq, amp in rec.cosines:
                if any(abs(freq - f) < source.freq_tol for f, _l, _a in rows):
                    continue
                q = _express_over_frame(freq, frame, n, source.freq_tol)
                if q is None:
                    if len(frame) == n:
                        raise NumericError(
                            f"frequency {freq} independent of a full frame: "
                            "the 1-form is not generic"
                        )
                    frame.append(freq)
                    q = [Fraction(0)] * len(frame)
                    q[-1] = Fraction(1)
                    lattice_changed_at = rec.length
                    lattice_hnf = None
                    if len(frame) == n and rank_done_at is None:
                        rank_done_at = rec.length
                elif any(x.denominator > 1 for x in q):
                    # only a genuine refinement of the running lattice counts
                    padded = [list(r) + [Fraction(0)] * (len(frame) - len(r)) for r in qcoords]
                    if lattice_hnf is None:
                        lattice_hnf = _lattice_basis_or_none(padded, len(frame))
                    if lattice_hnf is None or not _in_lattice(
                        list(q) + [Fraction(0)] * (len(frame) - len(q)), lattice_hnf
                    ):
                        lattice_changed_at = rec.length
                        lattice_hnf = None
                qcoords.append(q)
                rows.append((freq, rec.exact_length, amp))
        if rank_done_at is not None and l_cap >= margin * max(
            rank_done_at, lattice_changed_at, 1e-9
        ):
            break
        if l_cap >= source.hard_cap():
            raise InconclusiveError(
                f"rank {len(frame)} of {n} recovered up to length {l_cap}"
            )
        l_cap = min(1.6 * l_cap, source.hard_cap())
    # pad frame coords to dimension n and build the lattice basis
    qmat = [q + [Fraction(0)] * (n - len(q)) for q in qcoords]
    basis = _lattice_basis(qmat)  # rows over the frame, rational entries
    gen_values = tuple(
        float(sum(b * f for b, f in zip(row, frame))) for row in basis
    )
    coords = [_integer_coords(q, basis) for q in qmat]
    table = FrequencyTable(
        tuple(
            FrequencyRow(f, l, a, c)
            for (f, l, a), c in zip(rows, coords)
        ),
        n,
    )
    oracle = LengthOracle(source, gen_values, source.freq_tol)
    # the walked table is complete: it holds every class with minimal
    # length up to l_cap (minimal-length amplitudes cannot vanish)
    oracle.observed_depth = float(l_cap)
    for row in table.rows:
        key = _sign_canonical(row.coords)
        oracle._cache.setdefault(key, row.length)
        oracle.observed[key] = row.length
    return table, oracle


def _express_over_frame(freq, frame, n, tol):
    """Rational coordinates of freq over the frame, or None if independent.

    Relation coefficients are capped at 32: spurious float relations need
    far larger coefficients, genuine lattice relations far smaller.
    """
    if not frame:
        return None
    if tol > 1e-6:
        # noisy source: pslq is unreliable near its tolerance floor, so
        # search small integer combinations directly
        best = None
        for combo in itertools.product(range(-8, 9), repeat=len(frame)):
            got = sum(c * f for c, f in zip(combo, frame))
            for sign in (1, -1):
                err = abs(sign * got - freq)
                if err < tol and (best is None or err < best[0]):
                    best = (err, tuple(sign * c for c in combo))
        if best is None:
            return None
        return [Fraction(c) for c in best[1]]
    rel = pslq(
        [mpf(freq)] + [mpf(f) for f in frame],
        tol=mpf(max(tol * 1e-2, 1e-12)),
        maxcoeff=_MAX_COEFF,
    )
    if rel is None or rel[0] == 0:
        return None
    c0 = rel[0]
    q = [Fraction(-c, c0) for c in rel[1:]]
    got = sum(float(x) * f for x, f in zip(q, frame))
    if abs(abs(got) - abs(freq)) > max(10 * tol, 1e-9):
        raise NumericError(f"integer-relation fit failed for frequency {freq}")
    if any(abs(x.numerator) > _MAX_COEFF * x.denominator for x in q):
        raise NumericError(f"relation coefficients too large for frequency {freq}")
    return q


def _lattice_basis(qmat):
    """HNF basis of the lattice generated by rational row vectors."""
    n = len(qmat[0])
    den = 1
    for row in qmat:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    int_rows = [[int(x * den) for x in row] for row in qmat]
    hnf = _hnf(int_rows)
    if len(hnf) != n:
        raise NumericError("recovered frequency lattice is rank deficient")
    return [[Fraction(x, den) for x in row] for row in hnf]


def _lattice_basis_or_none(qmat, dim):
    rows = [r for r in qmat if any(r)]
    if not rows:
        return None
    den = 1
    for row in rows:
        for x in row:
            den = den * x.denominator // math.gcd(den, x.denominator)
    hnf = _hnf([[int(x * den) for x in row] for row in rows])
    return [[Fraction(x, den) for x in row] for row in hnf]


def _in_lattice(q, basis_rows) -> bool:
    """Exact membership of a rational vector in the row lattice."""
    work = [list(r) for r in basis_rows]
    vec = list(q)
    # reduce vec against the (echelon) basis rows
    for row in work:
        piv = next((j for j, x in enumerate(row) if x != 0), None)
        if piv is None:
            continue
        f = vec[piv] / row[piv]
        if f.denominator != 1:
            return False
        vec = [a - f * b for a, b in zip(vec, row)]
    return all(x == 0 for x in vec)


def _hnf(rows):
    """Row Hermite normal form (nonzero rows) of an integer matrix."""
    mat = [list(r) for r in rows if any(r)]
    if not mat:
        return []
    ncols = len(mat[0])
    r = 0
    for c in range(ncols):
        piv = None
        for i in range(r, len(mat)):
            if mat[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        for i in range(r + 1, len(mat)):
            while mat[i][c] != 0:
                q = mat[r][c] // mat[i][c]
                mat[r] = [a - q * b for a, b in zip(mat[r], mat[i])]
                mat[r], mat[i] = mat[i], mat[r]
        if mat[r][c] < 0:
            mat[r] = [-x for x in mat[r]]
        for i in range(r):
            q = mat[i][c] // mat[r][c]
            if q:
                mat[i] = [a - q * b for a, b in zip(mat[i], mat[r])]
        r += 1
        if r == len(mat):
            break
    return [row for row in mat[:r] if any(row)]


def _integer_coords(q, basis):
    """Solve q = x * basis exactly; entries must be integers."""
    n = len(basis)
    # Gaussian elimination over Q
    aug = [[basis[i][j] for i in range(n)] for j in range(n)]  # columns = basis rows
    rhs = list(q)
    x = [Fraction(0)] * n
    # simple exact solve via numpy-free elimination
    mat = [row[:] + [rhs[i]] for i, row in enumerate(aug)]
    for col in range(n):
        piv = None
        for i in range(col, n):
            if mat[i][col] != 0:
                piv = i
                break
        if piv is None:
            raise NumericError("lattice basis is singular")
        mat[col], mat[piv] = mat[piv], mat[col]
        inv = mat[col][col]
        mat[col] = [v / inv for v in mat[col]]
        for i in range(n):
            if i != col and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[col])]
    for i in range(n):
        x[i] = mat[i][n]
        if x[i].denominator != 1:
            raise NumericError("non-integer coordinates over the lattice basis")
    return tuple(int(v) for v in x)


# --- cycle recognition and generators ---------------------------------------


def _ellipsoid_points(gram, radius: float):
    """Nonzero integer points with x^T G x <= radius, one per +-pair."""
    G = np.array([[float(v) for v in row] for row in gram])
    n = len(G)
    if n == 0:
        return []
    U = np.linalg.cholesky(G).T  # x^T G x = |U x|^2
    out = []

    def rec(i, fixed, rem):
        if len(out) > _BALL_CAP:
            raise InconclusiveError("ellipsoid enumeration exceeded cap")
        if i < 0:
            x = tuple(int(v) for v in fixed)
            if any(x):
                out.append(x)
            return
        center = -sum(U[i][j] * fixed[j - (i + 1)] for j in range(i + 1, n)) / U[i][i]
        half = math.sqrt(max(rem, 0.0)) / U[i][i]
        lo = math.ceil(center - half - 1e-12)
        hi = math.floor(center + half + 1e-12)
        for xi in range(lo, hi + 1):
            d = U[i][i] * (xi - center)
            rec(i - 1, [xi] + fixed, rem - d * d)

    rec(n - 1, [], float(radius))
    dedup = {}
    for x in out:
        dedup[_sign_canonical(x)] = True
    return list(dedup)


def is_cycle_class(mu, oracle: LengthOracle, tol: float = 1e-9) -> bool:
    """True iff the minimal orbit of mu is a cycle: no decomposition
    mu = kappa + kappa' with l(kappa) + l(kappa') <= l(mu)."""
    mu = tuple(int(x) for x in mu)
    if not any(mu):
        return False
    lmu = oracle.query(mu)
    for kappa, lk in oracle.candidate_classes(float(lmu)).items():
        for k in (kappa, tuple(-x for x in kappa)):
            rest = tuple(m - x for m, x in zip(mu, k))
            if not any(rest):
                continue
            lr = oracle.query(rest)
            if _le(lk + lr, lmu, tol):
                return False
    return True


def cycle_generator_basis(oracle: LengthOracle) -> list[tuple[int, ...]]:
    """A unimodular lattice basis whose classes are all cycle classes,
    preferring short generators.

    Candidates come from the observed table (complete up to the walked
    depth), so the search never leaves certified ground.
    """
    n = oracle.rank
    if n == 0:
        return []
    pool = sorted(
        (
            (float(l), mu)
            for mu, l in oracle.candidate_classes(oracle.observed_depth).items()
            if is_cycle_class(mu, oracle)
        ),
        key=lambda t: (t[0], t[1]),
    )
    cand = [mu for _l, mu in pool]
    picked: list[tuple[int, ...]] = []
    for mu in cand:
        if int_rank(picked + [mu]) == len(picked) + 1:
            picked.append(mu)
        if len(picked) == n:
            break
    if len(picked) == n and abs(int_det(picked)) == 1:
        return picked
    found = _unimodular_subset(cand, n)
    if found is not None:
        return found
    raise InconclusiveError("no unimodular basis of cycle classes found")


def _unimodular_subset(cand, n, node_cap: int = 200_000):
    chosen: list[tuple[int, ...]] = []
    nodes = 0

    def dfs(start):
        nonlocal nodes
        if len(chosen) == n:
            return abs(int_det(chosen)) == 1
        for i in range(start, len(cand)):
            nodes += 1
            if nodes > node_cap:
                raise InconclusiveError("unimodular basis search exceeded cap")
            mu = cand[i]
            if int_rank(chosen + [mu]) != len(chosen) + 1:
                continue
            chosen.append(mu)
            if dfs(i + 1):
                return True
            chosen.pop()
        return False

    return list(chosen) if dfs(0) else None


# --- Albanese recovery -------------------------------------------------------


def recover_albanese(oracle: LengthOracle, basis=None):
    """Gram matrix from minimal lengths: |v_i|^2 = l(mu_i) and
    2<v_i,v_j> = l(mu_i + mu_j) - l(mu_i - mu_j)."""
    if basis is None:
        basis = cycle_generator_basis(oracle)
    n = len(basis)
    gram = [[None] * n for _ in range(n)]
    for i in range(n):
        gram[i][i] = oracle.query(basis[i])
    for i in range(n):
        for j in range(i + 1, n):
            plus = tuple(a + b for a, b in zip(basis[i], basis[j]))
            minus = tuple(a - b for a, b in zip(basis[i], basis[j]))
            val = (oracle.query(plus) - oracle.query(minus)) / 2
            gram[i][j] = gram[j][i] = val
    arr = np.array([[float(x) for x in row] for row in gram])
    if n and np.linalg.eigvalsh(arr).min() <= 0:
        raise NumericError("recovered Gram matrix is indefinite: oracle inconsistent")
    return gram


def complexity_equilateral(gram) -> float:
    """sqrt(det Gram): for equilateral unit-length graphs this equals the
    square root of the spanning-tree count."""
    return math.sqrt(float(gram_determinant(gram)))


def gram_determinant(gram):
    rows = [list(r) for r in gram]
    if rows and all(
        isinstance(x, (int, Fraction)) for row in rows for x in row
    ):
        return int_det(rows)
    return float(np.linalg.det(np.array([[float(x) for x in r] for r in rows])))


# --- block structure ---------------------------------------------------------


@dataclass(frozen=True)
class RecoveredBlockTree:
    """Blocks with homology ranks plus a metric layout tree.

    Layout nodes are ('block', i) or ('junction', j); edges carry the
    distances between attachment points (bridge paths).
    """

    block_generators: tuple[tuple[int, ...], ...]  # generator indices per block
    block_ranks: tuple[int, ...]
    distances: tuple[tuple[float, ...], ...]
    layout_edges: tuple  # ((node, node, length), ...)

    def signature(self):
        adj = {}
        labels = {}
        for i, r in enumerate(self.block_ranks):
            labels[("block", i)] = ("block", r)
            adj.setdefault(("block", i), [])
        for a, b, l in self.layout_edges:
            labels.setdefault(a, (a[0],))
            labels.setdefault(b, (b[0],))
            adj.setdefault(a, []).append((b, round(float(l), 9)))
            adj.setdefault(b, []).append((a, round(float(l), 9)))

        def ahu(node, parent):
            subs = sorted(
                (l, ahu(c, node)) for c, l in adj[node] if c != parent
            )
            return (labels[node], tuple(subs))

        return min(ahu(r, None) for r in sorted(adj, key=lambda x: (x[0], str(x[1]))))


def _shares_edges(oracle, mu, kappa, tol=1e-9) -> bool:
    s = oracle.query(mu) + oracle.query(kappa)
    plus = oracle.query(tuple(a + b for a, b in zip(mu, kappa)))
    minus = oracle.query(tuple(a - b for a, b in zip(mu, kappa)))
    return _lt(plus, s, tol) or _lt(minus, s, tol)


def recover_blocks(oracle: LengthOracle) -> RecoveredBlockTree:
    """Group cycle generators into blocks and lay out the block tree from
    pairwise block distances."""
    gens = cycle_generator_basis(oracle)
    n = len(gens)
    if n == 0:
        raise InputError("trivial homology: no blocks to recover")
    # edge-sharing equivalence, transitively closed
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in itertools.combinations(range(n), 2):
        if _shares_edges(oracle, gens[i], gens[j]):
            parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    blocks = sorted(groups.values())
    b = len(blocks)
    D = [[0.0] * b for _ in range(b)]
    for x, y in itertools.combinations(range(b), 2):
        best = None
        for i in blocks[x]:
            for j in blocks[y]:
                li, lj = oracle.query(gens[i]), oracle.query(gens[j])
                plus = oracle.query(tuple(a + c for a, c in zip(gens[i], gens[j])))
                minus = oracle.query(tuple(a - c for a, c in zip(gens[i], gens[j])))
                d = (min(float(plus), float(minus)) - float(li) - float(lj)) / 2.0
                if best is None or d < best:
                    best = d
        D[x][y] = D[y][x] = max(best, 0.0)
    layout = _layout_block_tree(list(range(b)), D)
    return RecoveredBlockTree(
        tuple(tuple(blocks[i]) for i in range(b)),
        tuple(len(blocks[i]) for i in range(b)),
        tuple(tuple(row) for row in D),
        tuple(layout),
    )


def _layout_block_tree(ids, D, tol=1e-9):
    """Recursive layout per the distance matrix: find inner blocks via
    triangle violations, split, lay out the pieces, and glue."""
    if len(ids) == 1:
        return []
    inner = None
    for a in ids:
        for b1, b2 in itertools.combinations([x for x in ids if x != a], 2):
            if D[b1][b2] > D[a][b1] + D[a][b2] + tol:
                inner = a
                break
        if inner is not None:
            break
    if inner is None:
        return _layout_leaf_piece(ids, D, tol)
    rest = [x for x in ids if x != inner]
    # group by attachment point on the inner block
    groups: list[list[int]] = []
    for x in rest:
        placed = False
        for grp in groups:
            y = grp[0]
            if D[x][y] <= D[inner][x] + D[inner][y] + tol:
                grp.append(x)
                placed = True
                break
        if not placed:
            groups.append([x])
    edges = []
    for grp in groups:
        edges.extend(_layout_block_tree([inner] + grp, D, tol))
    return edges


def _layout_leaf_piece(ids, D, tol):
    """All blocks are leaves: star/tree layout from leaf distances."""
    if len(ids) == 2:
        a, b = ids
        return [(("block", a), ("block", b), D[a][b])]
    # cluster blocks at mutual distance zero (shared cut vertex)
    reps = []
    cluster_of = {}
    for x in ids:
        for r in reps:
            if D[x][r] <= tol:
                cluster_of[x] = r
                break
        else:
            reps.append(x)
            cluster_of[x] = x
    if len(reps) == 1:
        j = ("junction", reps[0])
        return [(("block", x), j, 0.0) for x in ids]
    if len(reps) == 2:
        edges = [(("block", reps[0]), ("block", reps[1]), D[reps[0]][reps[1]])]
    else:
        sub = [[D[a][b] for b in reps] for a in reps]
        tree = tree_from_leaf_distances(sub)
        g = tree.graph
        edges = []
        for eid, (u, v) in enumerate(g.graph.edges):
            nu = ("block", reps[u]) if u < len(reps) else ("junction", (tuple(sorted(reps)), u))
            nv = ("block", reps[v]) if v < len(reps) else ("junction", (tuple(sorted(reps)), v))
            edges.append((nu, nv, float(g.lengths[eid])))
    for x in ids:
        if cluster_of[x] != x:
            edges.append((("block", x), ("block", cluster_of[x]), 0.0))
    return edges


# --- planarity ----------------------------------------------------------------


def recover_planarity(oracle: LengthOracle, node_cap: int = 2_000_000):
    """A non-positive basis of cycle classes with orientation signs, or None
    if no such basis exists (the graph is non-planar).

    Every simple cycle has length at most the total edge length, which the
    spectrum determines, so the candidate pool is finite and complete.
    """
    n = oracle.rank
    if n == 0:
        return []
    radius = float(oracle.source.total_length()) * (1.0 + 1e-9)
    pool = sorted(
        (
            (float(l), mu)
            for mu, l in oracle.candidate_classes(radius).items()
            if is_cycle_class(mu, oracle)
        ),
        key=lambda t: (t[0], t[1]),
    )
    cand = [mu for _l, mu in pool]
    lengths = {mu: l for l, mu in pool}
    m = len(cand)
    # pairwise orientation constraints
    # rel: None free, 0 same-sign required, 1 opposite required, 2 conflict
    rel = {}
    for i, j in itertools.combinations(range(m), 2):
        a, bvec = cand[i], cand[j]
        la, lb = lengths[a], lengths[bvec]
        minus = oracle.query(tuple(x - y for x, y in zip(a, bvec)))
        plus = oracle.query(tuple(x + y for x, y in zip(a, bvec)))
        pos_same = _lt(minus, la + lb)  # positive overlap when equally oriented
        pos_opp = _lt(plus, la + lb)
        if pos_same and pos_opp:
            r = 2
        elif pos_same:
            r = 1
        elif pos_opp:
            r = 0
        else:
            r = None
        rel[(i, j)] = r

    chosen: list[int] = []
    nodes = 0

    def feasible_signs(indices):
        # 2-coloring with parity constraints
        col = {}
        for idx in indices:
            if idx not in col:
                col[idx] = 0
                stack = [idx]
                while stack:
                    x = stack.pop()
                    for y in indices:
                        if y == x:
                            continue
                        r = rel[(min(x, y), max(x, y))]
                        if r in (0, 1):
                            want = col[x] ^ r
                            if y in col:
                                if col[y] != want:
                                    return None
                            else:
                                col[y] = want
                                stack.append(y)
        return col

    def dfs(start):
        nonlocal nodes
        if len(chosen) == n:
            if int_rank([cand[i] for i in chosen]) < n:
                return None
            col = feasible_signs(chosen)
            if col is None:
                return None
            return [
                tuple(x if col[i] == 0 else -x for x in cand[i]) for i in chosen
            ]
        for i in range(start, m):
            nodes += 1
            if nodes > node_cap:
                raise InconclusiveError("planarity basis search exceeded cap")
            if any(rel[(min(i, j), max(i, j))] == 2 for j in chosen):
                continue
            if int_rank([cand[j] for j in chosen] + [cand[i]]) != len(chosen) + 1:
                continue
            chosen.append(i)
            if feasible_signs(chosen) is not None:
                res = dfs(i + 1)
                if res is not None:
                    return res
            chosen.pop()
        return None

    return dfs(0)


# --- shared edges, dual, full reconstruction ----------------------------------


def count_shared_edges(mu_i, mu_j, oracle: LengthOracle, tol: float = 1e-9) -> int:
    """Number of common edges of two facial cycles, from the cycle
    decomposition of their sum class."""
    mu_i, mu_j = tuple(mu_i), tuple(mu_j)
    li, lj = oracle.query(mu_i), oracle.query(mu_j)
    total = tuple(a + b for a, b in zip(mu_i, mu_j))
    if not any(total):
        raise InputError("facial classes sum to zero")
    if not _lt(oracle.query(total), li + lj, tol):
        return 0
    comps = _decompose_into_cycles(total, oracle, tol)
    k = len(comps)
    touching = 0
    for a, b in itertools.combinations(comps, 2):
        la, lb = oracle.query(a), oracle.query(b)
        plus = oracle.query(tuple(x + y for x, y in zip(a, b)))
        minus = oracle.query(tuple(x - y for x, y in zip(a, b)))
        joined = min(float(plus), float(minus))
        if abs(joined - float(la) - float(lb)) <= tol:
            touching += 1
    return k - touching


def _decompose_into_cycles(nu, oracle, tol, depth=0):
    if depth > 16:
        raise NumericError("cycle decomposition recursion exceeded")
    if is_cycle_class(nu, oracle, tol):
        return [_sign_canonical(nu)]
    lnu = oracle.query(nu)
    best = None
    for kappa, lk in sorted(
        oracle.candidate_classes(float(lnu)).items(), key=lambda t: (float(t[1]), t[0])
    ):
        for k in (kappa, tuple(-x for x in kappa)):
            rest = tuple(m - x for m, x in zip(nu, k))
            if not any(rest):
                continue
            lr = oracle.query(rest)
            if _le(lk + lr, lnu, tol):
                best = (k, rest)
                break
        if best:
            break
    if best is None:
        raise NumericError(f"class {nu} is not a cycle but admits no split")
    k, rest = best
    return _decompose_into_cycles(k, oracle, tol, depth + 1) + _decompose_into_cycles(
        rest, oracle, tol, depth + 1
    )


@dataclass(frozen=True)
class RecoveredDual:
    graph: CombinatorialGraph
    face_classes: tuple  # signed lattice vectors, outer face last
    face_lengths: tuple
    outer_index: int


def recover_dual(oracle: LengthOracle) -> RecoveredDual:
    """Dual graph on the facial basis plus the outer face; multiplicities
    from shared-edge counts."""
    basis = recover_planarity(oracle)
    if basis is None:
        raise InputError("graph is not planar; no dual exists")
    blocks = recover_blocks(oracle)
    if len(blocks.block_ranks) != 1:
        raise InputError(
            "graph is not 2-connected; recover each block separately"
        )
    n = len(basis)
    gamma0 = tuple(-sum(v[i] for v in basis) for i in range(n))
    faces = list(basis) + [gamma0]
    edges = []
    for a, b in itertools.combinations(range(len(faces)), 2):
        mult = count_shared_edges(faces[a], faces[b], oracle)
        edges.extend([(a, b)] * mult)
    dual = CombinatorialGraph(n + 1, tuple(edges))
    lengths = tuple(oracle.query(f) for f in faces)
    return RecoveredDual(dual, tuple(faces), lengths, n)


def recover_quantum_graph(oracle: LengthOracle) -> MetricGraph:
    """Full reconstruction of a 3-connected planar quantum graph: the dual
    of the recovered dual plus edge lengths 2L(e) = L(c1)+L(c2)-L(c3)."""
    rd = recover_dual(oracle)
    dual_faces = nonpositive_basis_search(rd.graph)
    if dual_faces is None:
        raise NumericError("recovered dual is not planar: oracle inconsistent")
    hgraph, edge_map = geometric_dual(rd.graph, dual_faces)
    if not is_k_connected(hgraph, 3):
        raise InputError(
            "reconstructed graph is not 3-connected; the dual is not unique"
        )
    lengths = []
    for dual_eid in edge_map:
        a, b = rd.graph.edges[dual_eid]
        fa, fb = rd.face_classes[a], rd.face_classes[b]
        la, lb = oracle.query(fa), oracle.query(fb)
        lc = oracle.query(tuple(x + y for x, y in zip(fa, fb)))
        val = (la + lb - lc) / 2
        if not float(val) > 0:
            raise NumericError("non-positive edge length recovered")
        lengths.append(val)
    return MetricGraph(hgraph, tuple(lengths))
