"""Periodic orbits, trace coefficients, length spectra, minimal lengths."""

import cmath
import math
from fractions import Fraction as F

import pytest

from qgraph import zoo
from qgraph.errors import InputError
from qgraph.graphs import CombinatorialGraph, enumerate_simple_cycles, walk_homology
from qgraph.metric import MetricGraph, generic_one_form
from qgraph.orbits import (
    MinimalLengthOracle,
    enumerate_orbits,
    length_spectrum,
    minimal_length_oracle,
    orbit_coefficient,
    sign_check,
    trace_check,
)
from qgraph.spectral import eigenvalues


class TestEnumeration:
    def test_circle_powers(self):
        orbs = enumerate_orbits(zoo.circle(F(1)), F(7, 2))
        pure = [o for o in orbs if o.backtracks == 0]
        lengths = sorted(float(o.length) for o in pure)
        assert lengths == [1.0, 1.0, 2.0, 2.0, 3.0, 3.0]  # both orientations
        # backtracking walks on the loop exist but carry zero weight at a
        # degree-2 vertex
        for o in orbs:
            if o.backtracks:
                assert orbit_coefficient(o, None, zoo.circle(F(1))).value == 0

    def test_single_edge_graph(self):
        g = zoo.path_graph(1, (F(1),))
        orbs = enumerate_orbits(g, F(5, 2))
        assert len(orbs) == 1
        (o,) = orbs
        assert o.length == 2 and o.backtracks == 2

    def test_theta_hand_list(self):
        g = zoo.theta(F(1), F(6, 5), F(3, 2))
        orbs = enumerate_orbits(g, F(23, 10))
        described = sorted((float(o.length), o.backtracks) for o in orbs)
        assert described == [(2.0, 2), (2.2, 0), (2.2, 0)]

    def test_repetitions_and_primitive_length(self):
        orbs = enumerate_orbits(zoo.circle(F(1)), F(3))
        reps = {(o.repetition, float(o.length)) for o in orbs if o.backtracks == 0}
        assert (3, 3.0) in reps and (1, 1.0) in reps
        for o in orbs:
            assert o.length == o.repetition * o.primitive_length

    def test_orientation_reversal_partner(self):
        g = zoo.theta(F(1), F(6, 5), F(3, 2))
        orbs = enumerate_orbits(g, F(23, 10))
        cycles = [o for o in orbs if o.backtracks == 0]
        assert cycles[0].reversed_(g).bonds == cycles[1].bonds


class TestCoefficients:
    def test_cancellation_example_values(self):
        g = zoo.cancellation_example()
        orbs = [o for o in enumerate_orbits(g, F(23, 5)) if o.length == F(23, 5)]
        values = sorted(orbit_coefficient(o, None, g).value for o in orbs)
        assert values == [F(-23, 80)] * 4 + [F(23, 20)]
        assert sum(values) == 0

    def test_contractible_phase_one(self):
        g = zoo.theta(1.0, 1.2, 1.5)
        alpha = generic_one_form(g, 0)
        orbs = enumerate_orbits(g, 2.1)
        trivial = [o for o in orbs if not any(o.homology)]
        assert trivial
        for o in trivial:
            c = orbit_coefficient(o, alpha, g)
            assert abs(cmath.exp(1j * c.flux) - 1.0) < 1e-12

    def test_reversal_conjugates(self):
        g = zoo.theta(1.0, 1.2, 1.5)
        alpha = generic_one_form(g, 0)
        for o in enumerate_orbits(g, 4.5):
            a = complex(orbit_coefficient(o, alpha, g).value)
            ar = complex(orbit_coefficient(o.reversed_(g), alpha, g).value)
            assert abs(a - ar.conjugate()) < 1e-12

    def test_positivity_lemma_all_orbits(self):
        for g in (zoo.theta(F(1), F(6, 5), F(3, 2)), zoo.figure_eight(F(1), F(2))):
            for o in enumerate_orbits(g, F(4)):
                val = orbit_coefficient(o, None, g).value
                assert (val > 0) == (o.backtracks % 2 == 0)
                assert sign_check(o, g) == (1 if o.backtracks % 2 == 0 else -1)

    def test_sign_check_refuses_leafy(self):
        g = zoo.path_graph(1, (F(1),))
        o = enumerate_orbits(g, F(2))[0]
        with pytest.raises(InputError):
            sign_check(o, g)


class TestLengthSpectrum:
    def test_exact_cancellation_entry(self):
        g = zoo.cancellation_example()
        ls = length_spectrum(g, None, F(23, 5))
        entry = ls.entry_at(F(23, 5))
        assert entry.constant == F(23, 20)
        assert entry.aggregate_at_zero() == 0

    def test_aggregate_matches_orbit_sum(self):
        g = zoo.theta(F(1), F(6, 5), F(3, 2))
        ls = length_spectrum(g, None, F(4))
        orbs = enumerate_orbits(g, F(4))
        for entry in ls.entries:
            direct = sum(
                orbit_coefficient(o, None, g).value
                for o in orbs
                if o.length == entry.length
            )
            assert entry.aggregate_at_zero() == direct

    def test_figure8_frequency_assignment(self):
        g = zoo.figure_eight(1.0, math.sqrt(2))
        alpha = generic_one_form(g, 0)
        ls = length_spectrum(g, alpha, 2.1)
        entry = ls.entry_at(2.0)
        from qgraph.metric import flux as flux_of

        mu_loop1 = abs(flux_of(alpha, (1, 0), g))
        doubled = [t for t in entry.terms if abs(t[2] - 2 * mu_loop1) < 1e-12]
        assert doubled  # loop1 traversed twice appears with flux 2*mu1

    def test_trivial_class_pure_constant(self):
        g = zoo.theta(F(1), F(6, 5), F(3, 2))
        alpha = generic_one_form(g, 0)
        ls = length_spectrum(g, alpha, F(2))
        entry = ls.entry_at(F(2))  # backtrack orbit on the unit edge
        assert entry.terms == ()
        assert entry.constant == F(2, 9)


class TestTraceCheck:
    def test_circle_peak(self):
        g = zoo.circle(1.0)
        s = eigenvalues(g, None, 400.0)
        rep = trace_check(g, None, s, 0.02, 3.2)
        w0 = 1.0 / (0.02 * math.sqrt(2 * math.pi))
        for r in rep.records:
            assert r.relative_error < 1e-2
        first = rep.records[0]
        assert abs(first.geometric / w0 - 2.0) < 1e-2  # both orientations

    def test_constant_conventions_reported(self):
        g = zoo.circle(1.0)
        s = eigenvalues(g, None, 400.0)
        rep = trace_check(g, None, s, 0.02, 3.2)
        assert rep.chi_v_minus_e == 0
        assert rep.chi_v_minus_e_minus_1 == -1
        assert rep.matching_convention == "V-E-1"
        assert abs(rep.fitted_constant - (-1.0)) < 1e-2

    def test_truncation_guard(self):
        g = zoo.circle(1.0)
        s = eigenvalues(g, None, 30.0)
        from qgraph.errors import NumericError

        with pytest.raises(NumericError):
            trace_check(g, None, s, 0.02, 3.0)


class TestMinimalLengthOracle:
    def test_figure8(self):
        g = zoo.figure_eight(F(3), F(5))
        oracle = minimal_length_oracle(g)
        assert oracle((1, 0)) == 3
        assert oracle((0, 1)) == 5
        assert oracle((1, 1)) == 8
        assert oracle((1, -1)) == 8
        assert oracle((0, 0)) == 0

    def test_theta_classes(self):
        g = zoo.theta(F(1), F(1), F(1))
        oracle = minimal_length_oracle(g)
        # spanning basis: gamma_i = e_{i+1} then e_0 reversed
        assert oracle((1, 0)) == 2
        assert oracle((0, 1)) == 2
        assert oracle((1, -1)) == 2  # e1 against e2: also a cycle
        assert oracle((1, 1)) == 4  # winds around e0 twice

    def test_symmetry(self):
        g = zoo.theta(F(1), F(6, 5), F(3, 2))
        oracle = minimal_length_oracle(g)
        for mu in ((1, 0), (2, 1), (1, -2), (3, 2)):
            assert oracle(mu) == oracle(tuple(-x for x in mu))

    def test_subadditive_when_minimizers_meet(self):
        g = zoo.figure_eight(F(3), F(5))
        oracle = minimal_length_oracle(g)
        assert oracle((1, 1)) <= oracle((1, 0)) + oracle((0, 1))

    def test_simple_cycles_are_unique_minimizers(self):
        g = zoo.k4((F(10), F(11), F(12), F(13), F(14), F(15)))
        oracle = minimal_length_oracle(g)
        for cyc in enumerate_simple_cycles(g.graph):
            mu = walk_homology(g.graph, cyc.bonds)
            assert oracle(mu) == sum(g.lengths[e] for e in cyc.edge_ids())

    def test_matches_enumeration(self):
        g = zoo.theta(F(1), F(6, 5), F(3, 2))
        oracle = minimal_length_oracle(g)
        orbs = enumerate_orbits(g, F(5))
        best = {}
        for o in orbs:
            key = tuple(o.homology)
            if key not in best or o.length < best[key]:
                best[key] = o.length
        for mu, l in best.items():
            if any(mu):
                assert oracle(mu) == l

    def test_requested_classes_precomputed(self):
        g = zoo.figure_eight(F(1), F(2))
        oracle = minimal_length_oracle(g, [(1, 0), (0, 1), (1, 1)])
        assert oracle._cache  # warm

    def test_leafy_rejected(self):
        with pytest.raises(InputError):
            MinimalLengthOracle(zoo.path_graph(2))
