"""Secular equation, eigenvalue slices, counting, combinatorial spectra."""

import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from qgraph import zoo
from qgraph.errors import InputError
from qgraph.graphs import CombinatorialGraph
from qgraph.metric import (
    MetricGraph,
    OneForm,
    VertexPotential,
    add_exact_form,
    generic_one_form,
    harmonic_form_with_fluxes,
)
from qgraph.spectral import (
    BondScattering,
    combinatorial_laplacian,
    combinatorial_spectrum,
    counting_function_check,
    eigenvalues,
    equilateral_correspondence_check,
    graph_isospectral,
    secular_det,
    secular_matrix,
    weyl_check,
    zero_mode_multiplicity,
)
from qgraph.graphs import spanning_tree_cycle_basis


class TestSecularMatrix:
    def test_scattering_entries_degree3(self):
        g = zoo.theta()
        sm = secular_matrix(g, None, 0.0)
        T = sm.transfer
        # bond 0 ends at vertex 1; bond 1 = its reversal (backtrack)
        assert abs(T[0, 1] - (-1 / 3)) < 1e-15
        assert abs(T[0, 3] - 2 / 3) < 1e-15

    def test_leaf_backtrack_plus_one(self):
        g = zoo.path_graph(1, (1.0,))
        sm = secular_matrix(g, None, 1.0)
        assert abs(sm.transfer[0, 1] - 1.0) < 1e-15

    def test_identity_diagonal_at_zero(self):
        g = zoo.theta()
        sm = secular_matrix(g, None, 0.0)
        assert np.allclose(sm.diagonal, np.ones(6))

    def test_unitary_on_real_axis(self):
        g = zoo.k4((1.0, 1.1, 1.2, 1.3, 1.4, 1.5))
        alpha = generic_one_form(g, 0)
        sm = secular_matrix(g, alpha, 3.7)
        S = sm.matrix
        assert np.max(np.abs(S @ S.conj().T - np.eye(12))) < 1e-12


class TestSecularDet:
    def test_circle_zeros(self):
        g = zoo.circle(1.0)
        for m in range(1, 4):
            assert abs(secular_det(g, None, 2 * math.pi * m)) < 1e-10
        assert abs(secular_det(g, None, math.pi)) > 0.1

    def test_circle_with_flux(self):
        g = zoo.circle(1.0)
        theta = 0.3
        form = OneForm((theta,))
        for m in range(3):
            assert abs(secular_det(g, form, 2 * math.pi * (m + theta))) < 1e-9

    def test_theta_pi_eigenvalue(self):
        g = zoo.theta()
        assert abs(secular_det(g, None, math.pi)) < 1e-10

    def test_time_reversal_conjugation(self):
        # at the zero form, zeta(-conj(k)) = conj(zeta(k))
        g = zoo.theta(1.0, 1.2, 1.5)
        k = 2.3 + 0.01j
        z1 = secular_det(g, None, k)
        z2 = secular_det(g, None, -np.conj(k))
        assert abs(z1 - np.conj(z2)) < 1e-12


class TestEigenvalues:
    def test_circle_doubles(self):
        s = eigenvalues(zoo.circle(1.0), None, 30.0)
        assert s.entries[0] == (0.0, 1)
        for i, (k, m) in enumerate(s.entries[1:], start=1):
            assert abs(k - 2 * math.pi * i) < 1e-9
            assert m == 2

    def test_flux_circle(self):
        theta = 0.3
        s = eigenvalues(zoo.circle(1.0), OneForm((theta,)), 30.0)
        expected = sorted(
            2 * math.pi * abs(m + sgn * theta)
            for m in range(0, 6)
            for sgn in (1, -1)
            if 0 <= 2 * math.pi * (m + sgn * theta) <= 30.0
        )
        got = s.wavenumbers()
        assert len(got) == len(expected)
        assert max(abs(a - b) for a, b in zip(got, expected)) < 1e-8

    def test_zero_multiplicity_connected(self):
        s = eigenvalues(zoo.theta(1.0, 1.2, 1.5), None, 5.0)
        assert s.zero_multiplicity() == 1

    def test_two_disjoint_circles(self):
        g = MetricGraph(CombinatorialGraph(2, ((0, 0), (1, 1))), (1.0, 1.4))
        s = eigenvalues(g, None, 10.0)
        assert s.zero_multiplicity() == 2

    def test_zero_mode_with_integer_cycle_integrals(self):
        g = zoo.theta(1.0, 1.2, 1.5)
        basis = spanning_tree_cycle_basis(g.graph)
        form = harmonic_form_with_fluxes(g, basis, [2 * math.pi, 4 * math.pi])
        assert zero_mode_multiplicity(g, form) == 1
        form2 = harmonic_form_with_fluxes(g, basis, [math.pi, 2 * math.pi])
        assert zero_mode_multiplicity(g, form2) == 0

    def test_counting_function_agreement(self):
        g = zoo.theta(1.0, 1.2, 1.5)
        s = eigenvalues(g, None, 12.0)
        a, b = 0.5, 11.5
        est = counting_function_check(g, None, a, b)
        true = sum(m for k, m in s.entries if a < k <= b)
        assert abs(est - true) < 0.2

    def test_counting_function_with_flux(self):
        g = zoo.figure_eight(1.0, math.sqrt(2))
        alpha = generic_one_form(g, 0).scaled(0.7)
        s = eigenvalues(g, alpha, 10.0)
        est = counting_function_check(g, alpha, 0.05, 10.0)
        true = sum(m for k, m in s.entries if 0.05 < k <= 10.0)
        assert abs(est - true) < 0.2


class TestWeyl:
    def test_circle_bound(self):
        s = eigenvalues(zoo.circle(1.0), None, 100.0)
        rep = weyl_check(s, 1.0)
        assert rep.max_deviation <= 2.0

    def test_theta_no_drift(self):
        s = eigenvalues(zoo.theta(), None, 60.0)
        rep = weyl_check(s, 3.0)
        assert abs(rep.slope) < 0.01

    def test_empty_slice(self):
        s = eigenvalues(zoo.circle(1.0), None, 1.0)
        rep = weyl_check(s, 1.0)
        assert rep.max_deviation <= 1.0


class TestCombinatorialLaplacian:
    def test_k4(self):
        spec = combinatorial_spectrum(zoo.k4().graph)
        assert np.allclose(spec, [0.0, 4 / 3, 4 / 3, 4 / 3], atol=1e-12)

    def test_path2(self):
        g = CombinatorialGraph(2, ((0, 1),))
        assert np.allclose(combinatorial_spectrum(g), [0.0, 2.0])

    def test_single_loop_literal_formula(self):
        g = CombinatorialGraph(1, ((0, 0),))
        lap = combinatorial_laplacian(g)
        assert lap.shape == (1, 1)
        assert abs(lap[0, 0] - 0.75) < 1e-15

    def test_spectrum_range_and_zero(self):
        for g in (zoo.k4().graph, zoo.prism().graph, zoo.k33()):
            spec = combinatorial_spectrum(g)
            assert spec.min() > -1e-12 and spec.max() < 2 + 1e-12
            assert abs(spec[0]) < 1e-12

    def test_isolated_vertex_rejected(self):
        g = CombinatorialGraph(3, ((0, 1),))
        with pytest.raises(InputError):
            combinatorial_laplacian(g)


class TestGraphIsospectral:
    def test_identity(self):
        assert graph_isospectral(zoo.k4().graph, zoo.k4().graph)

    def test_k4_vs_star(self):
        assert not graph_isospectral(zoo.k4().graph, zoo.star(3).graph)

    def test_seidel_pair(self):
        from qgraph.isospec import SwitchingScheme, seidel_switch

        s = SwitchingScheme(zoo.hexagon(), zoo.hexagon(), zoo.SEIDEL_C6_PATTERN)
        G, Gt = seidel_switch(s)
        assert graph_isospectral(G, Gt)


class TestEquilateralCorrespondence:
    def test_identical_graphs(self):
        rep = equilateral_correspondence_check(zoo.k4().graph, zoo.k4().graph, 1.0, 10.0)
        assert rep.ok and rep.max_deviation < 1e-12

    def test_seidel_pair_small_window(self):
        from qgraph.isospec import SwitchingScheme, seidel_switch

        s = SwitchingScheme(zoo.hexagon(), zoo.hexagon(), zoo.SEIDEL_C6_PATTERN)
        G, Gt = seidel_switch(s)
        rep = equilateral_correspondence_check(G, Gt, 1.0, 8.0)
        assert rep.ok and rep.max_deviation < 1e-6

    def test_non_regular_rejected(self):
        with pytest.raises(InputError):
            equilateral_correspondence_check(zoo.star(3).graph, zoo.star(3).graph, 1.0, 5.0)

    def test_non_isospectral_refused(self):
        c6 = zoo.hexagon()
        twok3 = CombinatorialGraph(6, ((0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)))
        rep = equilateral_correspondence_check(c6, twok3, 1.0, 5.0)
        assert not rep.ok
        assert "differ" in rep.message


class TestGaugeInvariance:
    @pytest.mark.parametrize("builder,nv", [(zoo.theta, 2), (lambda: zoo.k4(), 4)])
    def test_random_potentials(self, builder, nv):
        g = builder()
        alpha = generic_one_form(g, 0)
        base = eigenvalues(g, alpha, 9.0).wavenumbers()[:12]
        rng = random.Random(1)
        for _ in range(3):
            psi = VertexPotential(tuple(rng.uniform(-1, 1) for _ in range(nv)))
            beta = add_exact_form(alpha, psi, g)
            other = eigenvalues(g, beta, 9.0).wavenumbers()[:12]
            assert max(abs(a - b) for a, b in zip(base, other)) < 1e-8

    def test_lattice_flux_periodicity(self):
        # the spectrum depends only on the coset of the form modulo forms
        # with integer cycle INTEGRALS (flux shifts in 2*pi*Z)
        g = zoo.theta(1.0, 1.2, 1.5)
        basis = spanning_tree_cycle_basis(g.graph)
        alpha = generic_one_form(g, 0)
        shift = harmonic_form_with_fluxes(
            g, basis, [2 * math.pi, -4 * math.pi]
        )
        beta = OneForm(tuple(a + s for a, s in zip(alpha.values, shift.values)))
        s1 = eigenvalues(g, alpha, 10.0).wavenumbers()
        s2 = eigenvalues(g, beta, 10.0).wavenumbers()
        assert len(s1) == len(s2)
        assert max(abs(a - b) for a, b in zip(s1, s2)) < 1e-8

    def test_spectrum_real_at_zero_form(self):
        s = eigenvalues(zoo.k4((1.0, 1.1, 1.2, 1.3, 1.4, 1.5)), None, 8.0)
        smin = BondScattering(zoo.k4((1.0, 1.1, 1.2, 1.3, 1.4, 1.5)), None).smin
        for k, _m in s.entries:
            if k > 0:
                assert smin(np.array([k]))[0] < 1e-7
