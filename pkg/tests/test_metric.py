"""Metric layer: surgeries, Hodge, inner products, Gram matrices, forms,
and tree reconstruction from leaf distances."""

import math
import random
from fractions import Fraction as F

import numpy as np
import pytest

from qgraph import zoo
from qgraph.errors import InputError
from qgraph.graphs import (
    CombinatorialGraph,
    OrientedCycle,
    int_det,
    spanning_tree_cycle_basis,
)
from qgraph.metric import (
    MetricGraph,
    OneForm,
    VertexPotential,
    add_exact_form,
    albanese_gram,
    basis_fluxes,
    cycle_flux,
    expand_homology_vector,
    flux,
    generic_one_form,
    gram_as_array,
    hodge_project,
    homology_inner_product,
    is_harmonic,
    jacobian_gram,
    leaf_distance_matrix,
    split_loops,
    suppress_degree_two,
    tree_from_leaf_distances,
)

# theta with the orientation used throughout: gamma1 = e0 then e1 reversed,
# gamma2 = e1 then e2 reversed (shared edge traversed oppositely)
GAMMA1 = OrientedCycle((0, 3))
GAMMA2 = OrientedCycle((2, 5))


class TestSurgeries:
    def test_path_merges(self):
        g = MetricGraph(
            CombinatorialGraph(4, ((0, 1), (1, 2), (0, 3), (2, 3), (0, 2))),
            (1.0, 2.0, 1.0, 1.0, 1.0),
        )
        out = suppress_degree_two(g)
        assert sorted(float(l) for l in out.lengths) == [1.0, 2.0, 3.0]
        assert all(d != 2 for d in out.graph.degrees())

    def test_bare_circle(self):
        g = MetricGraph(
            CombinatorialGraph(4, ((0, 1), (1, 2), (2, 3), (3, 0))),
            (0.25, 0.25, 0.25, 0.25),
        )
        out = suppress_degree_two(g)
        assert out.graph.edges == ((0, 0),)
        assert float(out.lengths[0]) == 1.0

    def test_identity_case(self):
        g = zoo.k4((1.0,) * 6)
        out = suppress_degree_two(g)
        assert out.graph.edges == g.graph.edges and out.lengths == g.lengths

    def test_split_figure8(self):
        out = split_loops(zoo.figure_eight(F(2), F(3)))
        assert sorted(out.lengths) == [F(1), F(1), F(3, 2), F(3, 2)]
        assert out.graph.vertex_count == 3

    def test_split_loopless_identity(self):
        g = zoo.theta()
        assert split_loops(g).graph.edges == g.graph.edges

    def test_split_dumbbell(self):
        out = split_loops(zoo.dumbbell(F(1), F(1), F(1, 2)))
        assert out.graph.edge_count == 5

    def test_suppress_preserves_invariants(self):
        # subdivide one theta edge, then suppress
        g = MetricGraph(
            CombinatorialGraph(3, ((0, 1), (0, 2), (2, 1), (0, 1))),
            (F(1), F(1, 2), F(1, 2), F(1)),
        )
        out = suppress_degree_two(g)
        assert out.total_length == g.total_length
        assert out.graph.betti_number() == g.graph.betti_number()
        gram = albanese_gram(out, spanning_tree_cycle_basis(out.graph))
        assert sorted(abs(x) for row in gram for x in row) == sorted(
            [F(2), F(1), F(1), F(2)]
        )


class TestHodge:
    def test_harmonic_fixed_point(self):
        g = zoo.theta()
        alpha = OneForm((2 / 3, -1 / 3, -1 / 3))
        assert is_harmonic(g, alpha)
        psi, proj = hodge_project(g, alpha)
        assert max(abs(x) for x in psi.values) < 1e-12
        assert np.allclose(proj.values, alpha.values)

    def test_exact_form_projects_to_zero(self):
        g = zoo.theta(1.0, 2.0, 0.5)
        phi = VertexPotential((0.0, 1.7))
        beta = add_exact_form(OneForm.zero(g), phi, g)
        _, proj = hodge_project(g, beta)
        assert max(abs(v) for v in proj.values) < 1e-12

    def test_theta_hand_oracle(self):
        # beta=(1,0,0) on theta(1,1,1): the vertex system is 2x2 and solves
        # by hand to psi(v1)=1/3; cycle integrals must be preserved
        g = zoo.theta()
        beta = OneForm((1.0, 0.0, 0.0))
        psi, proj = hodge_project(g, beta)
        assert abs(psi.values[1] - 1 / 3) < 1e-12
        for cyc in (GAMMA1, GAMMA2):
            assert abs(cycle_flux(beta, cyc, g) - cycle_flux(proj, cyc, g)) < 1e-12

    def test_idempotent(self):
        g = zoo.k4((1.0, 1.5, 2.0, 0.5, 1.0, 1.2))
        rng = random.Random(0)
        beta = OneForm(tuple(rng.uniform(-1, 1) for _ in range(6)))
        _, proj = hodge_project(g, beta)
        psi2, proj2 = hodge_project(g, proj)
        assert max(abs(x) for x in psi2.values) < 1e-10
        assert np.allclose(proj2.values, proj.values, atol=1e-12)


class TestInnerProducts:
    def test_cycle_with_itself(self):
        g = zoo.theta(F(1), F(2), F(3))
        basis = [GAMMA1, GAMMA2]
        gram = albanese_gram(g, basis)
        assert gram[0][0] == F(3)  # e0 + e1

    def test_disjoint_cycles(self):
        g = zoo.figure_eight(F(2), F(5))
        basis = spanning_tree_cycle_basis(g.graph)
        gram = albanese_gram(g, basis)
        assert gram[0][1] == 0

    def test_theta_shared_edge_opposite(self):
        g = zoo.theta(F(1), F(1), F(1))
        assert albanese_gram(g, [GAMMA1, GAMMA2]) == [[2, -1], [-1, 2]]

    def test_matches_overlap_difference(self):
        from qgraph.graphs import enumerate_simple_cycles, overlap
        from qgraph.metric import cycle_inner_product

        g = zoo.k4((F(1), F(2), F(3), F(4), F(5), F(6)))
        cycles = enumerate_simple_cycles(g.graph)
        for c1 in cycles[:4]:
            for c2 in cycles[:4]:
                pos, neg = overlap(c1, c2)
                expected = sum(g.lengths[e] for e in pos) - sum(
                    g.lengths[e] for e in neg
                )
                assert cycle_inner_product(g, c1, c2) == expected

    def test_homology_vector_expansion(self):
        g = zoo.theta(F(1), F(1), F(1))
        assert homology_inner_product((1, 0), (0, 1), g) == F(1)

    def test_rank_deficient_rejected(self):
        g = zoo.theta()
        with pytest.raises(InputError):
            albanese_gram(g, [GAMMA1, GAMMA1])


class TestGramMatrices:
    def test_figure8_diagonal(self):
        g = zoo.figure_eight(F(3), F(7))
        basis = spanning_tree_cycle_basis(g.graph)
        assert albanese_gram(g, basis) == [[3, 0], [0, 7]]
        J = jacobian_gram(g, basis)
        assert np.allclose(J, np.diag([1 / 3, 1 / 7]))

    def test_theta_jacobian(self):
        g = zoo.theta()
        J = jacobian_gram(g, [GAMMA1, GAMMA2])
        assert np.allclose(J, np.array([[2, 1], [1, 2]]) / 3.0, atol=1e-12)

    def test_duality(self):
        rng = random.Random(5)
        g = zoo.prism(tuple(rng.uniform(0.5, 2.0) for _ in range(9)))
        basis = spanning_tree_cycle_basis(g.graph)
        G = gram_as_array(albanese_gram(g, basis))
        J = jacobian_gram(g, basis)
        assert np.max(np.abs(J @ G - np.eye(len(basis)))) < 1e-10

    def test_k4_triangle_basis(self):
        g = zoo.k4((F(1),) * 6)
        from qgraph.graphs import enumerate_simple_cycles

        tris = [c for c in enumerate_simple_cycles(g.graph) if len(c.bonds) == 3][:3]
        gram = albanese_gram(g, tris)
        for i in range(3):
            assert gram[i][i] == 3
            for j in range(3):
                if i != j:
                    assert abs(gram[i][j]) == 1

    def test_congruence_under_unimodular_change(self):
        rng = random.Random(11)
        g = zoo.k4(tuple(F(rng.randint(1, 9)) for _ in range(6)))
        basis = spanning_tree_cycle_basis(g.graph)
        G = gram_as_array(albanese_gram(g, basis))
        n = len(basis)
        for _ in range(5):
            M = _random_unimodular(n, rng)
            # transformed basis vectors as chains
            chains = []
            for j in range(n):
                vec = tuple(M[i][j] for i in range(n))
                chains.append(expand_homology_vector(g, vec))
            from qgraph.metric import chain_inner_product

            G2 = np.array(
                [
                    [float(chain_inner_product(g, a, b)) for b in chains]
                    for a in chains
                ]
            )
            Mf = np.array(M, dtype=float)
            assert np.max(np.abs(G2 - Mf.T @ G @ Mf)) < 1e-9


def _random_unimodular(n, rng):
    M = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(6):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = rng.randint(-3, 3)
        for k in range(n):
            M[i][k] += c * M[j][k]
    assert abs(int_det(M)) == 1
    return M


class TestFlux:
    def test_zero_form(self):
        g = zoo.figure_eight(2.0, 3.0)
        assert flux(OneForm.zero(g), (1, 1), g) == 0.0

    def test_zero_class(self):
        g = zoo.figure_eight(2.0, 3.0)
        alpha = generic_one_form(g)
        assert flux(alpha, (0, 0), g) == 0.0

    def test_unit_flux_loop(self):
        ell = 2.0
        g = zoo.figure_eight(ell, 3.0)
        alpha = OneForm((1.0 / (2 * math.pi * ell), 0.0))
        assert abs(flux(alpha, (1, 0), g) - 1.0) < 1e-12

    def test_linearity(self):
        g = zoo.theta(1.0, 1.2, 1.5)
        alpha = generic_one_form(g, 3)
        f1 = flux(alpha, (2, -1), g)
        assert abs(f1 - 2 * flux(alpha, (1, 0), g) + flux(alpha, (0, 1), g)) < 1e-12


class TestGenericForm:
    def test_single_loop_value(self):
        g = zoo.circle(1.0)
        alpha = generic_one_form(g, 0)
        assert abs(basis_fluxes(g, alpha)[0] - 1.0 / (4 * math.pi)) < 1e-12

    def test_rational_independence_scan(self):
        g = zoo.theta(1.0, 1.2, 1.5)
        mu = basis_fluxes(g, generic_one_form(g, 0))
        assert abs((mu[0] / mu[1]) ** 2 - 2 / 3) < 1e-12 or abs(
            (mu[1] / mu[0]) ** 2 - 2 / 3
        ) < 1e-12
        for a in range(-20, 21):
            for b in range(-20, 21):
                if (a, b) != (0, 0):
                    assert abs(a * mu[0] + b * mu[1]) > 1e-9

    def test_scaling_linearity(self):
        g = zoo.figure_eight(1.0, math.sqrt(2))
        alpha = generic_one_form(g, 1)
        mu = basis_fluxes(g, alpha)
        mu3 = basis_fluxes(g, alpha.scaled(3.0))
        assert np.allclose(mu3, [3 * x for x in mu], rtol=1e-14)

    def test_tree_rejected(self):
        with pytest.raises(InputError):
            generic_one_form(zoo.star(3))

    def test_harmonicity(self):
        g = zoo.block_chain_example()
        assert is_harmonic(g, generic_one_form(g, 2))


class TestGaugeTransforms:
    def test_zero_potential(self):
        g = zoo.theta()
        alpha = generic_one_form(g)
        out = add_exact_form(alpha, VertexPotential((0.0, 0.0)), g)
        assert out.values == alpha.values

    def test_tree_all_forms_gauge_equivalent(self):
        g = zoo.path_graph(3, (1.0, 2.0, 1.5))
        beta = OneForm((0.4, -0.2, 0.9))
        psi, proj = hodge_project(g, beta)
        assert max(abs(v) for v in proj.values) < 1e-12  # H^1 trivial

    def test_fluxes_preserved(self):
        g = zoo.theta(1.0, 1.2, 1.5)
        alpha = generic_one_form(g, 0)
        rng = random.Random(9)
        psi = VertexPotential(tuple(rng.uniform(-2, 2) for _ in range(2)))
        beta = add_exact_form(alpha, psi, g)
        for p in ((1, 0), (0, 1), (2, 3)):
            assert abs(flux(alpha, p, g) - flux(beta, p, g)) < 1e-12


class TestLeafTrees:
    def test_two_leaves(self):
        t = tree_from_leaf_distances([[0, 5], [5, 0]])
        assert t.graph.graph.edge_count == 1
        assert float(t.graph.lengths[0]) == 5.0

    def test_three_leaf_star(self):
        t = tree_from_leaf_distances([[0, 3, 4], [3, 0, 5], [4, 5, 0]])
        lengths = sorted(float(l) for l in t.graph.lengths)
        assert lengths == [1.0, 2.0, 3.0]

    def test_random_binary_trees_roundtrip(self):
        rng = random.Random(4)
        for _ in range(10):
            tree, leaves = _random_metric_tree(rng, n_leaves=5)
            from qgraph.metric import MetricTree

            D = leaf_distance_matrix(MetricTree(tree, tuple(leaves)))
            rec = tree_from_leaf_distances(D)
            D2 = leaf_distance_matrix(rec)
            assert np.max(np.abs(np.array(D) - np.array(D2))) < 1e-9
            # same number of inner vertices for a binary shape
            assert rec.graph.graph.vertex_count == tree.graph.vertex_count

    def test_violating_quadruple_reported(self):
        # 4-cycle graph distances: triangle holds, four-point fails
        D = [
            [0, 1, 2, 1],
            [1, 0, 1, 2],
            [2, 1, 0, 1],
            [1, 2, 1, 0],
        ]
        with pytest.raises(InputError, match="quadruple"):
            tree_from_leaf_distances(D)


def _random_metric_tree(rng, n_leaves):
    """Random binary metric tree; leaves are vertices 0..n_leaves-1."""
    # build by repeatedly attaching leaves to random edges
    edges = {(0, 1): rng.uniform(1, 3)}
    next_vertex = 2
    inner = []
    for leaf in range(2, n_leaves):
        (a, b), l = rng.choice(list(edges.items()))
        mid = next_vertex + n_leaves - 2  # shift inner ids above leaf ids
        inner.append(mid)
        del edges[(a, b)]
        x = rng.uniform(0.2, 0.8) * l
        edges[(a, mid)] = x
        edges[(mid, b)] = l - x
        edges[(leaf, mid)] = rng.uniform(1, 3)
        next_vertex += 1
    relabel = {}
    for v in range(n_leaves):
        relabel[v] = v
    for (a, b) in edges:
        for v in (a, b):
            if v not in relabel:
                relabel[v] = len(relabel)
    e_list, l_list = [], []
    for (a, b), l in sorted(edges.items()):
        e_list.append((relabel[a], relabel[b]))
        l_list.append(l)
    g = MetricGraph(CombinatorialGraph(len(relabel), tuple(e_list)), tuple(l_list))
    return g, list(range(n_leaves))
