import math
import random
from fractions import Fraction

import numpy as np
import pytest
import sympy

from crnkit import (
    ComplexGraph,
    CountVector,
    DimensionMismatch,
    complex_balance_report,
    conserved_quantities,
    deficiency,
    is_complex_balanced,
    is_weakly_reversible,
    linkage_classes,
    rate_vector_field,
    stoichiometric_rank,
    structure_report,
    strongly_connected_components,
)
from crnkit import Network

from support import balanced_reversible_network, random_network


def isolated_graph(n):
    return ComplexGraph(tuple(CountVector((i,)) for i in range(n)), ())


class TestLinkageClasses:
    def test_diatomic_single_class(self, net_diatomic):
        assert linkage_classes(net_diatomic.complex_graph()) == ((0, 1),)

    def test_catalyst_two_classes(self, net_diatomic, net_catalyst):
        graph = net_catalyst.complex_graph()
        classes = linkage_classes(graph)
        assert len(classes) == 2
        # traced by hand: {empty, A, B} and {A+C, AC, 2B+C}
        named = [
            {tuple(graph.vertices[i]) for i in cls} for cls in classes
        ]
        assert {(0, 0, 0, 0), (1, 0, 0, 0), (0, 1, 0, 0)} in named
        assert {(1, 0, 1, 0), (0, 0, 0, 1), (0, 2, 1, 0)} in named

    def test_isolated_vertices(self):
        assert linkage_classes(isolated_graph(3)) == ((0,), (1,), (2,))

    def test_ordered_by_smallest_member(self):
        rng = random.Random(3)
        for _ in range(20):
            classes = linkage_classes(random_network(rng).complex_graph())
            mins = [c[0] for c in classes]
            assert mins == sorted(mins)


class TestWeakReversibility:
    def test_diatomic_true(self, net_diatomic):
        assert is_weakly_reversible(net_diatomic.complex_graph())

    def test_catalyst_false(self, net_catalyst):
        assert not is_weakly_reversible(net_catalyst.complex_graph())

    def test_empty_graph_vacuous(self):
        assert is_weakly_reversible(ComplexGraph((), ()))

    def test_matches_scc_cover(self):
        rng = random.Random(17)
        for _ in range(30):
            graph = random_network(rng).complex_graph()
            sccs = strongly_connected_components(graph)
            expected = len(sccs) == len(linkage_classes(graph))
            assert is_weakly_reversible(graph) == expected


class TestDeficiency:
    def test_diatomic(self, net_diatomic):
        rep = structure_report(net_diatomic)
        assert (rep.num_complexes, len(rep.linkage_classes), rep.stoich_rank) == (2, 1, 1)
        assert rep.deficiency == 0

    def test_catalyst(self, net_catalyst):
        rep = structure_report(net_catalyst)
        assert (rep.num_complexes, len(rep.linkage_classes), rep.stoich_rank) == (6, 2, 3)
        assert rep.deficiency == 1

    def test_empty_network(self):
        assert deficiency(Network(("A",))) == 0

    def test_nonnegative_on_random_networks(self):
        rng = random.Random(41)
        for _ in range(40):
            assert deficiency(random_network(rng)) >= 0

    def test_rank_matches_sympy(self):
        rng = random.Random(43)
        for _ in range(25):
            net = random_network(rng)
            gamma = sympy.Matrix(net.stoichiometric_matrix().tolist())
            assert stoichiometric_rank(net) == gamma.rank()


class TestConservedQuantities:
    def test_diatomic_total_atoms(self, net_diatomic):
        assert conserved_quantities(net_diatomic) == ((2, 1),)

    def test_catalyst_catalyst_count(self, net_catalyst):
        # solved w . Gamma = 0 by hand over the four columns
        assert conserved_quantities(net_catalyst) == ((0, 0, 1, 1),)

    def test_bd_empty_basis(self, net_bd):
        assert conserved_quantities(net_bd) == ()

    def test_exact_orthogonality_and_canonical_form(self):
        rng = random.Random(47)
        for _ in range(40):
            net = random_network(rng)
            basis = conserved_quantities(net)
            for w in basis:
                for tr in net.transitions:
                    assert sum(wi * d for wi, d in zip(w, tr.net_change())) == 0
                nonzero = [v for v in w if v != 0]
                assert nonzero and nonzero[0] > 0
                assert math.gcd(*(abs(v) for v in w)) == 1

    def test_basis_size_and_span_match_sympy(self):
        rng = random.Random(53)
        for _ in range(25):
            net = random_network(rng, allow_empty=False)
            basis = conserved_quantities(net)
            gamma_t = sympy.Matrix(net.stoichiometric_matrix().T.tolist())
            null = gamma_t.nullspace()
            assert len(basis) == len(null)
            assert len(basis) == net.num_species - stoichiometric_rank(net)
            if basis:
                ours = sympy.Matrix([list(w) for w in basis])
                theirs = sympy.Matrix([[v for v in vec] for vec in null]).reshape(
                    len(null), net.num_species
                )
                stacked = ours.col_join(theirs)
                assert stacked.rank() == len(basis)

    def test_transition_free_network_conserves_everything(self):
        net = Network(("A", "B"))
        assert conserved_quantities(net) == ((0, 1), (1, 0))


class TestComplexBalance:
    def test_diatomic_balanced_state(self, net_diatomic):
        report = complex_balance_report(net_diatomic, [0.5, 1.0], tol=1e-9)
        assert report.balanced
        by_complex = {tuple(r.complex): r for r in report.rows}
        assert by_complex[(1, 0)].consumption == pytest.approx(1.0)
        assert by_complex[(1, 0)].production == pytest.approx(1.0)

    def test_bd_balanced(self, net_bd):
        report = complex_balance_report(net_bd, [3.0])
        assert report.balanced
        by_complex = {tuple(r.complex): r for r in report.rows}
        assert by_complex[(1,)].production == pytest.approx(3.0)
        assert by_complex[(1,)].consumption == pytest.approx(3.0)

    def test_diatomic_unbalanced_residual(self, net_diatomic):
        report = complex_balance_report(net_diatomic, [1.0, 1.0])
        assert not report.balanced
        by_complex = {tuple(r.complex): r for r in report.rows}
        # consumption alpha*c1 = 2 minus production beta*c2^2 = 1
        assert by_complex[(1, 0)].residual == pytest.approx(1.0)
        assert abs(by_complex[(1, 0)].residual) == pytest.approx(1.0)

    def test_zero_state_allowed(self, net_bd):
        report = complex_balance_report(net_bd, [0.0])
        assert not report.balanced  # source still produces A

    def test_dimension_check(self, net_bd):
        with pytest.raises(DimensionMismatch):
            complex_balance_report(net_bd, [1.0, 2.0])

    def test_balance_implies_rate_equilibrium(self):
        # engineered balanced instances keep the implication non-vacuous
        rng = random.Random(61)
        hits = 0
        for _ in range(60):
            net, c = balanced_reversible_network(rng)
            report = complex_balance_report(net, c, tol=1e-9)
            if report.max_abs_residual <= 1e-12:
                hits += 1
                assert np.abs(rate_vector_field(net, c)).max() <= 1e-9
        assert hits >= 50

    def test_report_json_keys(self, net_diatomic):
        doc = complex_balance_report(net_diatomic, [0.5, 1.0]).to_json_dict(
            net_diatomic.species
        )
        assert set(doc) == {"complex_balanced", "tol", "scale", "complexes"}
        assert all(
            set(row) == {"complex", "production", "consumption", "residual"}
            for row in doc["complexes"]
        )


class TestStructureReportJson:
    def test_keys_and_values(self, net_diatomic):
        doc = structure_report(net_diatomic).to_json_dict()
        assert doc == {
            "num_complexes": 2,
            "linkage_classes": [[0, 1]],
            "weakly_reversible": True,
            "stoich_rank": 1,
            "deficiency": 0,
            "conserved_basis": [[2, 1]],
        }
