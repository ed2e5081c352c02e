# MIS Solver Test Module
# ======================
# The exact solver against brute force, decision mode, the enumerations and
# the EKR values on the small graphs of both families.

import pytest

from lab.graph_oracle import DenseGraph, VertexSet
from lab.mis_solver import MisSolver, brute_force_independence_number
from utils.data_utils import random_graph
from utils.errors import BudgetExceededError, PreconditionError


def _cycle(V):
    return DenseGraph.from_edges(V, [(v, (v + 1) % V) for v in range(V)])


def _is_maximal(graph, S):
    outside = [v for v in range(graph.V) if v not in S]
    return all(graph.neighbours_in(v, S.bits) > 0 for v in outside)


# Small Graphs
# ============

def test_independence_number_of_simple_graphs():
    assert MisSolver(DenseGraph.empty(5)).independence_number() == 5
    assert MisSolver(_cycle(5)).independence_number() == 2
    assert MisSolver(_cycle(8)).independence_number() == 4
    complete = DenseGraph.from_edges(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
    assert MisSolver(complete).independence_number() == 1


def test_witness_is_independent_and_reported_in_original_ranks():
    graph = _cycle(7)
    size, witness = MisSolver(graph, verify=True).max_independent_set()
    assert size == 3 == witness.size
    assert graph.is_independent(witness.bits)
    assert witness.universe == 7


def test_solver_matches_brute_force_on_random_graphs(fake):
    for _ in range(40):
        V = fake.random_int(min=1, max=22)
        density = fake.random.uniform(0.1, 0.9)
        graph = random_graph(fake, V, density)
        solver = MisSolver(graph, verify=True)
        size, witness = solver.max_independent_set()
        assert size == brute_force_independence_number(graph)
        assert graph.is_independent(witness.bits)


def test_brute_force_budget():
    with pytest.raises(BudgetExceededError):
        brute_force_independence_number(DenseGraph.empty(31))


def test_solver_budget():
    with pytest.raises(BudgetExceededError) as error:
        MisSolver(DenseGraph.empty(10), budget=5)
    assert error.value.budget == "EKR_MIS_BUDGET"


def test_lower_hint_above_alpha_is_rejected():
    with pytest.raises(PreconditionError):
        MisSolver(_cycle(6)).max_independent_set(lower_hint=4)


def test_decision_mode_stops_at_target():
    """stop_at returns a set of at least the target size without proving optimality."""
    graph = DenseGraph.empty(12)
    size, witness = MisSolver(graph).max_independent_set(stop_at=3)
    assert size >= 3
    assert graph.is_independent(witness.bits)
    size, _ = MisSolver(_cycle(9)).max_independent_set(stop_at=5)
    assert size == 4


# Enumeration
# ===========

def test_enumerate_maximum_independent_sets_of_cycle():
    sets = MisSolver(_cycle(6), verify=True).enumerate_maximum_independent_sets()
    assert [s.ranks() for s in sets] == [(0, 2, 4), (1, 3, 5)]


def test_maximal_independent_sets_of_path():
    path = DenseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    sets = MisSolver(path).maximal_independent_sets()
    assert [s.ranks() for s in sets] == [(0, 2), (0, 3), (1, 3)]
    assert [s.ranks() for s in MisSolver(path).maximal_independent_sets(min_size=3)] == []


def test_maximal_sets_are_maximal_and_complete(fake):
    for _ in range(10):
        graph = random_graph(fake, 12, 0.35)
        sets = MisSolver(graph).maximal_independent_sets()
        assert len({s.bits for s in sets}) == len(sets)
        for s in sets:
            assert graph.is_independent(s.bits)
            assert _is_maximal(graph, s)
        alpha = brute_force_independence_number(graph)
        assert max(s.size for s in sets) == alpha


def test_maximal_sets_containing_a_vertex(fake):
    graph = random_graph(fake, 14, 0.3)
    solver = MisSolver(graph)
    everything = solver.maximal_independent_sets()
    for v in (0, 5, 13):
        through = {s.bits for s in solver.maximal_independent_sets_containing(v)}
        assert through == {s.bits for s in everything if v in s}


def test_enumerate_independent_sets_at_least():
    path = DenseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    sets = MisSolver(path).enumerate_independent_sets_at_least(1)
    # every independent set except the empty one
    assert sorted(s.ranks() for s in sets) == [(0,), (0, 2), (0, 3), (1,), (1, 3), (2,), (3,)]
    assert MisSolver(path).enumerate_independent_sets_at_least(3) == []
    with pytest.raises(PreconditionError):
        MisSolver(DenseGraph.empty(8)).enumerate_independent_sets_at_least(2)


def test_enumeration_budgets():
    with pytest.raises(BudgetExceededError):
        MisSolver(_cycle(10), enumeration_budget=5).maximal_independent_sets()
    with pytest.raises(BudgetExceededError) as error:
        MisSolver(DenseGraph.empty(6), enumeration_cap=3).enumerate_independent_sets_at_least(5)
    assert error.value.budget == "EKR_ENUMERATION_CAP"


# EKR Values
# ==========

def test_ekr_on_small_permutation_graphs(gamma3, gamma4):
    """alpha(Gamma_n) = (n-1)! and the maximum sets are exactly the n^2 stars."""
    for oracle in (gamma3, gamma4):
        solver = MisSolver(oracle.dense_graph(), verify=True)
        assert solver.independence_number() == oracle.params.N
        maximum = solver.enumerate_maximum_independent_sets()
        assert len(maximum) == oracle.params.K
        stars = {oracle.star_set(c).bits for c in oracle.star_centers}
        assert {s.bits for s in maximum} == stars


def test_ekr_on_small_matching_graphs(matching3, matching4):
    for oracle in (matching3, matching4):
        solver = MisSolver(oracle.dense_graph(), verify=True)
        maximum = solver.enumerate_maximum_independent_sets()
        assert solver.independence_number() == oracle.params.N
        assert len(maximum) == oracle.params.K
        assert all(oracle.contained_star(s) is not None for s in maximum)


@pytest.mark.slow
def test_ekr_on_gamma5(gamma5):
    solver = MisSolver(gamma5.dense_graph(), verify=True)
    size, witness = solver.max_independent_set(lower_hint=gamma5.params.N)
    assert size == 24
    assert gamma5.contained_star(witness) is not None
    assert len(solver.enumerate_maximum_independent_sets()) == 25


def test_star_survives_in_spanning_subgraph(gamma4):
    """Removing edges never lowers alpha below N, and a star stays independent."""
    graph = gamma4.dense_graph()
    u, v = next(graph.edges())
    solver = MisSolver(graph.without_edge(u, v))
    assert solver.independence_number() >= gamma4.params.N
    star = VertexSet(gamma4.star_bits[0], gamma4.V)
    assert graph.without_edge(u, v).is_independent(star.bits)
