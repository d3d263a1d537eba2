from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import oracle_float_rank, oracle_sparse
from strategies import gain_graphs
from torusrig.errors import ConfigError, DomainError
from torusrig.gain_graph import Edge, Gain, GainGraph
from torusrig.linalg import MERSENNE_61, ModEchelon, integer_rank, is_prime, modular_rank
from torusrig.rigidity import (
    BarJointGraph,
    assemble_matrix,
    dependent_circuit,
    edge_row_independence,
    generic_rank,
    henneberg_edges,
    induce_bar_joint,
    motion_space_dim,
    sample_positions,
    translation_residuals,
)
from torusrig.sparsity import check_sparsity_bruteforce


def _p3(*gs):
    return GainGraph(("A",), tuple(Edge(k, "A", "A", Gain(*g)) for k, g in enumerate(gs)))


# ---- linear algebra helpers


def test_primality():
    assert is_prime(MERSENNE_61)
    assert is_prime(2) and is_prime(101)
    assert not is_prime(1) and not is_prime(MERSENNE_61 - 2) and not is_prime(561)


def test_integer_and_modular_rank_small():
    rows = [[1, 2, 3], [2, 4, 6], [0, 1, 1]]
    assert integer_rank(rows) == 2
    assert modular_rank([{0: 1, 1: 2, 2: 3}, {0: 2, 1: 4, 2: 6}, {1: 1, 2: 1}], 7) == 2
    # 3 and 5 are dependent mod 2 only through reduction: both become 1
    assert modular_rank([{0: 3}, {0: 5}], 2) == 1
    ech = ModEchelon(5)
    assert ech.add({0: 1, 1: 1}) and not ech.add({0: 2, 1: 2}) and ech.rank == 1


# ---- induced framework


def test_henneberg_body_counts():
    for n in range(3, 12):
        assert len(henneberg_edges(n)) == 3 * n - 6
        assert len(set(henneberg_edges(n))) == 3 * n - 6
    with pytest.raises(DomainError):
        henneberg_edges(2)


@pytest.mark.parametrize("n", [3, 4, 7, 10])
def test_body_is_isostatic(n):
    names = [f"v{k}" for k in range(n)]
    g = BarJointGraph(tuple(names), tuple(
        Edge(k, names[a], names[b], Gain(0, 0, 0)) for k, (a, b) in enumerate(henneberg_edges(n))))
    assert oracle_float_rank(g, seed=n) == 3 * n - 6


def test_nine_bar_induced_sizes(nine_bar):
    fw = induce_bar_joint(nine_bar)
    assert len(fw.vertices) == 18
    assert len(fw.graph.edges) == 51
    assert len(fw.body_edges) == 2 * (3 * 9 - 6)
    # bars between the two bodies use distinct vertices at both ends
    ends = [fw.attachments[e.id] for e in nine_bar.edges]
    assert len({a for a, _ in ends}) == 9 and len({b for _, b in ends}) == 9


def test_loop_ends_are_distinct_vertices():
    fw = induce_bar_joint(_p3((1, 0, 0), (0, 1, 0), (0, 0, 1)))
    assert len(fw.vertices) == 6
    for a, b in fw.attachments.values():
        assert a != b


def test_bar_joint_graph_rejects_loops_and_repeats():
    with pytest.raises(DomainError):
        BarJointGraph(("a",), (Edge(0, "a", "a", Gain(1, 0, 0)),))
    with pytest.raises(DomainError):
        BarJointGraph(("a", "b"), (Edge(0, "a", "b", Gain(1, 0, 0)), Edge(1, "b", "a", Gain(-1, 0, 0))))
    BarJointGraph(("a", "b"), (Edge(0, "a", "b", Gain(1, 0, 0)), Edge(1, "a", "b", Gain(0, 0, 0))))


@settings(max_examples=100, deadline=None)
@given(gain_graphs(max_bodies=4, max_edges=12))
def test_edge_count_correspondence(g):
    fw = induce_bar_joint(g)
    nv, ne = len(fw.vertices), len(fw.graph.edges)
    used = {b for e in g.edges for b in (e.tail, e.head)}
    if used == set(g.bodies) and all(g.degree(b) >= 3 for b in g.bodies):
        assert (len(g.edges) == 6 * len(g.bodies) - 3) == (ne == 3 * nv - 3)
    assert ne == len(g.edges) + sum(3 * max(3, g.degree(b)) - 6 for b in g.bodies)


# ---- matrix


def test_single_bar_row():
    g = BarJointGraph(("a", "b"), (Edge(0, "a", "b", Gain(1, 0, 2)),))
    pos = {"a": (5, 1, 1), "b": (2, 3, 4)}
    m = assemble_matrix(g, pos, modulus=None)
    # p_a - p_b - m = (5-2-1, 1-3-0, 1-4-2)
    assert m.dense() == [[2, -2, -5, -2, 2, 5]]
    m7 = assemble_matrix(g, pos, modulus=7)
    assert m7.dense() == [[2, 5, 2, 5, 2, 5]]
    assert m.column_labels() == ["v:a:x", "v:a:y", "v:a:z", "v:b:x", "v:b:y", "v:b:z"]


def test_missing_position_is_a_domain_error():
    g = BarJointGraph(("a", "b"), (Edge(0, "a", "b", Gain(1, 0, 0)),))
    with pytest.raises(DomainError):
        assemble_matrix(g, {"a": (0, 0, 0)})


def test_fraction_positions_are_exact():
    g = BarJointGraph(("a", "b"), (Edge(0, "a", "b", Gain(0, 0, 0)),))
    m = assemble_matrix(g, {"a": (Fraction(1, 2), 0, 0), "b": (0, 0, 0)}, modulus=None)
    assert m.dense()[0][0] == Fraction(1, 2)


@settings(max_examples=60, deadline=None)
@given(gain_graphs(max_bodies=3, max_edges=9), st.integers(0, 2**32))
def test_translations_in_kernel(g, seed):
    fw = induce_bar_joint(g)
    rng = random.Random(seed)
    for modulus in (MERSENNE_61, None):
        m = assemble_matrix(fw, sample_positions(fw.vertices, rng, modulus), modulus)
        assert all(x == 0 for col in translation_residuals(m) for x in col)


# ---- generic rank


def test_nine_bar_rank(nine_bar):
    v = generic_rank(induce_bar_joint(nine_bar), trials=3)
    assert (v.rank, v.rows, v.columns, v.dof, v.minimally_rigid) == (51, 51, 54, 0, True)


def test_collinear_gains_lose_one_rank(bad_gains):
    v = generic_rank(induce_bar_joint(bad_gains))
    assert v.rank == 50 and v.dof == 1 and not v.minimally_rigid


def test_three_loop_ranks():
    assert generic_rank(induce_bar_joint(_p3((1, 0, 0), (0, 1, 0), (0, 0, 1)))).rank == 15
    assert generic_rank(induce_bar_joint(_p3((1, 0, 0), (0, 1, 0), (1, 1, 0)))).rank == 15
    assert generic_rank(induce_bar_joint(_p3((1, 0, 0), (2, 0, 0), (3, 0, 0)))).rank == 14


def test_exact_mode_agrees(nine_bar, bad_gains):
    for g, r in ((nine_bar, 51), (bad_gains, 50)):
        v = generic_rank(induce_bar_joint(g), exact=True)
        assert v.rank == r and v.exact and v.prime is None


def test_seeded_runs_are_reproducible(nine_bar):
    fw = induce_bar_joint(nine_bar)
    assert generic_rank(fw, seed=9) == generic_rank(fw, seed=9)
    a = sample_positions(fw.vertices, random.Random(4))
    b = sample_positions(fw.vertices, random.Random(4))
    assert a == b


def test_early_stop_at_ceiling(nine_bar, bad_gains):
    assert generic_rank(induce_bar_joint(nine_bar), trials=5).trials_run == 1
    assert generic_rank(induce_bar_joint(bad_gains), trials=5).trials_run == 5


def test_oracle_configuration_errors(nine_bar):
    fw = induce_bar_joint(nine_bar)
    with pytest.raises(ConfigError):
        generic_rank(fw, prime=MERSENNE_61 - 2)
    with pytest.raises(ConfigError):
        generic_rank(fw, trials=0)


def test_motion_space(bad_gains):
    assert motion_space_dim(induce_bar_joint(bad_gains)) == 4


def test_small_prime_still_sound(nine_bar):
    # a small field can only lose rank
    assert generic_rank(induce_bar_joint(nine_bar), prime=101, trials=1).rank <= 51


@settings(max_examples=40, deadline=None)
@given(gain_graphs(max_bodies=3, max_edges=9, min_edges=1), st.integers(0, 1000))
def test_rank_matches_float_oracle(g, seed):
    fw = induce_bar_joint(g)
    assert generic_rank(fw, seed=seed).rank == oracle_float_rank(fw.graph, seed)


@settings(max_examples=80, deadline=None)
@given(gain_graphs(max_bodies=2, max_edges=9, min_edges=1))
def test_count_and_rank_agree(g):
    comb = check_sparsity_bruteforce(g)
    lin = generic_rank(induce_bar_joint(g))
    assert comb.sparse == (lin.rank == lin.rows)
    assert comb.sparse == oracle_sparse(g.edges)
    assert (comb.tight and comb.sparse) == lin.minimally_rigid


def test_independence_and_circuit(bad_gains, nine_bar):
    assert edge_row_independence(nine_bar, [e.id for e in nine_bar.edges])
    assert not edge_row_independence(bad_gains, list(range(9)))
    assert edge_row_independence(bad_gains, list(range(8)))
    circuit = dependent_circuit(bad_gains)
    assert circuit is not None
    for drop in circuit:
        assert edge_row_independence(bad_gains, [x for x in circuit if x != drop])
    assert dependent_circuit(nine_bar) is None
