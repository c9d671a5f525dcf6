import pytest

from kurosh.ambient import invert, parse_word, product
from kurosh.graphs import build_psi, graphs_isomorphic
from kurosh.hgraph import analyse, quotient_ball
from kurosh.oracle import (NO_AT_BUDGET, UNVERIFIED, YES, FiberCount, OracleError, bfs_subgroup,
                           compare_fiber, oracle_fiber_count, oracle_member, tree_ball, tree_ball_quotient)
from kurosh.crosscheck import _labelled_by_order

from conftest import words


def test_bfs_examples(f2, z2z3, z2z2):
    b = bfs_subgroup(f2, words(f2, "x1"), 3)
    assert b.elements == set(words(f2, "1", "x1", "X1", "x1 x1", "X1 X1", "x1 x1 x1", "X1 X1 X1"))
    assert bfs_subgroup(z2z3, words(z2z3, "f1:1"), 2).elements == set(words(z2z3, "1", "f1:1"))
    ac = words(z2z2, "f1:1 f2:1")[0]
    c = bfs_subgroup(z2z2, [ac], 4).elements
    assert c == {(), ac, invert(z2z2, ac), product(z2z2, ac, ac), invert(z2z2, product(z2z2, ac, ac))}


def test_bfs_monotone_and_budget(z2z3):
    gens = words(z2z3, "f1:1 f2:1", "f2:2 f1:1 f2:1")
    small, large = bfs_subgroup(z2z3, gens, 4), bfs_subgroup(z2z3, gens, 6)
    assert small.elements <= large.elements
    with pytest.raises(OracleError):
        bfs_subgroup(z2z3, gens, 99)
    capped = bfs_subgroup(z2z3, gens, 8, cap=10)
    assert capped.truncated and len(capped) == 10


def test_member_examples(f2, z2z2):
    assert oracle_member(f2, words(f2, "x1"), words(f2, "x1 x1")[0], 4) == YES
    assert oracle_member(f2, words(f2, "x1"), words(f2, "x2")[0], 8) == NO_AT_BUDGET
    assert oracle_member(z2z2, words(z2z2, "f1:1 f2:1"), words(z2z2, "f1:1")[0], 8) == NO_AT_BUDGET


def test_meet_in_the_middle_reaches_further(f2):
    gens = words(f2, "x1 x2 x1")
    far = product(f2, gens[0], gens[0], gens[0])      # length 9
    assert oracle_member(f2, gens, far, 6) == NO_AT_BUDGET
    assert oracle_member(f2, gens, far, 6, meet_in_middle=True) == YES


def test_tree_ball_quotient_whole_group(z2z3):
    q = tree_ball_quotient(z2z3, words(z2z3, "f1:1", "f2:1"), 2, 6)
    assert q.graph.n_vertices == 3 and q.graph.n_edges == 2
    assert graphs_isomorphic(q.graph, build_psi(z2z3).graph)[0]


def test_tree_ball_quotient_circle(z2z2):
    gens = words(z2z2, "f1:1 f2:1")
    q = tree_ball_quotient(z2z2, gens, 3, 6)
    d = analyse(z2z2, gens)
    assert graphs_isomorphic(q.graph, _labelled_by_order(d.core.graph))[0]
    assert graphs_isomorphic(q.graph, quotient_ball(d.folded, 3))[0]


def test_trivial_subgroup_ball(z2z3):
    tb = tree_ball(z2z3, 2)
    q = tree_ball_quotient(z2z3, [], 2, 4)
    assert q.graph.n_vertices == len(tb.vertices)
    assert q.graph.n_edges == len(tb.edges)


def test_fiber_counts(z2z3, z4z4):
    # plain edge cell: G_x trivial, identity always in HK
    f = oracle_fiber_count(z2z3, words(z2z3, "f1:1"), words(z2z3, "f2:1"), (), 4)
    assert f.count() == 1
    u = parse_word(z4z4, "f1:1 f2:1")
    k = product(z4z4, invert(z4z4, u), parse_word(z4z4, "a:1"))
    f = oracle_fiber_count(z4z4, [u], [k], (), 6)
    assert f.h == f.k == frozenset({0}) and f.hk == frozenset({0, 1}) and f.count() == 2
    whole = words(z4z4, "f1:1", "f2:1")
    assert oracle_fiber_count(z4z4, whole, whole, (), 4).count() == 1


def test_compare_fiber_statuses(z4z4):
    A = z4z4.A
    found = FiberCount(frozenset({0}), frozenset({0}), frozenset({0}), 4, False, A)
    assert compare_fiber(found, {0}, {0}, {0}) == "verified"
    assert compare_fiber(found, {0, 1}, {0}, {0}) == UNVERIFIED
    assert compare_fiber(found, set(), {0}, {0}) == "contradiction"
