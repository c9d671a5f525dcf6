import random

from hypothesis import given, settings, strategies as st

from kurosh.ambient import all_words, amalgamated, invert, plain, parse_word, product, random_word
from kurosh.finite import central_embedding, cyclic
from kurosh.graphs import graphs_isomorphic
from kurosh.hgraph import analyse, build_from_generators
from kurosh.oracle import bfs_subgroup
from kurosh.pullback import basepoint_component, fiber_report, intersection_core, other_components, pullback, to_dot
from kurosh.verify import PairAnalysis

from conftest import words


def _inter(spec, h, k):
    return PairAnalysis(spec, words(spec, *h), words(spec, *k))


def test_equal_subgroups_give_same_graph(f2):
    g = build_from_generators(f2, words(f2, "x1"))
    pb = pullback(g, g)
    assert graphs_isomorphic(basepoint_component(pb).to_graph(), g.to_graph())[0]


def test_free_group_examples(f2):
    pa = _inter(f2, ["x1"], ["x1 x1"])
    assert pa.inter.generators == words(f2, "x1 x1")
    pa = _inter(f2, ["x1", "x2 x2"], ["x2"])
    assert pa.inter.generators == words(f2, "x2 x2")
    ball = set(bfs_subgroup(f2, words(f2, "x1", "x2 x2"), 6).elements) & set(
        bfs_subgroup(f2, words(f2, "x2"), 6).elements)
    assert ball == set(bfs_subgroup(f2, pa.inter.generators, 6).elements)


def test_circle_intersection(z2z2):
    pa = _inter(z2z2, ["f1:1 f2:1"], ["f1:1 f2:1 f1:1 f2:1"])
    assert pa.I.report.kurosh_rank == 1
    assert analyse(z2z2, pa.inter.generators).folded.accepts(words(z2z2, "f1:1 f2:1 f1:1 f2:1")[0])
    assert not pa.I.folded.accepts(words(z2z2, "f1:1 f2:1")[0])


def test_elliptic_intersection_is_trivial(z2z3):
    pa = _inter(z2z3, ["f1:1"], ["f2:1"])
    assert pa.I.elliptic and pa.I.report.trivial
    assert pa.inter.generators == []
    ball = set(bfs_subgroup(z2z3, words(z2z3, "f1:1"), 8).elements) & set(
        bfs_subgroup(z2z3, words(z2z3, "f2:1"), 8).elements)
    assert ball == {()}


def test_equal_core_regenerates(z2z3):
    gens = words(z2z3, "f1:1 f2:1", "f2:1 f1:1 f2:1")
    pa = PairAnalysis(z2z3, gens, gens)
    assert graphs_isomorphic(pa.I.core.graph.to_graph(), pa.H.core.graph.to_graph())[0]
    again = analyse(z2z3, pa.inter.generators)
    assert graphs_isomorphic(again.folded.to_graph(), pa.H.folded.to_graph())[0]


def test_plain_fibers_are_single(z2z3):
    rng = random.Random(5)
    for _ in range(20):
        h = [random_word(z2z3, 5, rng=rng) for _ in range(2)]
        k = [random_word(z2z3, 5, rng=rng), product(z2z3, h[0], h[1])]
        pa = PairAnalysis(z2z3, h, k)
        assert pa.N == 1
        assert all(n <= 1 for n in pa.fib.edge_fibers.values())


def test_amalgam_fiber_two(z4z4):
    u = parse_word(z4z4, "f1:1 f2:1")
    k = product(z4z4, invert(z4z4, u), parse_word(z4z4, "a:1"))
    pa = PairAnalysis(z4z4, [u], [k])
    assert pa.H.report.edge_free and pa.K.report.edge_free
    assert pa.fib.A_cap_HK == 2
    assert max(pa.fib.edge_fibers.values()) == 2 == pa.N


def test_whole_group_single_fibers(z4z4):
    gens = words(z4z4, "f1:1", "f2:1")
    pa = PairAnalysis(z4z4, gens, gens)
    assert set(pa.fib.edge_fibers.values()) == {1}
    assert pa.fib.A_cap_HK == 2


def test_projections_are_graph_maps(mixed_amalgam):
    rng = random.Random(9)
    for _ in range(10):
        h = [random_word(mixed_amalgam, 4, rng=rng) for _ in range(2)]
        k = [product(mixed_amalgam, h[0], h[0]), random_word(mixed_amalgam, 3, rng=rng)]
        pa = PairAnalysis(mixed_amalgam, h, k)
        pb = pa.pb
        for (kind, e), (eh, ek) in pb.edge_proj.items():
            if kind == "f":
                b, v, _ = pb.graph.fedge[e]
                assert pb.left.fedge[eh][:2] == [pb.base_key[b][0], pb.factor_key[v][0]]
                assert pb.right.fedge[ek][:2] == [pb.base_key[b][1], pb.factor_key[v][1]]
            else:
                b, j, _, b2, _ = pb.graph.xedge[e]
                assert pb.left.xedge[eh][0] == pb.base_key[b][0]
                assert pb.left.xedge[eh][3] == pb.base_key[b2][0]
                assert pb.left.xedge[eh][1] == j == pb.right.xedge[ek][1]


def test_other_components_and_dot(z2z2):
    pa = _inter(z2z2, ["f1:1 f2:1"], ["f2:1 f1:1"])
    full = pullback(pa.H.folded, pa.K.folded, components="all")
    assert isinstance(other_components(full), list)
    txt = to_dot(pa.pb)
    assert "fiber=1" in txt and "N_eff=1" in txt


A2 = cyclic(2)
_SPECS = [plain([cyclic(2), cyclic(3)], 1),
          amalgamated([cyclic(4), cyclic(4)], A2, [central_embedding(A2, cyclic(4))] * 2, 1)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_intersection_membership(seed):
    rng = random.Random(seed)
    spec = rng.choice(_SPECS)
    h = [random_word(spec, 3, rng=rng) for _ in range(2)]
    k = [random_word(spec, 3, rng=rng), product(spec, h[0], h[-1])]
    pa = PairAnalysis(spec, h, k)
    for w in all_words(spec, 3):
        assert pa.I.folded.accepts(w) == (pa.H.folded.accepts(w) and pa.K.folded.accepts(w))
