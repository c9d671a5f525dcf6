from kurosh.crosscheck import (ball_comparison, fiber_crosscheck, fiber_summary, intersection_crosscheck,
                               membership_agreement, oracle_intersection, word_budget)
from kurosh.hgraph import analyse
from kurosh.verify import PairAnalysis

from conftest import words


def test_word_budget(z2z2, f2):
    assert word_budget(z2z2) == 8
    assert 1 <= word_budget(f2) <= 8


def test_membership_agreement(z2z3):
    gens = words(z2z3, "f1:1 f2:1", "f2:1 f1:1 f2:2")
    rep = membership_agreement(z2z3, gens, max_len=6)
    assert rep.ok and rep.accepted > 1


def test_oracle_intersection(f2):
    common = oracle_intersection(f2, words(f2, "x1"), words(f2, "x1 x1"), L=6)
    assert words(f2, "x1 x1")[0] in common and words(f2, "x1")[0] not in common


def test_ball_comparison_statuses(z2z2, mixed_amalgam):
    gens = words(z2z2, "f1:1 f2:1")
    assert ball_comparison(z2z2, gens, analyse(z2z2, gens).folded, 3, 6)["status"] == "agree"
    g = words(mixed_amalgam, "x1")
    out = ball_comparison(mixed_amalgam, g, analyse(mixed_amalgam, g).folded, 2, 4)
    assert out["status"] == "not-compared"


def test_fiber_and_intersection_crosschecks(z4z4):
    from kurosh.ambient import invert, parse_word, product
    u = parse_word(z4z4, "f1:1 f2:1")
    k = product(z4z4, invert(z4z4, u), parse_word(z4z4, "a:1"))
    pa = PairAnalysis(z4z4, [u], [k])
    summ = fiber_summary(fiber_crosscheck(z4z4, [u], [k], pa.pb, L=6))
    assert summ["contradictions"] == 0 and summ["count_mismatch"] == 0
    assert intersection_crosscheck(z4z4, [u], [k], pa.inter, 6)["status"] == "agree"
