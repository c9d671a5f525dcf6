import json
import random
from fractions import Fraction

from kurosh.ambient import amalgamated, parse_word, plain, random_word
from kurosh.finite import central_embedding, cyclic, symmetric
from kurosh.verify import (FINITE_INDEX_REASON, PairAnalysis, all_checks, check_corollaries, check_ivanov,
                           check_lemma2, check_local_degree_inequality, check_thm1_part1, check_thm1_part2,
                           check_thm2, check_thm3, check_trivial_elliptic, quotient_spec, theta_amalgam,
                           theta_plain, verify_pair)

from conftest import words


def pair(spec, h, k):
    return PairAnalysis(spec, words(spec, *h), words(spec, *k))


def by_name(checks):
    return {c.name: c for c in checks}


def test_theta_values(z2z3, z4z4, mixed_amalgam):
    assert theta_plain(z2z3) == 3
    assert theta_plain(plain([], 2)) == 1
    assert theta_plain(plain([cyclic(2), cyclic(4)])) == 2
    assert theta_amalgam(z4z4) == 1            # Z/4 / Z/2 = Z/2
    assert theta_amalgam(mixed_amalgam) == 3   # Z/6 / Z/2 = Z/3
    for spec in (z2z3, z4z4, mixed_amalgam):
        th = theta_amalgam(spec) if spec.A.order > 1 else theta_plain(spec)
        assert 1 <= th <= 3


def test_thm1_part1_plain_coefficient():
    spec = plain([cyclic(3)], 1)       # base vertex of valence three
    pa = pair(spec, ["f1:1", "x1"], ["f1:1", "x1"])
    c = check_thm1_part1(pa)
    assert c.applicable and c.detail["coefficient"] == 6
    assert (c.lhs, c.rhs, c.ok) == (1, 6, True)


def test_thm1_part1_skips_degenerate_valence_two(z2z2):
    c = check_thm1_part1(pair(z2z2, ["f1:1 f2:1"], ["f1:1 f2:1"]))
    assert not c.applicable and "valence two" in c.reason


def test_thm1_part2_examples(f2, z2z3):
    parts = check_thm1_part2(pair(f2, ["x1", "x2 x2"], ["x2"]))
    assert [(c.lhs, c.rhs) for c in parts] == [(0, 0), (0, 0)]
    assert all(c.ok for c in parts)
    whole = check_thm1_part2(pair(z2z3, ["f1:1", "f2:1"], ["f1:1", "f2:1"]))
    assert (whole[0].lhs, whole[0].rhs) == (1, 6)


def test_thm2_coefficient_with_central_z2(z4z4):
    u = parse_word(z4z4, "f1:1 f2:1")
    pa = PairAnalysis(z4z4, [u], [u, parse_word(z4z4, "f2:1 f1:1 f2:1 f1:1")])
    c, cA = check_thm2(pa)
    assert c.applicable and c.detail["theta"] == 1 and c.ok and cA.ok


def test_thm2_needs_edge_free(z4z4):
    c, _ = check_thm2(pair(z4z4, ["f1:1", "f2:1"], ["f1:1", "f2:1"]))
    assert not c.applicable


def test_thm3_whole_group(z4z4):
    c, cA, red = check_thm3(pair(z4z4, ["f1:1", "f2:1"], ["f1:1", "f2:1"]))
    assert c.detail["A_cap_HK"] == 2
    assert (c.lhs, c.rhs) == (1, 4) and c.ok
    assert cA.rhs == 4 and red.ok


def test_thm3_skips_free_part(mixed_amalgam):
    c = check_thm3(pair(mixed_amalgam, ["x1"], ["x1"]))[0]
    assert not c.applicable


def test_quotient_reduction(z4z4):
    qs, push = quotient_spec(z4z4)
    assert [G.order for G in qs.factors] == [2, 2]
    assert push(parse_word(z4z4, "a:1 f1:1 f2:1")) == (("f", 0, 1), ("f", 1, 1))


def test_ivanov_and_zakharov(z2z3):
    pa = pair(z2z3, ["f1:1 f2:1 f1:1 f2:1", "f1:1 f2:2 f1:1 f2:2"], ["f1:1 f2:1 f1:1 f2:1"])
    assert pa.H.folded.is_free_subgroup() and pa.H.report.C_bar == 1
    iv = check_ivanov(pa)
    zk, fi = check_corollaries(pa)
    assert iv.applicable and iv.detail["theta"] == 3 and iv.ok
    assert zk.applicable and zk.detail["coefficient"] == 6 and zk.ok
    assert not fi.applicable and fi.reason == FINITE_INDEX_REASON
    zk2, _ = check_corollaries(pair(z2z3, ["f1:1", "f2:1 f1:1"], ["f2:1 f1:1"]))
    assert not zk2.applicable


def test_elliptic_intersection_excluded(z2z3):
    pa = pair(z2z3, ["f1:1"], ["f2:1"])
    named = by_name(all_checks(pa))
    assert not named["thm1_part2"].applicable
    assert named["elliptic_trivial"].applicable and named["elliptic_trivial"].ok
    assert not check_trivial_elliptic(pair(z2z3, ["f1:1 f2:1"], ["f1:1 f2:1"])).applicable


def test_local_inequalities_equal_subgroups(z2z3):
    pa = pair(z2z3, ["f1:1", "f2:1"], ["f1:1", "f2:1"])
    for c in check_local_degree_inequality(pa):
        assert c.ok or not c.applicable, c.as_dict()
    star, emb = check_lemma2(pa)
    assert star.ok and star.lhs == star.rhs
    assert emb.ok


def test_record_schema_and_serialization(mixed_amalgam):
    rng = random.Random(1)
    h = [random_word(mixed_amalgam, 4, rng=rng) for _ in range(2)]
    rec = verify_pair(mixed_amalgam, h, h[:1], "x")
    d = json.loads(json.dumps(rec.as_dict()))
    assert set(d) == {"instance_id", "spec", "gens_H", "gens_K", "intersection_gens", "elliptic",
                      "hypotheses", "measured", "checks", "oracle"}
    for key in ("N_eff", "M_H", "M_K", "theta", "A_cap_HK", "H", "K", "HK"):
        assert key in d["measured"]
    for c in d["checks"]:
        if c["applicable"]:
            assert c["ok"] == (Fraction(str(c["lhs"])) <= Fraction(str(c["rhs"])))


def test_hypothesis_filters_are_sound():
    """Re-derive hypotheses from raw data whenever a check claims applicability."""
    rng = random.Random(8)
    A = cyclic(2)
    specs = [plain([cyclic(3), symmetric(3)], 1),
             amalgamated([cyclic(4), cyclic(6)], A, [central_embedding(A, cyclic(4)),
                                                     central_embedding(A, cyclic(6))])]
    for t in range(40):
        spec = specs[t % 2]
        h = [random_word(spec, 4, rng=rng) for _ in range(2)]
        pa = PairAnalysis(spec, h, [h[0], random_word(spec, 3, rng=rng)])
        for c in all_checks(pa):
            if not c.applicable or c.name == "elliptic_trivial":
                continue
            assert not pa.I.elliptic
            if c.name.startswith("thm2"):
                assert pa.H.folded.is_edge_free() and pa.K.folded.is_edge_free()
            if c.name == "zakharov":
                assert all(len(S) == 1 for S in pa.H.folded.S.values())
            if c.name.startswith("thm3"):
                assert spec.free_rank == 0
