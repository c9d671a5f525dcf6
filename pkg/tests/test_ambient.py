import random

import pytest
from hypothesis import given, settings, strategies as st

from kurosh.ambient import (WordError, all_words, amalgamated, format_word, invert, is_normal_form,
                            multiply, normalize, parse_word, plain, product, random_word, syllable_length)
from kurosh.finite import GroupError, central_embedding, cyclic, symmetric

from conftest import words

A_ = ("f", 0, 1)      # the involution of Z/2 * Z/3
B_ = ("f", 1, 1)


def test_plain_relations(z2z3):
    assert normalize(z2z3, [A_, A_]) == ()
    assert normalize(z2z3, [B_, B_]) == (("f", 1, 2),)
    assert invert(z2z3, normalize(z2z3, [A_, B_])) == (("f", 1, 2), A_)


def test_syllable_length(z2z3):
    assert syllable_length(()) == 0
    assert syllable_length(parse_word(z2z3, "f2:2 f1:1")) == 2


def test_normalize_rejects_out_of_range(z2z3):
    for bad in ([("f", 2, 1)], [("f", 0, 5)], [("x", 0, 1)], [("q", 1)]):
        with pytest.raises(WordError):
            normalize(z2z3, bad)


def test_multiply_checks_mismatched_specs(z2z3, f2):
    u = parse_word(f2, "x1 x2")
    with pytest.raises(WordError):
        multiply(z2z3, u, (), check=True)
    assert multiply(f2, u, invert(f2, u), check=True) == ()


def test_spec_validation():
    with pytest.raises(GroupError):
        plain([], 0)
    with pytest.raises(GroupError):
        plain([cyclic(1)])
    S3 = symmetric(3)
    order2 = S3.labels.index("(12)")
    with pytest.raises(GroupError, match="not normal"):
        amalgamated([S3], cyclic(2), [(0, order2)])


def test_amalgam_transversal_arithmetic(z4z4):
    # rep 1 of Z/4 times rep 1 of Z/4 (same factor) is 2 = image of A
    u = parse_word(z4z4, "f1:1")
    assert product(z4z4, u, u) == (("a", 1),)
    # across factors: a(1) * b(1) stays in head-rep form
    w = parse_word(z4z4, "f1:3 f2:1")
    assert w == (("a", 1), ("f", 0, 1), ("f", 1, 1))
    assert is_normal_form(z4z4, w)


def test_parse_and_format(z2z3, mixed_amalgam):
    w = parse_word(mixed_amalgam, "a:1 f1:3 x1 X1 f2:1")
    assert format_word(w) == format_word(parse_word(mixed_amalgam, format_word(w)))
    assert parse_word(z2z3, "1") == ()
    assert format_word(()) == "1"
    with pytest.raises(WordError, match="column 6"):
        parse_word(z2z3, "f1:1 a:1")
    with pytest.raises(WordError, match="column 1"):
        parse_word(z2z3, "f1:0")
    with pytest.raises(WordError):
        parse_word(z2z3, "y1")


def test_random_word_deterministic(mixed_amalgam):
    assert random_word(mixed_amalgam, 5, seed=3) == random_word(mixed_amalgam, 5, seed=3)
    rng = random.Random(1)
    for _ in range(50):
        w = random_word(mixed_amalgam, 4, rng=rng)
        assert w and syllable_length(w) <= 4 and is_normal_form(mixed_amalgam, w)


def test_all_words_counts(z2z2, z2z3):
    # alternating words in Z/2 * Z/2: 1 + 2 per length
    assert len(all_words(z2z2, 5)) == 11
    assert len(all_words(z2z3, 2)) == 1 + 3 + 4
    ws = all_words(z2z3, 4)
    assert len(set(ws)) == len(ws)


def test_inverse_for_many_random_words(mixed_amalgam, z2z3):
    rng = random.Random(0)
    for spec in (mixed_amalgam, z2z3):
        for _ in range(500):
            u = random_word(spec, 6, rng=rng)
            assert multiply(spec, u, invert(spec, u)) == ()
            assert multiply(spec, invert(spec, u), u) == ()


SPECS = {}


def _spec(name):
    if name not in SPECS:
        A = cyclic(2)
        SPECS.update(
            z2z3=plain([cyclic(2), cyclic(3)]),
            s3f1=plain([symmetric(3)], 1),
            am=amalgamated([cyclic(4), cyclic(6)], A, [central_embedding(A, cyclic(4)),
                                                     central_embedding(A, cyclic(6))], 1),
        )
    return SPECS[name]


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(["z2z3", "s3f1", "am"]), st.integers(0, 10**6))
def test_associativity(name, seed):
    spec = _spec(name)
    rng = random.Random(seed)
    u, v, w = (random_word(spec, 5, rng=rng) for _ in range(3))
    assert multiply(spec, multiply(spec, u, v), w) == multiply(spec, u, multiply(spec, v, w))


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(["z2z3", "s3f1", "am"]), st.integers(0, 10**6))
def test_normal_forms_are_fixed_points(name, seed):
    spec = _spec(name)
    rng = random.Random(seed)
    raw = [l for _ in range(3) for l in random_word(spec, 3, rng=rng)]
    w = normalize(spec, raw)
    assert is_normal_form(spec, w)
    assert normalize(spec, w) == w
