import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from polycfg.errors import BadBaseError, NotNaturalError, ZeroDenominatorError
from polycfg.grammar import to_cnf
from polycfg.parser import enumerate_words
from polycfg.poly import (
    NaturalPolynomial,
    Polynomial,
    eval_poly,
    gap_scan,
    is_natural,
    linear_range_grammar,
    parse_poly,
    range_bracket,
    range_language,
    range_slice,
    to_base,
    value_in_range,
    witness_family,
    word_value,
)

TRI = NaturalPolynomial((0, 1, 1), 2)


def test_natural_examples():
    assert is_natural(TRI)
    v = is_natural(Polynomial((0, 1), 2))
    assert not v and v.witness == 1
    v = is_natural(parse_poly("x^2 - 10x"))
    assert not v and v.witness == 1


def test_not_natural_construction():
    with pytest.raises(NotNaturalError):
        NaturalPolynomial((0, 1), 2)
    with pytest.raises(ZeroDenominatorError):
        Polynomial((1,), 0)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=4), st.integers(1, 6))
def test_naturality_matches_direct_scan(alphas, M):
    f = Polynomial(tuple(alphas), M)
    scan = next((n for n in range(1000) if f.numerator(n) < 0 or f.numerator(n) % M), None)
    v = is_natural(f)
    if scan is None:
        assert v.natural
    else:
        assert not v.natural and v.witness == scan


def test_eval():
    assert eval_poly(TRI, 3) == 6
    assert eval_poly(TRI, 0) == 0
    assert eval_poly(TRI, 100) == sum(range(101))


def test_to_base():
    assert to_base(6, 2) == "110"
    assert to_base(0, 10) == "0"
    assert to_base(255, 16) == "ff"
    with pytest.raises(BadBaseError):
        to_base(5, 1)


def test_word_value():
    assert word_value("110", 2) == 6
    assert word_value("0", 10) == 0
    assert word_value("01", 10) is None
    assert word_value("", 10) is None


def test_range_language():
    assert set(range_language(TRI, 10, 4)) == {"0", "1", "3", "6", "10"}
    assert set(range_language(NaturalPolynomial((0, 1), 1), 2, 3)) == {"0", "1", "10", "11"}
    assert set(range_language(TRI, 2, 3)) == {"0", "1", "11", "110"}


def test_value_in_range_examples():
    assert value_in_range(TRI, 6) == 3
    assert value_in_range(TRI, 7) is None
    assert value_in_range(TRI, 5050) == 100


@pytest.mark.parametrize("f", [TRI, NaturalPolynomial((3, 0, 1), 1), parse_poly("x^2 - 4x + 4"), parse_poly("x^3")])
def test_value_in_range_exact(f):
    first = {}
    for n in range(10**4):
        first.setdefault(eval_poly(f, n), n)
    for v in range(10**4):
        assert value_in_range(f, v) == first.get(v)


def test_range_bracket():
    br = range_bracket(TRI, 7)
    assert eval_poly(TRI, br["lo"]) < 7 < eval_poly(TRI, br["hi"])


def test_range_slice_matches_language():
    lang = range_language(TRI, 10, 200)
    for length in range(1, 5):
        assert {"".join(x) for x in range_slice(TRI, 10, length)} == {s for s in lang if len(s) == length}


def test_poly_parse_round_trip():
    f = parse_poly("(x^2+x)/2")
    assert (f.alphas, f.M) == (TRI.alphas, TRI.M)
    assert parse_poly(str(f)) == f
    assert f(3) == Fraction(6)


def test_witness_example():
    fam = witness_family(TRI, 10, 3, 50)
    assert fam.size >= 13
    assert len({len(x) for x in fam.words}) == 1
    assert len({x[-fam.m :] for x in fam.words}) == fam.size
    assert fam.s % (2 * 10**fam.m) == 0


def test_witness_linear():
    fam = witness_family(NaturalPolynomial((0, 1), 1), 2, 2)
    assert fam.size >= 1


def test_suffix_stability():
    rng = random.Random(0)
    for q in (2, 10):
        fam = witness_family(TRI, q, 3)
        mod = q**fam.m
        for _ in range(100):
            x = rng.randrange(10**6)
            assert eval_poly(TRI, x) % mod == eval_poly(TRI, x + fam.s) % mod


def test_gap_examples():
    rep = gap_scan(TRI, 4)
    assert rep.largest_n == 15
    assert all(gap == n + 1 for n, _, gap in rep.pairs)
    lin = gap_scan(NaturalPolynomial((0, 1), 1), 0, n_limit=50)
    assert [p[0] for p in lin.pairs] == list(range(50))
    cube = gap_scan(parse_poly("x^3"), 5, n_limit=100)
    # 3n^2+3n+1 <= 32 only for n <= 2
    assert cube.largest_n == 2


def test_linear_grammar_examples():
    assert enumerate_words(to_cnf(linear_range_grammar(0, 5, 10)), 1) == {("5",)}
    g = to_cnf(linear_range_grammar(1, 0, 2))
    got = {"".join(x) for n in range(4) for x in enumerate_words(g, n)}
    assert got == {s for s in range_language(NaturalPolynomial((0, 1), 1), 2, 7)}
    g = to_cnf(linear_range_grammar(3, 2, 10))
    got = {"".join(x) for n in range(3) for x in enumerate_words(g, n)}
    assert got == set(range_language(NaturalPolynomial((2, 3), 1), 10, 32))


@pytest.mark.parametrize("q", [2, 3, 10])
def test_linear_grammar_matrix(q):
    for a in range(6):
        for b in range(10):
            g = to_cnf(linear_range_grammar(a, b, q))
            f = NaturalPolynomial((b, a), 1)
            for length in range(6):
                assert set(enumerate_words(g, length)) == range_slice(f, q, length), (a, b, q, length)
