import random

import pytest
from hypothesis import given, settings, strategies as st

from polycfg.errors import DuplicateRuleError, GrammarError, GrammarSyntaxError, MissingStartError, UndeclaredSymbolError
from polycfg.grammar import CnfGrammar, Grammar, Rule, format_grammar, parse_grammar, to_cnf
from polycfg.parser import enumerate_words, oracle_enumerate

from conftest import random_grammar, texts


def test_parse_single_rule():
    g = parse_grammar("S -> a")
    assert g.nonterminals == ("S",)
    assert g.terminals == ("a",)
    assert g.rules == (Rule("S", ("a",)),)
    assert g.start == "S"


def test_parse_symbol_order_follows_first_appearance():
    g = parse_grammar("S -> A B\nA -> a\nB -> b")
    assert g.nonterminals == ("S", "A", "B")
    assert g.terminals == ("a", "b")
    assert len(g.rules) == 3


def test_parse_empty_alternative_is_epsilon():
    g = parse_grammar("S -> a S |")
    assert set(g.rules) == {Rule("S", ("a", "S")), Rule("S", ())}


def test_parse_comments_and_blank_lines():
    g = parse_grammar("# header\n\nS -> a   # trailing\n")
    assert g.rules == (Rule("S", ("a",)),)


@pytest.mark.parametrize(
    "text, error, line",
    [
        ("S -> a\nthis line has no arrow", GrammarSyntaxError, 2),
        ("S T -> a", GrammarSyntaxError, 1),
        ("S -> a -> b", GrammarSyntaxError, 1),
        ("S -> a\nS -> b | a", DuplicateRuleError, 2),
    ],
)
def test_parse_errors_carry_line_numbers(text, error, line):
    with pytest.raises(error) as info:
        parse_grammar(text)
    assert info.value.line == line


def test_parse_empty_text_has_no_start():
    with pytest.raises(MissingStartError):
        parse_grammar("# nothing here\n")


def test_constructor_rejects_undeclared_symbols():
    with pytest.raises(UndeclaredSymbolError):
        Grammar(("S",), ("a",), (Rule("S", ("b",)),), "S")


def test_constructor_rejects_overlap_and_missing_start():
    with pytest.raises(GrammarError):
        Grammar(("S", "a"), ("a",), (), "S")
    with pytest.raises(MissingStartError):
        Grammar(("A",), ("a",), (Rule("A", ("a",)),), "S")


def test_cnf_rejects_non_cnf_rules():
    with pytest.raises(GrammarError):
        CnfGrammar(("S",), ("a",), (Rule("S", ("a", "S")),), "S")
    with pytest.raises(GrammarError):
        CnfGrammar(("S",), ("a",), (Rule("S", ("S", "S")), Rule("S", ())), "S")


def test_already_cnf_keeps_language():
    g = parse_grammar("S -> A B\nA -> a\nB -> b")
    c = to_cnf(g)
    assert c.t == 3
    for n in range(5):
        assert enumerate_words(c, n) == {x for x in oracle_enumerate(g, 4) if len(x) == n}


def test_anbn_to_cnf():
    g = parse_grammar("S -> a S b |")
    c = to_cnf(g)
    assert c.is_cnf
    expected = {x for x in oracle_enumerate(g, 12) if len(x) <= 8}
    assert texts(expected) == {"", "ab", "aabb", "aaabbb", "aaaabbbb"}
    got = set().union(*(enumerate_words(c, n) for n in range(9)))
    assert got == expected


def test_unit_rule_removed():
    c = to_cnf(parse_grammar("S -> A\nA -> a"))
    assert c.rules == (Rule("S", ("a",)),)
    assert texts(enumerate_words(c, 1)) == {"a"}


def test_only_start_derives_epsilon():
    c = to_cnf(parse_grammar("S -> A S A | a\nA -> b |"))
    for r in c.rules:
        if not r.rhs:
            assert r.lhs == c.start
    assert not any(c.start in r.rhs for r in c.rules if c.derives_empty)


def test_cnf_is_deterministic():
    text = "S -> a S b S | A\nA -> b A a | c |"
    assert to_cnf(parse_grammar(text)) == to_cnf(parse_grammar(text))
    assert format_grammar(to_cnf(parse_grammar(text))) == format_grammar(to_cnf(parse_grammar(text)))


def test_fresh_names_avoid_collisions():
    c = to_cnf(parse_grammar("S -> a S b |\nT_a -> a"))
    assert len(set(c.nonterminals)) == len(c.nonterminals)
    assert "T_a~1" in c.nonterminals


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_cnf_preserves_language_on_random_grammars(seed):
    g = random_grammar(random.Random(seed))
    c = to_cnf(g)
    oracle = oracle_enumerate(g, 8)
    for n in range(9):
        assert enumerate_words(c, n) == {x for x in oracle if len(x) == n}


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**9))
def test_format_parse_round_trip(seed):
    g = random_grammar(random.Random(seed))
    # the text format infers symbols from rules, so normalize once through it
    g = Grammar.from_rules(g.rules, start=g.start)
    if any(not g.rules_for(a) for a in g.nonterminals):
        return
    assert parse_grammar(format_grammar(g)) == g


def test_round_trip_of_cnf_output():
    c = to_cnf(parse_grammar("S -> a S b |"))
    back = parse_grammar(format_grammar(c))
    assert set(back.rules) == set(c.rules)
    assert back.start == c.start
