import random

import pytest

from polycfg.grammar import Grammar, Rule, parse_grammar, to_cnf

NONTERMINALS = ("S", "A", "B", "C")
LETTERS = ("a", "b")


def random_grammar(rng: random.Random, max_nts: int = 4, max_rules: int = 8, max_letters: int = 2, max_rhs: int = 3) -> Grammar:
    nts = NONTERMINALS[: rng.randint(1, max_nts)]
    letters = LETTERS[: rng.randint(1, max_letters)]
    symbols = nts + letters
    rules: list[Rule] = []
    for _ in range(rng.randint(1, max_rules)):
        lhs = "S" if not rules else rng.choice(nts)
        rhs = tuple(rng.choice(symbols) for _ in range(rng.randint(0, max_rhs)))
        rule = Rule(lhs, rhs)
        if rule not in rules:
            rules.append(rule)
    return Grammar(nts, letters, tuple(rules), "S")


def w(text: str) -> tuple[str, ...]:
    return tuple(text)


def texts(words) -> set[str]:
    return {"".join(x) for x in words}


ALL_NUMERALS_10 = """
S -> 0 | P R
P -> 1 | 2 | 3 | 4 | 5 | 6 | 7 | 8 | 9
R -> D R |
D -> 0 | 1 | 2 | 3 | 4 | 5 | 6 | 7 | 8 | 9
"""


@pytest.fixture
def ab_grammar():
    return to_cnf(parse_grammar("S -> A B\nA -> a\nB -> b"))


@pytest.fixture
def ss_grammar():
    return to_cnf(parse_grammar("S -> S S | a"))


@pytest.fixture
def universal_ab():
    return to_cnf(parse_grammar("S -> S S | a | b"))


@pytest.fixture
def anbn():
    return to_cnf(parse_grammar("S -> a S b |"))


@pytest.fixture
def dyck():
    return to_cnf(parse_grammar("S -> ( S ) S |"))


@pytest.fixture
def all_numerals():
    return parse_grammar(ALL_NUMERALS_10)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
