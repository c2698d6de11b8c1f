"""Context-free grammars: representation, text format, Chomsky normal form.

A grammar is an immutable value.  Symbols are plain strings; a word is a
tuple of terminal strings.  The text format is one rule per line::

    S -> a S b | A     # comment
    A ->               # empty alternative is epsilon

Tokens are separated by whitespace.  Every token appearing on some left-hand
side is a nonterminal, every other token is a terminal, and the left-hand
side of the first rule is the start symbol.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    DuplicateRuleError,
    GrammarError,
    GrammarSyntaxError,
    MissingStartError,
    UndeclaredSymbolError,
)

Word = tuple[str, ...]


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...] = ()

    def __str__(self) -> str:
        return f"{self.lhs} -> {' '.join(self.rhs)}".rstrip()


@dataclass(frozen=True)
class Grammar:
    nonterminals: tuple[str, ...]
    terminals: tuple[str, ...]
    rules: tuple[Rule, ...]
    start: str

    def __post_init__(self):
        nts = set(self.nonterminals)
        ts = set(self.terminals)
        if len(nts) != len(self.nonterminals) or len(ts) != len(self.terminals):
            raise GrammarError("symbol lists must not repeat")
        if nts & ts:
            raise GrammarError(f"symbols both terminal and nonterminal: {sorted(nts & ts)}")
        if self.start not in nts:
            raise MissingStartError(f"start symbol {self.start!r} is not a nonterminal")
        seen = set()
        for rule in self.rules:
            if rule.lhs not in nts:
                raise UndeclaredSymbolError(f"rule {rule} has undeclared left side {rule.lhs!r}")
            for sym in rule.rhs:
                if sym not in nts and sym not in ts:
                    raise UndeclaredSymbolError(f"rule {rule} uses undeclared symbol {sym!r}")
            if rule in seen:
                raise DuplicateRuleError(f"duplicate rule {rule}")
            seen.add(rule)

    @classmethod
    def from_rules(
        cls,
        rules: Iterable[tuple[str, Sequence[str]] | Rule],
        start: str | None = None,
        terminals: Iterable[str] = (),
    ) -> "Grammar":
        """Build a grammar, inferring symbol sets in order of first appearance.

        Extra ``terminals`` may be declared even if no rule uses them, which
        widens the alphabet without changing the language.
        """
        rules = [r if isinstance(r, Rule) else Rule(r[0], tuple(r[1])) for r in rules]
        if start is None:
            if not rules:
                raise MissingStartError("grammar has no rules and no start symbol")
            start = rules[0].lhs
        lhs = {r.lhs for r in rules} | {start}
        nts, ts = _ordered_symbols(rules, start, lhs)
        for a in terminals:
            if a not in ts and a not in lhs:
                ts.append(a)
        return cls(tuple(nts), tuple(ts), tuple(rules), start)

    def rules_for(self, lhs: str) -> list[Rule]:
        return [r for r in self.rules if r.lhs == lhs]

    def with_terminals(self, letters: Iterable[str]) -> "Grammar":
        extra = [a for a in letters if a not in self.terminals]
        if not extra:
            return self
        return type(self)(self.nonterminals, self.terminals + tuple(extra), self.rules, self.start)

    @property
    def is_cnf(self) -> bool:
        return _cnf_violation(self) is None

    def digest(self) -> str:
        return hashlib.sha256(format_grammar(self).encode()).hexdigest()

    def __str__(self) -> str:
        return format_grammar(self)


@dataclass(frozen=True)
class CnfGrammar(Grammar):
    """A grammar in Chomsky normal form, with tables for CYK cached lazily."""

    cnf: bool = field(default=True, compare=False)

    def __post_init__(self):
        super().__post_init__()
        problem = _cnf_violation(self)
        if problem:
            raise GrammarError(f"not in Chomsky normal form: {problem}")

    @property
    def t(self) -> int:
        return len(self.nonterminals)

    @cached_property
    def index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.nonterminals)}

    @cached_property
    def derives_empty(self) -> bool:
        return Rule(self.start, ()) in self.rules

    @cached_property
    def terminal_rules(self) -> dict[str, list[tuple[int, int]]]:
        """letter -> [(rule index, lhs index)] in rule order."""
        table: dict[str, list[tuple[int, int]]] = {a: [] for a in self.terminals}
        for k, r in enumerate(self.rules):
            if len(r.rhs) == 1:
                table[r.rhs[0]].append((k, self.index[r.lhs]))
        return table

    @cached_property
    def terminal_masks(self) -> dict[str, int]:
        return {a: _mask(i for _, i in rs) for a, rs in self.terminal_rules.items()}

    @cached_property
    def binary_rules(self) -> list[tuple[int, int, int, int]]:
        """[(rule index, lhs, left, right)] as nonterminal indices."""
        ix = self.index
        return [
            (k, ix[r.lhs], ix[r.rhs[0]], ix[r.rhs[1]])
            for k, r in enumerate(self.rules)
            if len(r.rhs) == 2
        ]

    @cached_property
    def rules_by_lhs(self) -> list[list[int]]:
        table: list[list[int]] = [[] for _ in self.nonterminals]
        for k, r in enumerate(self.rules):
            table[self.index[r.lhs]].append(k)
        return table


def _mask(bits: Iterable[int]) -> int:
    m = 0
    for b in bits:
        m |= 1 << b
    return m


def _cnf_violation(g: Grammar) -> str | None:
    nts = set(g.nonterminals)
    start_on_rhs = any(g.start in r.rhs for r in g.rules)
    for r in g.rules:
        if len(r.rhs) == 0:
            if r.lhs != g.start:
                return f"epsilon rule for non-start {r.lhs!r}"
            if start_on_rhs:
                return "start derives epsilon but occurs on a right side"
        elif len(r.rhs) == 1:
            if r.rhs[0] in nts:
                return f"unit rule {r}"
        elif len(r.rhs) == 2:
            if not (r.rhs[0] in nts and r.rhs[1] in nts):
                return f"binary rule with terminal {r}"
        else:
            return f"rule longer than two symbols {r}"
    return None


def _ordered_symbols(rules: Sequence[Rule], start: str, lhs: set[str]) -> tuple[list[str], list[str]]:
    nts: list[str] = [start]
    ts: list[str] = []
    seen = {start}
    for r in rules:
        for sym in (r.lhs, *r.rhs):
            if sym in seen:
                continue
            seen.add(sym)
            (nts if sym in lhs else ts).append(sym)
    return nts, ts


# -- text format ----------------------------------------------------------


def parse_grammar(text: str) -> Grammar:
    parsed: list[tuple[int, Rule]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise GrammarSyntaxError("expected 'LHS -> alternatives'", lineno)
        head, body = line.split("->", 1)
        head_tokens = head.split()
        if len(head_tokens) != 1:
            raise GrammarSyntaxError(f"left side must be one symbol, got {head.strip()!r}", lineno)
        for alt in body.split("|"):
            tokens = alt.split()
            if "->" in tokens:
                raise GrammarSyntaxError("unexpected '->' on right side", lineno)
            parsed.append((lineno, Rule(head_tokens[0], tuple(tokens))))
    if not parsed:
        raise MissingStartError("grammar text contains no rules, so there is no start symbol")
    seen: dict[Rule, int] = {}
    for lineno, rule in parsed:
        if rule in seen:
            raise DuplicateRuleError(f"rule {rule} repeats line {seen[rule]}", lineno)
        seen[rule] = lineno
    return Grammar.from_rules([r for _, r in parsed])


def format_grammar(g: Grammar) -> str:
    """Render ``g`` in the text format.

    Consecutive rules sharing a left side go on one line, so rule order
    survives a round trip through :func:`parse_grammar`.
    """
    lines: list[tuple[str, list[str]]] = []
    for r in g.rules:
        if lines and lines[-1][0] == r.lhs:
            lines[-1][1].append(" ".join(r.rhs))
        else:
            lines.append((r.lhs, [" ".join(r.rhs)]))
    return "".join(f"{lhs} -> {' | '.join(alts)}".rstrip() + "\n" for lhs, alts in lines)


# -- Chomsky normal form --------------------------------------------------


def _fresh(base: str, used: set[str], created: list[str]) -> str:
    name = base
    k = 1
    while name in used:
        name = f"{base}~{k}"
        k += 1
    used.add(name)
    created.append(name)
    return name


def _dedupe(rules: Iterable[Rule]) -> list[Rule]:
    return list(dict.fromkeys(rules))


def _nullable(rules: Sequence[Rule]) -> set[str]:
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.lhs not in nullable and all(s in nullable for s in r.rhs):
                nullable.add(r.lhs)
                changed = True
    return nullable


def _useful(rules: Sequence[Rule], start: str, nts: set[str]) -> list[Rule]:
    generating: set[str] = set()
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.lhs not in generating and all(s not in nts or s in generating for s in r.rhs):
                generating.add(r.lhs)
                changed = True
    rules = [r for r in rules if all(s not in nts or s in generating for s in r.rhs) and r.lhs in generating]
    reachable = {start}
    frontier = [start]
    while frontier:
        a = frontier.pop()
        for r in rules:
            if r.lhs == a:
                for s in r.rhs:
                    if s in nts and s not in reachable:
                        reachable.add(s)
                        frontier.append(s)
    return [r for r in rules if r.lhs in reachable]


def to_cnf(g: Grammar) -> CnfGrammar:
    """Convert ``g`` to an equivalent grammar in Chomsky normal form.

    Steps, in order: new start symbol (only when the start is nullable and
    occurs on a right side), terminal lifting, binarization, epsilon
    elimination, unit elimination, removal of useless symbols.  Fresh names
    depend only on the input, so the output is reproducible.
    """
    if isinstance(g, CnfGrammar):
        return g
    used = set(g.nonterminals) | set(g.terminals)
    created: list[str] = []
    nts = set(g.nonterminals)
    rules = list(g.rules)
    start = g.start

    if start in _nullable(rules) and any(start in r.rhs for r in rules):
        start = _fresh(f"{g.start}'", used, created)
        nts.add(start)
        rules.insert(0, Rule(start, (g.start,)))

    lifted: dict[str, str] = {}
    lifted_rules: list[Rule] = []
    for r in rules:
        if len(r.rhs) >= 2:
            rhs = []
            for s in r.rhs:
                if s not in nts:
                    if s not in lifted:
                        lifted[s] = _fresh(f"T_{s}", used, created)
                    s = lifted[s]
                rhs.append(s)
            r = Rule(r.lhs, tuple(rhs))
        lifted_rules.append(r)
    for a, name in lifted.items():
        lifted_rules.append(Rule(name, (a,)))
    nts |= set(lifted.values())

    binary: list[Rule] = []
    for pos, r in enumerate(lifted_rules):
        if len(r.rhs) <= 2:
            binary.append(r)
            continue
        head = r.lhs
        for k, s in enumerate(r.rhs[:-2], 1):
            tail = _fresh(f"{r.lhs}_r{pos}_{k}", used, created)
            nts.add(tail)
            binary.append(Rule(head, (s, tail)))
            head = tail
        binary.append(Rule(head, r.rhs[-2:]))

    nullable = _nullable(binary)
    no_eps: list[Rule] = []
    for r in binary:
        if not r.rhs:
            continue
        no_eps.append(r)
        if len(r.rhs) == 2:
            x, y = r.rhs
            if y in nullable:
                no_eps.append(Rule(r.lhs, (x,)))
            if x in nullable:
                no_eps.append(Rule(r.lhs, (y,)))
    if start in nullable:
        no_eps.append(Rule(start, ()))
    no_eps = [r for r in _dedupe(no_eps) if not (len(r.rhs) == 1 and r.rhs[0] == r.lhs)]

    def is_unit(r: Rule) -> bool:
        return len(r.rhs) == 1 and r.rhs[0] in nts

    order = list(dict.fromkeys([start, *g.nonterminals, *created]))
    final: list[Rule] = []
    for a in order:
        # unit closure from a, in breadth-first order for determinism
        closure = [a]
        seen = {a}
        for b in closure:
            for r in no_eps:
                if r.lhs == b and is_unit(r) and r.rhs[0] not in seen:
                    seen.add(r.rhs[0])
                    closure.append(r.rhs[0])
        for b in closure:
            for r in no_eps:
                if r.lhs == b and not is_unit(r):
                    if not r.rhs and a != start:
                        continue
                    final.append(Rule(a, r.rhs))
    final = _useful(_dedupe(final), start, nts)

    used_nts = {start} | {r.lhs for r in final} | {s for r in final for s in r.rhs if s in nts}
    nonterminals = tuple(a for a in order if a in used_nts)
    return CnfGrammar(nonterminals, g.terminals, tuple(final), start)

