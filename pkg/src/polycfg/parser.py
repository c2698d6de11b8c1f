"""Membership, canonical derivation trees and language slices.

CYK runs on a :class:`~polycfg.grammar.CnfGrammar` and stores one bitmask of
nonterminals per span.  Trees are rebuilt top-down from the table: at every
cell the rule with the smallest index wins, then the smallest split point,
so identical inputs always give the identical tree.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence

from .errors import GrammarError, ResourceLimitError, UnknownLetterError
from .grammar import CnfGrammar, Grammar, Rule, Word


@dataclass(frozen=True)
class DerivationTree:
    """An ordered labeled tree stored flat, nodes numbered in preorder.

    ``children[i]`` lists the child ids of node ``i``; ``spans[i]`` is the
    half-open range of word positions it derives.  Leaves carry terminal
    labels and their span start is the leaf's word position.  A node with no
    children that is not a leaf is an epsilon expansion.
    """

    word: Word
    labels: tuple[str, ...]
    children: tuple[tuple[int, ...], ...]
    spans: tuple[tuple[int, int], ...]
    leaf: tuple[bool, ...]

    root = 0

    def __len__(self) -> int:
        return len(self.labels)

    @cached_property
    def parent(self) -> tuple[int | None, ...]:
        parent: list[int | None] = [None] * len(self.labels)
        for i, kids in enumerate(self.children):
            for c in kids:
                parent[c] = i
        return tuple(parent)

    def position(self, node: int) -> int:
        if not self.leaf[node]:
            raise ValueError(f"node {node} is not a leaf")
        return self.spans[node][0]

    def leaves(self) -> list[int]:
        return [i for i in range(len(self.labels)) if self.leaf[i]]

    def rule_at(self, node: int) -> Rule:
        return Rule(self.labels[node], tuple(self.labels[c] for c in self.children[node]))

    def internal_nodes(self) -> Iterator[int]:
        return (i for i in range(len(self.labels)) if not self.leaf[i])

    def depth(self) -> int:
        depth = [0] * len(self.labels)
        for i, kids in enumerate(self.children):
            for c in kids:
                depth[c] = depth[i] + 1
        return max(depth)

    def frontier(self, node: int, cut: int | None = None) -> tuple[str, ...]:
        """Sentential form derived at ``node``; the subtree at ``cut`` stays unexpanded."""
        out: list[str] = []
        stack = [node]
        while stack:
            i = stack.pop()
            if i == cut or self.leaf[i]:
                out.append(self.labels[i])
            else:
                stack.extend(reversed(self.children[i]))
        return tuple(out)

    def is_descendant(self, node: int, ancestor: int) -> bool:
        while node is not None:
            if node == ancestor:
                return True
            node = self.parent[node]
        return False

    def check(self, g: Grammar) -> None:
        """Raise ``GrammarError`` unless this is a derivation of ``word`` in ``g``."""
        rules = set(g.rules)
        terminals = set(g.terminals)
        if self.labels[0] != g.start:
            raise GrammarError(f"root is {self.labels[0]!r}, not the start symbol")
        for i in range(len(self.labels)):
            if self.leaf[i]:
                if self.labels[i] not in terminals or self.children[i]:
                    raise GrammarError(f"leaf {i} is malformed")
            elif self.rule_at(i) not in rules:
                raise GrammarError(f"node {i} uses {self.rule_at(i)}, which is not a rule")
        spelled = tuple(self.labels[i] for i in self.leaves())
        if spelled != self.word:
            raise GrammarError("leaves do not spell the word")
        if [self.position(i) for i in self.leaves()] != list(range(len(self.word))):
            raise GrammarError("leaf positions are not 0..n-1 in order")

    def to_json(self) -> dict:
        return {
            "word": list(self.word),
            "labels": list(self.labels),
            "children": [list(c) for c in self.children],
        }

    @classmethod
    def from_json(cls, data: dict, terminals: Iterable[str]) -> "DerivationTree":
        """Rebuild a tree; spans and leaf flags are recomputed, not trusted."""
        terminals = set(terminals)
        labels = tuple(data["labels"])
        children = tuple(tuple(c) for c in data["children"])
        leaf = tuple(not kids and lab in terminals for lab, kids in zip(labels, children))
        spans: list[tuple[int, int]] = [(0, 0)] * len(labels)
        pos = 0
        # preorder numbering means a node's children all have larger ids
        order: list[tuple[int, bool]] = [(0, False)]
        start: dict[int, int] = {}
        while order:
            i, done = order.pop()
            if done:
                spans[i] = (start[i], pos)
                continue
            start[i] = pos
            if leaf[i]:
                spans[i] = (pos, pos + 1)
                pos += 1
                continue
            order.append((i, True))
            for c in reversed(children[i]):
                if c <= i:
                    raise GrammarError("children must be numbered after their parent")
                order.append((c, False))
        return cls(tuple(data["word"]), labels, children, tuple(spans), leaf)


@dataclass(frozen=True)
class Membership:
    member: bool
    tree: DerivationTree | None = None

    def __bool__(self) -> bool:
        return self.member


def _check_letters(g: CnfGrammar, w: Sequence[str]) -> tuple[str, ...]:
    letters = set(g.terminals)
    for i, a in enumerate(w):
        if a not in letters:
            raise UnknownLetterError(a, i)
    return tuple(w)


def cyk_table(g: CnfGrammar, w: Sequence[str]) -> list[list[int]]:
    """table[i][j] is the bitmask of nonterminals deriving w[i:j]."""
    w = _check_letters(g, w)
    n = len(w)
    table = [[0] * (n + 1) for _ in range(n + 1)]
    ends: list[list[int]] = [[] for _ in range(n)]
    masks = g.terminal_masks
    for i, a in enumerate(w):
        m = masks[a]
        if m:
            table[i][i + 1] = m
            ends[i].append(i + 1)
    binary = g.binary_rules
    cache: dict[tuple[int, int], int] = {}
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length
            row = table[i]
            m = 0
            for k in ends[i]:
                right = table[k][j]
                if not right:
                    continue
                key = (row[k], right)
                got = cache.get(key)
                if got is None:
                    left = key[0]
                    got = 0
                    for _, a, b, c in binary:
                        if left >> b & 1 and right >> c & 1:
                            got |= 1 << a
                    cache[key] = got
                m |= got
            if m:
                row[j] = m
                ends[i].append(j)
    return table


def member_cyk(g: CnfGrammar, w: Sequence[str], tree: bool = True) -> Membership:
    if not isinstance(g, CnfGrammar):
        raise TypeError("member_cyk needs a CnfGrammar; convert with to_cnf first")
    w = _check_letters(g, w)
    s = g.index[g.start]
    if not w:
        if not g.derives_empty:
            return Membership(False)
        t = DerivationTree((), (g.start,), ((),), ((0, 0),), (False,)) if tree else None
        return Membership(True, t)
    table = cyk_table(g, w)
    if not table[0][len(w)] >> s & 1:
        return Membership(False)
    return Membership(True, _build_tree(g, w, table) if tree else None)


def _build_tree(g: CnfGrammar, w: Word, table: list[list[int]]) -> DerivationTree:
    labels: list[str] = []
    children: list[list[int]] = []
    spans: list[tuple[int, int]] = []
    leaf: list[bool] = []
    nts = g.nonterminals
    rules = g.rules
    ix = g.index

    def add(label: str, span: tuple[int, int], is_leaf: bool, parent: int | None) -> int:
        labels.append(label)
        children.append([])
        spans.append(span)
        leaf.append(is_leaf)
        node = len(labels) - 1
        if parent is not None:
            children[parent].append(node)
        return node

    # explicit stack, children pushed right-to-left to keep preorder ids
    stack: list[tuple[int, int, int, int | None]] = [(ix[g.start], 0, len(w), None)]
    while stack:
        a, i, j, parent = stack.pop()
        node = add(nts[a], (i, j), False, parent)
        for k in g.rules_by_lhs[a]:
            rhs = rules[k].rhs
            if len(rhs) == 1:
                if j - i == 1 and rhs[0] == w[i]:
                    add(w[i], (i, j), True, node)
                    break
            elif len(rhs) == 2:
                b, c = ix[rhs[0]], ix[rhs[1]]
                split = next(
                    (m for m in range(i + 1, j) if table[i][m] >> b & 1 and table[m][j] >> c & 1),
                    None,
                )
                if split is not None:
                    stack.append((c, split, j, node))
                    stack.append((b, i, split, node))
                    break
        else:
            raise AssertionError("CYK table inconsistent with grammar")
    return DerivationTree(
        w, tuple(labels), tuple(tuple(c) for c in children), tuple(spans), tuple(leaf)
    )


class WordSlice(frozenset):
    """A set of words that remembers whether enumeration was cut short."""

    truncated: bool

    def __new__(cls, words: Iterable[Word] = (), truncated: bool = False):
        obj = super().__new__(cls, words)
        obj.truncated = truncated
        return obj


def enumerate_words(g: CnfGrammar, n: int, cap: int | None = None) -> WordSlice:
    """All words of length exactly ``n`` in L(g), built bottom-up by span length.

    With ``cap`` set, every intermediate set is truncated to ``cap`` words
    and the result is flagged ``truncated``.
    """
    if n < 0:
        raise ValueError("length must be non-negative")
    if n == 0:
        return WordSlice([()] if g.derives_empty else [])
    t = g.t
    truncated = False
    # words[length][a] = set of words of that length derived from nonterminal a
    words: list[list[set[Word]]] = [[set() for _ in range(t)] for _ in range(n + 1)]
    for letter, rs in g.terminal_rules.items():
        for _, a in rs:
            words[1][a].add((letter,))
    binary = g.binary_rules
    for length in range(2, n + 1):
        level = words[length]
        for _, a, b, c in binary:
            target = level[a]
            for k in range(1, length):
                left, right = words[k][b], words[length - k][c]
                if not left or not right:
                    continue
                if cap is None:
                    target.update(x + y for x in left for y in right)
                    continue
                for x in left:
                    for y in right:
                        if len(target) >= cap:
                            truncated = True
                            break
                        target.add(x + y)
    return WordSlice(words[n][g.index[g.start]], truncated)


def _nonempty_min_lengths(g: Grammar, nullable: set[str]) -> dict[str, float]:
    """Shortest nonempty yield of each nonterminal (inf if none)."""
    inf = float("inf")
    best = {a: inf for a in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            # at least one symbol must contribute; nullable ones may contribute nothing
            contrib = [1 if s not in best else best[s] for s in r.rhs]
            floor = [0 if s in nullable else c for s, c in zip(r.rhs, contrib)]
            total = min(
                (sum(floor) - floor[i] + contrib[i] for i in range(len(r.rhs))),
                default=inf,
            )
            if total < best[r.lhs]:
                best[r.lhs] = total
                changed = True
    return best


def oracle_enumerate(g: Grammar, max_len: int = 12, frontier_cap: int = 500_000) -> set[Word]:
    """Brute-force L(g) up to ``max_len`` by breadth-first leftmost derivations.

    Works on the original grammar, so it shares no code path with CNF
    conversion or CYK.  Applying a rule may erase any nullable symbol of its
    right side on the spot (standing for that symbol's epsilon derivation);
    every symbol that stays must then yield at least one letter, so a
    sentential form longer than ``max_len`` can never finish and is pruned,
    as is any form whose shortest possible yield is too long.
    """
    nts = set(g.nonterminals)
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for r in g.rules:
            if r.lhs not in nullable and all(s in nullable for s in r.rhs):
                nullable.add(r.lhs)
                changed = True
    minlen = _nonempty_min_lengths(g, nullable)

    expansions: dict[str, list[tuple[str, ...]]] = {a: [] for a in g.nonterminals}
    for r in g.rules:
        options = [((s,), ()) if s in nullable else ((s,),) for s in r.rhs]
        for choice in product(*options):
            rhs = tuple(sym for part in choice for sym in part)
            if rhs and rhs not in expansions[r.lhs]:
                expansions[r.lhs].append(rhs)

    result: set[Word] = set()
    if g.start in nullable:
        result.add(())
    start = (g.start,)
    if minlen[g.start] > max_len:
        return result
    seen = {start}
    queue = deque([start])
    while queue:
        form = queue.popleft()
        k = next((i for i, s in enumerate(form) if s in nts), None)
        if k is None:
            result.add(form)
            continue
        for rhs in expansions[form[k]]:
            new = form[:k] + rhs + form[k + 1 :]
            if new in seen or len(new) > max_len:
                continue
            if sum(minlen.get(s, 1) for s in new) > max_len:
                continue
            seen.add(new)
            if len(seen) > frontier_cap:
                raise ResourceLimitError(
                    f"more than {frontier_cap} sentential forms while enumerating to length {max_len}"
                )
            queue.append(new)
    return result
