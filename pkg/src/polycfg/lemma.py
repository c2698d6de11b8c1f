"""Constructive pumping and interchange decompositions on derivation trees.

Positions of a word are either distinguished, excluded, or neither.  The
engine annotates a CNF derivation tree with which nodes branch on
distinguished (d-branch) and excluded (e-branch) leaves, then locates a
repeated nonterminal whose pumping loop covers a distinguished position and
no excluded one.  Over a collection of words the per-word decompositions
are grouped by shape; the largest group pumps and interchanges freely.
"""

from __future__ import annotations

import random
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

from .errors import (
    LemmaViolation,
    MarkingError,
    NoNonBadNodeError,
    NonMemberWordError,
    PreconditionError,
)
from .grammar import CnfGrammar, Word
from .parser import DerivationTree, member_cyk


@dataclass(frozen=True)
class Marking:
    distinguished: tuple[int, ...]
    excluded: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "distinguished", tuple(sorted(set(self.distinguished))))
        object.__setattr__(self, "excluded", tuple(sorted(set(self.excluded))))
        if not self.distinguished:
            raise MarkingError("at least one position must be distinguished")
        bad = [p for p in self.distinguished + self.excluded if not 0 <= p < self.n]
        if bad:
            raise MarkingError(f"positions {bad} fall outside a word of length {self.n}")
        both = set(self.distinguished) & set(self.excluded)
        if both:
            raise MarkingError(f"positions {sorted(both)} are both distinguished and excluded")

    @property
    def d(self) -> int:
        return len(self.distinguished)

    @property
    def e(self) -> int:
        return len(self.excluded)

    @classmethod
    def all_distinguished(cls, n: int) -> "Marking":
        return cls(tuple(range(n)), (), n)

    def count_in(self, lo: int, hi: int, excluded: bool = False) -> int:
        pos = self.excluded if excluded else self.distinguished
        return bisect_left(pos, hi) - bisect_left(pos, lo)

    def to_json(self) -> dict:
        return {"distinguished": list(self.distinguished), "excluded": list(self.excluded)}


def parse_positions(text: str) -> list[int]:
    """Parse ``"0-32,40"`` into ``[0, 1, ..., 32, 40]``."""
    out: list[int] = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


@dataclass(frozen=True)
class LemmaConstants:
    t: int
    p_effective: int

    def __post_init__(self):
        if self.p_effective < 1:
            raise PreconditionError("p must be at least 1")

    @classmethod
    def for_grammar(cls, g: CnfGrammar, p_override: int | None = None) -> "LemmaConstants":
        t = g.t
        p = max(5 * t, 2 ** (2 * t + 3) + 1)
        return cls(t, p if p_override is None else p_override)

    @property
    def c(self) -> int:
        return 5 * self.t

    @property
    def p_theoretical(self) -> int:
        return max(self.c, 2 ** (2 * self.t + 3) + 1)

    @property
    def height(self) -> int:
        """How many d-parents a d-branch node must have to be usable: 2t+3."""
        return 2 * self.t + 3

    @property
    def overridden(self) -> bool:
        return self.p_effective != self.p_theoretical

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "c": self.c,
            "p_theoretical": self.p_theoretical,
            "p_effective": self.p_effective,
        }


@dataclass(frozen=True)
class AnnotatedTree:
    tree: DerivationTree
    marking: Marking
    has_d: tuple[bool, ...]
    has_e: tuple[bool, ...]
    d_branch: tuple[bool, ...]
    e_branch: tuple[bool, ...]
    d_parent: tuple[int | None, ...]

    def d_branch_nodes(self) -> list[int]:
        return [i for i, f in enumerate(self.d_branch) if f]

    def e_branch_nodes(self) -> list[int]:
        return [i for i, f in enumerate(self.e_branch) if f]

    def ith_d_parent(self, node: int, i: int) -> int | None:
        for _ in range(i):
            node = self.d_parent[node]
            if node is None:
                return None
        return node


def annotate_tree(tree: DerivationTree, m: Marking) -> AnnotatedTree:
    if m.n != len(tree.word):
        raise MarkingError(f"marking is for length {m.n}, word has length {len(tree.word)}")
    spans = tree.spans
    has_d = tuple(m.count_in(lo, hi) > 0 for lo, hi in spans)
    has_e = tuple(m.count_in(lo, hi, excluded=True) > 0 for lo, hi in spans)
    d_branch = tuple(len(k) >= 2 and all(has_d[c] for c in k) for k in tree.children)
    e_branch = tuple(len(k) >= 2 and all(has_e[c] for c in k) for k in tree.children)
    d_parent: list[int | None] = [None] * len(tree)
    # preorder: a node's nearest d-branch ancestor is known before the node
    nearest: list[int | None] = [None] * len(tree)
    for i in range(len(tree)):
        p = tree.parent[i]
        if p is not None:
            nearest[i] = p if d_branch[p] else nearest[p]
        if d_branch[i]:
            d_parent[i] = nearest[i]
    return AnnotatedTree(tree, m, has_d, has_e, d_branch, e_branch, tuple(d_parent))


@dataclass(frozen=True)
class Decomposition:
    """z = u v w x y, read off two nodes labeled ``A`` on one root path."""

    A: str
    word: Word
    offsets: tuple[int, int, int, int, int, int]
    upper: int
    lower: int
    tree: DerivationTree = field(compare=False, repr=False)

    @property
    def parts(self) -> tuple[Word, Word, Word, Word, Word]:
        o = self.offsets
        return tuple(self.word[o[k] : o[k + 1]] for k in range(5))  # type: ignore[return-value]

    @property
    def lengths(self) -> tuple[int, int, int, int, int]:
        o = self.offsets
        return tuple(o[k + 1] - o[k] for k in range(5))  # type: ignore[return-value]

    @property
    def ranges(self) -> dict[str, tuple[int, int]]:
        o = self.offsets
        return {name: (o[k], o[k + 1]) for k, name in enumerate("uvwxy")}

    def pump(self, i: int) -> Word:
        u, v, w, x, y = self.parts
        return u + v * i + w + x * i + y

    def check(self, m: Marking | None = None) -> None:
        """Raise ``LemmaViolation`` if any structural property fails."""
        u, v, w, x, y = self.parts
        t = self.tree
        if u + v + w + x + y != self.word or self.offsets[0] != 0 or self.offsets[-1] != len(self.word):
            raise LemmaViolation("parts do not partition the word")
        if t.labels[self.upper] != self.A or t.labels[self.lower] != self.A:
            raise LemmaViolation("decomposition nodes are not labeled A")
        if self.lower == self.upper or not t.is_descendant(self.lower, self.upper):
            raise LemmaViolation("lower node is not a proper descendant of the upper node")
        if t.frontier(self.upper, cut=self.lower) != v + (self.A,) + x:
            raise LemmaViolation("A does not derive vAx in the tree")
        if t.frontier(self.lower) != w:
            raise LemmaViolation("A does not derive w in the tree")
        if m is not None:
            o = self.offsets
            loop = [(o[1], o[2]), (o[3], o[4])]
            if any(m.count_in(lo, hi, excluded=True) for lo, hi in loop):
                raise LemmaViolation("v or x contains an excluded position")
            if not any(m.count_in(lo, hi) for lo, hi in loop):
                raise LemmaViolation("vx contains no distinguished position")

    def to_json(self) -> dict:
        return {
            "word": "".join(self.word) if all(len(a) == 1 for a in self.word) else list(self.word),
            "A": self.A,
            "offsets": {k: list(r) for k, r in self.ranges.items()},
        }


def _require_budget(m: Marking, k: LemmaConstants) -> None:
    if m.d < k.p_effective * (m.e + 1):
        raise PreconditionError(
            f"need d >= p(e+1) = {k.p_effective}*({m.e}+1) = {k.p_effective * (m.e + 1)}, got d = {m.d}"
        )


def _first_good_node(at: AnnotatedTree, h: int) -> int | None:
    """First d-branch node (preorder) with an h-th d-parent and no e-branch node
    strictly above it up to and including that d-parent."""
    parent = at.tree.parent
    for node in at.d_branch_nodes():
        top = at.ith_d_parent(node, h)
        if top is None:
            continue
        cur = parent[node]
        clean = True
        while True:
            if at.e_branch[cur]:
                clean = False
                break
            if cur == top:
                break
            cur = parent[cur]
        if clean:
            return node
    return None


def extract_decomposition(at: AnnotatedTree, k: LemmaConstants, order: Sequence[str] | None = None) -> Decomposition:
    """Find a marked pumping decomposition in one annotated tree.

    ``order`` fixes the nonterminal ranking used for tie-breaking; it
    defaults to first appearance in the tree.
    """
    m = at.marking
    _require_budget(m, k)
    tree = at.tree
    h = k.height
    node = _first_good_node(at, h)
    if node is None:
        note = "" if not k.overridden else f" (p_effective {k.p_effective} < p_theoretical {k.p_theoretical})"
        raise NoNonBadNodeError(f"every d-branch node is bad{note}")
    top = at.ith_d_parent(node, h)
    path = [node]
    while path[-1] != top:
        path.append(tree.parent[path[-1]])
    path.reverse()  # top ... node

    def sibling_dirty(child: int) -> bool:
        p = tree.parent[child]
        return any(at.has_e[s] for s in tree.children[p] if s != child)

    dirty = [False] + [sibling_dirty(c) for c in path[1:]]
    dpos = [i for i, v in enumerate(path) if at.d_branch[v]]
    need = k.t + 1
    window = None
    for a in range(len(dpos) - need + 1):
        lo, hi = dpos[a], dpos[a + need - 1]
        if not any(dirty[lo + 1 : hi + 1]):
            window = [path[i] for i in dpos[a : a + need]]
            break
    if window is None:
        raise LemmaViolation("no excluded-free subpath with t+1 d-branch nodes")

    rank = {a: i for i, a in enumerate(order)} if order is not None else {}
    pairs = []
    for x in range(len(window)):
        for y in range(x + 1, len(window)):
            lab = tree.labels[window[x]]
            if lab == tree.labels[window[y]]:
                pairs.append((rank.get(lab, len(rank)), x, y))
    if not pairs:
        raise LemmaViolation("pigeonhole failed: window has no repeated nonterminal")
    _, x, y = min(pairs)
    upper, lower = window[x], window[y]
    (ua, ub), (la, lb) = tree.spans[upper], tree.spans[lower]
    n = len(tree.word)
    dec = Decomposition(tree.labels[upper], tree.word, (0, ua, la, lb, ub, n), upper, lower, tree)
    dec.check(m)
    return dec


@dataclass
class Group:
    A: str
    lengths: tuple[int, int, int, int, int]
    members: list[int]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class CombinedResult:
    words: list[Word]
    marking: Marking
    constants: LemmaConstants
    A: str
    lengths: tuple[int, int, int, int, int]
    selected: list[int]
    decompositions: list[Decomposition]
    groups: list[Group]

    @property
    def n(self) -> int:
        return self.marking.n

    @property
    def size_bound(self) -> float:
        """|R| / (p n^4); the largest group must reach it."""
        return len(self.words) / (self.constants.p_effective * self.n**4)

    @property
    def group_bound(self) -> int:
        return self.constants.t * comb(self.n + 4, 4)

    def preconditions(self) -> dict[str, bool]:
        k, m = self.constants, self.marking
        return {
            "p_effective_is_theoretical": not k.overridden,
            "d_ge_p_effective_e1": m.d >= k.p_effective * (m.e + 1),
            "d_ge_p_theoretical_e1": m.d >= k.p_theoretical * (m.e + 1),
            "size_bound_met": len(self.selected) >= self.size_bound,
            "group_bound_met": len(self.groups) <= self.group_bound,
        }

    def assemble(self, sequence: Sequence[int]) -> Word:
        """u_{i0} v_{i1}..v_{im} w_{i(m+1)} x_{im}..x_{i1} y_{i0} over indices into Z."""
        if len(sequence) < 2:
            raise ValueError("a sequence needs at least i0 and i1")
        parts = [d.parts for d in self.decompositions]
        i0, *mid, last = sequence
        out: list[str] = list(parts[i0][0])
        for i in mid:
            out.extend(parts[i][1])
        out.extend(parts[last][2])
        for i in reversed(mid):
            out.extend(parts[i][3])
        out.extend(parts[i0][4])
        return tuple(out)

    def to_json(self, verification: "VerificationReport | None" = None) -> dict:
        data = {
            "constants": self.constants.to_json(),
            "marking": self.marking.to_json(),
            "groups": [{"A": g.A, "lengths": list(g.lengths), "size": g.size} for g in self.groups],
            "selected": {
                "A": self.A,
                "lengths": list(self.lengths),
                "members": [
                    {"index": i, "word": d.to_json()["word"], "offsets": d.to_json()["offsets"]}
                    for i, d in zip(self.selected, self.decompositions)
                ],
            },
            "bounds": {
                "size_bound": self.size_bound,
                "group_bound": self.group_bound,
                "preconditions": self.preconditions(),
            },
            "checks": [],
        }
        if verification is not None:
            data["checks"] = [c.to_json() for c in verification.checks]
            data["seed"] = verification.seed
        return data


def _trees_for(g: CnfGrammar, R: Sequence[Word]) -> list[DerivationTree]:
    trees = []
    for idx, z in enumerate(R):
        res = member_cyk(g, z)
        if not res.member:
            raise NonMemberWordError(z, idx)
        trees.append(res.tree)
    return trees


def apply_combined(
    g: CnfGrammar,
    R: Iterable[Sequence[str]],
    m: Marking,
    p_override: int | None = None,
) -> CombinedResult:
    R = [tuple(z) for z in R]
    if not R:
        raise PreconditionError("R is empty")
    if any(len(z) != m.n for z in R):
        raise PreconditionError(f"every word of R must have the marked length {m.n}")
    k = LemmaConstants.for_grammar(g, p_override)
    _require_budget(m, k)
    trees = _trees_for(g, R)
    decs = [extract_decomposition(annotate_tree(t, m), k, g.nonterminals) for t in trees]

    by_shape: dict[tuple, list[int]] = defaultdict(list)
    for i, d in enumerate(decs):
        by_shape[(d.A, d.lengths)].append(i)
    groups = [Group(A, lengths, members) for (A, lengths), members in by_shape.items()]
    groups.sort(key=lambda gr: (-gr.size, gr.members[0]))
    best = groups[0]
    res = CombinedResult(
        words=R,
        marking=m,
        constants=k,
        A=best.A,
        lengths=best.lengths,
        selected=list(best.members),
        decompositions=[decs[i] for i in best.members],
        groups=groups,
    )
    if len(res.selected) < res.size_bound or len(groups) > res.group_bound:
        raise LemmaViolation("group census breaks the pigeonhole bounds")
    return res


@dataclass(frozen=True)
class Check:
    sequence: tuple[int, ...]
    word: Word
    member: bool

    def to_json(self) -> dict:
        return {"sequence": list(self.sequence), "word": "".join(self.word), "member": self.member}


@dataclass
class VerificationReport:
    checks: list[Check]
    seed: int

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.member]

    @property
    def ok(self) -> bool:
        return not self.failures


def random_sequences(k: int, count: int, max_m: int, rng: random.Random) -> list[tuple[int, ...]]:
    out = []
    for _ in range(count):
        m = rng.randint(0, max_m)
        out.append(tuple(rng.randrange(k) for _ in range(m + 2)))
    return out


def verify_combined(
    g: CnfGrammar,
    res: CombinedResult,
    sample_count: int = 100,
    max_m: int = 3,
    seed: int = 0,
    sequences: Iterable[Sequence[int]] | None = None,
) -> VerificationReport:
    """Check interleaved words for random index sequences (or the given ones)."""
    if sequences is None:
        sequences = random_sequences(len(res.selected), sample_count, max_m, random.Random(seed))
    checks = []
    for seq in sequences:
        word = res.assemble(seq)
        checks.append(Check(tuple(seq), word, member_cyk(g, word, tree=False).member))
    return VerificationReport(checks, seed)


def apply_dk(
    g: CnfGrammar,
    z: Sequence[str],
    m: Marking,
    p_override: int | None = None,
    pumps: Iterable[int] = range(5),
) -> Decomposition:
    """Marked pumping for a single word; pumps are verified by CYK before returning."""
    res = apply_combined(g, [tuple(z)], m, p_override)
    dec = res.decompositions[0]
    for i in pumps:
        if not member_cyk(g, dec.pump(i), tree=False).member:
            raise LemmaViolation(f"pumped word with i={i} is not in the language")
    return dec


@dataclass
class InterchangeResult:
    combined: CombinedResult
    triples: list[tuple[Word, Word, Word]]

    @property
    def selected(self) -> list[int]:
        return self.combined.selected

    @property
    def size_bound(self) -> float:
        """Inherited |R|/(p n^4), weaker than the classical |R|/(p n^2)."""
        return self.combined.size_bound

    def cross(self, i: int, j: int) -> Word:
        V = self.triples[i][0]
        W = self.triples[j][1]
        X = self.triples[i][2]
        return V + W + X

    def to_json(self) -> dict:
        data = self.combined.to_json()
        data["interchange"] = {
            "triples": [["".join(p) for p in t] for t in self.triples],
            "size_bound_note": "|Z| >= |R|/(p n^4) inherited from the combined lemma",
        }
        return data


def apply_interchange(
    g: CnfGrammar, R: Iterable[Sequence[str]], p_override: int | None = None
) -> InterchangeResult:
    R = [tuple(z) for z in R]
    if not R:
        raise PreconditionError("R is empty")
    res = apply_combined(g, R, Marking.all_distinguished(len(R[0])), p_override)
    triples = []
    for d in res.decompositions:
        u, v, w, x, y = d.parts
        triples.append((u, v + w + x, y))
    return InterchangeResult(res, triples)
