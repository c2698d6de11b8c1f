"""Natural polynomials and their base-q range languages.

A polynomial is stored as integer coefficients over a common positive
denominator, ``f(x) = (a_0 + a_1 x + ... + a_d x^d) / M``.  Everything is
exact integer arithmetic.  Questions about the shape of ``f`` on the
naturals (where it is negative, where it is monotone, which ``n`` hit a
value) are answered by splitting ``[0, bound]`` into pieces on which the
numerator is monotone, using forward differences recursively, and binary
searching inside each piece.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    BadBaseError,
    DegenerateScaleError,
    NonDivisibleError,
    NotNaturalError,
    PolynomialSyntaxError,
    ResourceLimitError,
    ZeroDenominatorError,
)
from .grammar import Grammar, Rule

Coeffs = tuple[int, ...]


# -- integer polynomial helpers --------------------------------------------


def _trim(c: Sequence[int]) -> Coeffs:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c) if c else (0,)


def _horner(c: Coeffs, n: int) -> int:
    v = 0
    for a in reversed(c):
        v = v * n + a
    return v


def _shift(c: Coeffs, s: int) -> Coeffs:
    """Coefficients of P(x + s)."""
    out = [0] * len(c)
    for a in reversed(c):
        # out = out * (x + s) + a
        for i in range(len(out) - 1, 0, -1):
            out[i] = out[i] * s + out[i - 1]
        out[0] = out[0] * s + a
    return _trim(out)


def _delta(c: Coeffs) -> Coeffs:
    """Coefficients of P(x + 1) - P(x)."""
    shifted = _shift(c, 1)
    return _trim([a - b for a, b in zip(shifted, c)])


def _positive_from(c: Coeffs) -> int:
    """An n0 with P(n) > 0 for every n >= n0, for a positive leading coefficient."""
    lead = c[-1]
    if len(c) == 1:
        return 0
    return 1 + -(-max(abs(a) for a in c[:-1]) // lead)


def _negative_from(c: Coeffs) -> int:
    return _positive_from(tuple(-a for a in c))


def _pieces(c: Coeffs, lo: int, hi: int) -> list[tuple[int, int]]:
    """Cover [lo, hi] by intervals on which P is weakly monotone over the integers.

    Consecutive intervals may share an endpoint.
    """
    if hi <= lo or len(c) <= 2:
        return [(lo, hi)]
    d = _delta(c)
    out: list[tuple[int, int]] = []
    for a, b in _pieces(d, lo, hi - 1):
        # delta monotone on [a, b]; P monotone wherever delta keeps its sign
        da, db = _horner(d, a), _horner(d, b)
        if da * db >= 0:
            out.append((a, b + 1))
            continue
        rising = da < db
        left, right = a, b  # first k in [a, b] where delta has crossed zero
        while left < right:
            mid = (left + right) // 2
            v = _horner(d, mid)
            if (v >= 0) if rising else (v <= 0):
                right = mid
            else:
                left = mid + 1
        out.append((a, left))
        out.append((left, b + 1))
    return out


def _search(c: Coeffs, a: int, b: int, pred_at_or_after) -> int | None:
    """Least k in [a, b] with pred(P(k)), for a predicate monotone in k on the piece."""
    if not pred_at_or_after(_horner(c, b)):
        return None
    while a < b:
        mid = (a + b) // 2
        if pred_at_or_after(_horner(c, mid)):
            b = mid
        else:
            a = mid + 1
    return a


def _first_below(c: Coeffs, lo: int, hi: int, threshold: int = 0) -> int | None:
    """Least n in [lo, hi] with P(n) < threshold."""
    for a, b in _pieces(c, lo, hi):
        pa, pb = _horner(c, a), _horner(c, b)
        if pa < threshold:
            return a
        if pb < threshold:
            # P falls over the piece: first crossing by bisection
            return _search(c, a, b, lambda v: v < threshold)
    return None


def _preimages(c: Coeffs, lo: int, hi: int, vlo: int, vhi: int) -> Iterable[int]:
    """Every n in [lo, hi] with vlo <= P(n) <= vhi, in increasing order, deduplicated."""
    last = lo - 1
    for a, b in _pieces(c, lo, hi):
        a = max(a, last + 1)
        if a > b:
            continue
        rising = _horner(c, a) <= _horner(c, b)
        if rising:
            first = _search(c, a, b, lambda v: v >= vlo)
        else:
            first = _search(c, a, b, lambda v: v <= vhi)
        if first is not None:
            n = first
            while n <= b and vlo <= _horner(c, n) <= vhi:
                yield n
                n += 1
        last = b


# -- polynomials ------------------------------------------------------------


@dataclass(frozen=True)
class Polynomial:
    """``(sum alphas[i] x^i) / M`` with integer alphas and a positive integer M."""

    alphas: Coeffs
    M: int = 1

    def __post_init__(self):
        if self.M == 0:
            raise ZeroDenominatorError("denominator M must be nonzero")
        alphas = _trim([int(a) for a in self.alphas])
        M = int(self.M)
        if M < 0:
            alphas, M = tuple(-a for a in alphas), -M
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "M", M)

    @property
    def degree(self) -> int:
        return len(self.alphas) - 1 if self.alphas != (0,) else 0

    @property
    def leading(self) -> int:
        return self.alphas[-1]

    def numerator(self, n: int) -> int:
        return _horner(self.alphas, n)

    def __call__(self, n: int) -> Fraction:
        return Fraction(self.numerator(n), self.M)

    @classmethod
    def parse(cls, text: str) -> "Polynomial":
        return parse_poly(text)

    def __str__(self) -> str:
        return format_poly(self)


@dataclass(frozen=True)
class NaturalPolynomial(Polynomial):
    """A polynomial checked, at construction, to map the naturals into the naturals."""

    _verdict: "NaturalVerdict" = field(default=None, compare=False, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        super().__post_init__()
        verdict = is_natural(Polynomial(self.alphas, self.M))
        if not verdict:
            raise NotNaturalError(f"{format_poly(self)} is not natural: {verdict.reason}")
        object.__setattr__(self, "_verdict", verdict)

    @classmethod
    def parse(cls, text: str) -> "NaturalPolynomial":
        p = parse_poly(text)
        return cls(p.alphas, p.M)


_TERM = re.compile(r"([+-]?)\s*(\d*)\s*\*?\s*(x(?:\s*\^\s*(\d+))?)?")


def parse_poly(text: str) -> Polynomial:
    """Parse ``(a_d x^d + ... + a_1 x + a_0)/M``; parentheses and ``/M`` are optional."""
    s = text.strip()
    M = 1
    m = re.fullmatch(r"\((.*)\)\s*/\s*(-?\d+)", s)
    if m:
        s, M = m.group(1), int(m.group(2))
    else:
        m = re.fullmatch(r"(.*?)\s*/\s*(-?\d+)", s)
        if m and "(" not in s:
            s, M = m.group(1), int(m.group(2))
        elif s.startswith("(") and s.endswith(")"):
            s = s[1:-1]
    s = s.replace(" ", "")
    if not s:
        raise PolynomialSyntaxError(f"empty polynomial in {text!r}")
    coeffs: dict[int, int] = {}
    pos = 0
    while pos < len(s):
        t = _TERM.match(s, pos)
        if not t or t.end() == pos or (not t.group(2) and not t.group(3)):
            raise PolynomialSyntaxError(f"cannot parse {text!r} at {s[pos:]!r}")
        if pos > 0 and not t.group(1):
            raise PolynomialSyntaxError(f"missing operator in {text!r} at {s[pos:]!r}")
        sign = -1 if t.group(1) == "-" else 1
        coef = int(t.group(2)) if t.group(2) else 1
        power = 0 if not t.group(3) else int(t.group(4) or 1)
        coeffs[power] = coeffs.get(power, 0) + sign * coef
        pos = t.end()
    deg = max(coeffs)
    return Polynomial(tuple(coeffs.get(i, 0) for i in range(deg + 1)), M)


def format_poly(p: Polynomial) -> str:
    terms = []
    for i in range(len(p.alphas) - 1, -1, -1):
        a = p.alphas[i]
        if a == 0 and not (i == 0 and not terms):
            continue
        mag = abs(a)
        body = "x" if i == 1 else f"x^{i}" if i > 1 else ""
        text = body if mag == 1 and body else f"{mag}{body}"
        if not terms:
            terms.append(("-" if a < 0 else "") + text)
        else:
            terms.append(("-" if a < 0 else "+") + text)
    expr = "".join(terms)
    return expr if p.M == 1 else f"({expr})/{p.M}"


@dataclass(frozen=True)
class NaturalVerdict:
    natural: bool
    reason: str
    witness: int | None = None

    def __bool__(self) -> bool:
        return self.natural


def is_natural(p: Polynomial | tuple[Sequence[int], int]) -> NaturalVerdict:
    """Decide whether ``p`` maps every natural number to a natural number."""
    if not isinstance(p, Polynomial):
        p = Polynomial(tuple(p[0]), p[1])
    c, M = p.alphas, p.M
    # integer on 0..degree implies integer everywhere, so the least
    # non-integral argument (if any) lies in that window
    frac = next((n for n in range(p.degree + 1) if _horner(c, n) % M), None)
    if p.degree == 0:
        neg = 0 if c[0] < 0 else None
    elif p.leading < 0:
        neg = _first_below(c, 0, _negative_from(c))
    else:
        neg = _first_below(c, 0, _positive_from(c))
    fails = [n for n in (frac, neg) if n is not None]
    if fails:
        n = min(fails)
        value = Fraction(_horner(c, n), M)
        kind = "is not an integer" if n == frac else "is negative"
        return NaturalVerdict(False, f"f({n}) = {value} {kind}", n)
    if p.degree == 0:
        return NaturalVerdict(True, "nonnegative integer constant")
    return NaturalVerdict(True, f"integer on 0..{p.degree} and nonnegative on 0..{_positive_from(c)}; positive beyond")


def _natural(f: Polynomial) -> Polynomial:
    if isinstance(f, NaturalPolynomial):
        return f
    verdict = is_natural(f)
    if not verdict:
        raise NotNaturalError(f"{format_poly(f)} is not natural: {verdict.reason}")
    return f


def eval_poly(f: Polynomial, n: int) -> int:
    if n < 0:
        raise ValueError("argument must be a natural number")
    num = f.numerator(n)
    q, r = divmod(num, f.M)
    if r:
        raise NonDivisibleError(f"{num} is not divisible by {f.M}: {format_poly(f)} is not integer at {n}")
    return q


# -- numerals -----------------------------------------------------------------

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _check_base(q: int) -> None:
    if q < 2:
        raise BadBaseError(f"base must be at least 2, got {q}")


def digit_token(d: int, q: int) -> str:
    return _DIGITS[d] if q <= 36 else f"<{d}>"


def digit_alphabet(q: int) -> tuple[str, ...]:
    _check_base(q)
    return tuple(digit_token(d, q) for d in range(q))


def to_digits(v: int, q: int) -> list[int]:
    _check_base(q)
    if v < 0:
        raise ValueError("only natural numbers have numerals")
    if v == 0:
        return [0]
    out = []
    while v:
        v, r = divmod(v, q)
        out.append(r)
    return out[::-1]


def to_word(v: int, q: int) -> tuple[str, ...]:
    return tuple(digit_token(d, q) for d in to_digits(v, q))


def to_base(v: int, q: int) -> str:
    return "".join(to_word(v, q))


def word_value(word: Sequence[str], q: int) -> int | None:
    """Value of a canonical numeral; None for the empty word or a leading zero."""
    lookup = {tok: d for d, tok in enumerate(digit_alphabet(q))}
    digits = []
    for tok in word:
        if tok not in lookup:
            raise ValueError(f"{tok!r} is not a base-{q} digit")
        digits.append(lookup[tok])
    if not digits or (len(digits) > 1 and digits[0] == 0):
        return None
    v = 0
    for d in digits:
        v = v * q + d
    return v


def digit_count(v: int, q: int) -> int:
    return len(to_digits(v, q))


# -- range language ---------------------------------------------------------


def monotone_from(f: Polynomial) -> int:
    """Least n0 such that f is strictly increasing on n0, n0+1, ...

    Only meaningful for degree >= 1 with positive leading coefficient.
    """
    if f.degree < 1 or f.leading <= 0:
        raise ValueError("f must have positive degree and leading coefficient")
    d = _delta(f.alphas)
    last = None
    for a, b in _pieces(d, 0, _positive_from(d)):
        if _horner(d, a) <= _horner(d, b):
            # rising: the nonpositive part is a prefix of the piece
            if _horner(d, a) > 0:
                continue
            k = _search(d, a, b, lambda v: v > 0)
            cand = b if k is None else k - 1
        elif _horner(d, b) <= 0:
            cand = b
        else:
            continue
        last = cand if last is None else max(last, cand)
    return 0 if last is None else last + 1


def preimages(f: Polynomial, vlo: int, vhi: int) -> list[int]:
    """All n with vlo <= f(n) <= vhi, increasing."""
    f = _natural(f)
    if vhi < vlo:
        return []
    if f.degree == 0:
        raise ValueError("constant polynomials have infinitely many preimages")
    lo_num, hi_num = vlo * f.M, vhi * f.M
    n0 = monotone_from(f)
    c = f.alphas
    out = list(_preimages(c, 0, n0, lo_num, hi_num)) if n0 > 0 else []
    # strictly increasing from n0: exponential then binary search for the start
    if _horner(c, n0) > hi_num:
        return out
    step = 1
    while _horner(c, n0 + step) < lo_num:
        step *= 2
    n = _search(c, n0, n0 + step, lambda v: v >= lo_num)
    seen = set(out)
    while n is not None and _horner(c, n) <= hi_num:
        if n not in seen:
            out.append(n)
        n += 1
    return out


def value_in_range(f: Polynomial, v: int) -> int | None:
    """The least n with f(n) == v, or None."""
    f = _natural(f)
    if f.degree == 0:
        return 0 if v * f.M == f.alphas[0] else None
    hits = preimages(f, v, v)
    return hits[0] if hits else None


def range_bracket(f: Polynomial, v: int) -> dict:
    """Evidence for a value: the increasing tail starts at ``monotone_from`` and
    ``lo``/``hi`` are adjacent arguments there with f(lo) < v < f(hi)."""
    f = _natural(f)
    if f.degree == 0:
        return {"monotone_from": None, "lo": None, "hi": None, "constant": eval_poly(f, 0)}
    n0 = monotone_from(f)
    c, target = f.alphas, v * f.M
    step = 1
    while _horner(c, n0 + step) <= target:
        step *= 2
    hi = _search(c, n0, n0 + step, lambda x: x > target)
    lo = hi - 1 if hi - 1 >= n0 else None
    return {"monotone_from": n0, "lo": lo, "hi": hi}


def range_language(f: Polynomial, q: int, n_max: int) -> list[str]:
    f = _natural(f)
    _check_base(q)
    values = sorted({eval_poly(f, n) for n in range(n_max + 1)})
    return [to_base(v, q) for v in values]


def range_slice(f: Polynomial, q: int, length: int, cap: int = 1_000_000) -> set[tuple[str, ...]]:
    """Words of L_f of exactly ``length`` digits, found by bracketing the arguments."""
    f = _natural(f)
    _check_base(q)
    if length <= 0:
        return set()
    vlo = 0 if length == 1 else q ** (length - 1)
    vhi = q**length - 1
    if f.degree == 0:
        v = eval_poly(f, 0)
        return {to_word(v, q)} if vlo <= v <= vhi else set()
    ns = preimages(f, vlo, vhi)
    if len(ns) > cap:
        raise ResourceLimitError(f"{len(ns)} arguments give {length}-digit values, cap is {cap}")
    return {to_word(eval_poly(f, n), q) for n in ns}


# -- witness families -------------------------------------------------------


@dataclass
class WitnessFamily:
    q: int
    m: int
    s: int
    N: int
    n: int
    M: int
    xs: list[int]
    words: list[str]
    family_xs: list[int]
    shared_prefix_len: int
    length_classes: dict[int, int]
    prefix_classes: list[int]

    @property
    def length(self) -> int:
        return len(self.words[0])

    @property
    def size(self) -> int:
        return len(self.words)

    def hypotheses(self) -> dict[str, bool]:
        """Which hypotheses of the common-prefix argument hold at this scale."""
        return {
            "more_than_n4_words": self.size > self.n**4,
            "prefix_longer_than_n": self.shared_prefix_len > self.n,
            "suffixes_distinct": len({w[-self.m :] for w in self.words}) == self.size,
            "equal_length": len({len(w) for w in self.words}) == 1,
        }

    def to_json(self) -> dict:
        return {
            "q": self.q,
            "m": self.m,
            "s": self.s,
            "N": self.N,
            "n": self.n,
            "sharedPrefixLen": self.shared_prefix_len,
            "words": list(self.words),
            "xs": [x + self.s for x in self.family_xs],
            "lengthClasses": {str(k): v for k, v in sorted(self.length_classes.items())},
            "prefixClasses": self.prefix_classes,
            "hypotheses": self.hypotheses(),
        }


def _lcp(words: Sequence[str]) -> int:
    first, last = min(words), max(words)
    k = 0
    while k < len(first) and k < len(last) and first[k] == last[k]:
        k += 1
    return k


def witness_family(f: Polynomial, q: int, n: int, N_override: int | None = None) -> WitnessFamily:
    """Equal-length numerals f(x_i + s) with a shared prefix and distinct m-digit suffixes."""
    f = _natural(f)
    _check_base(q)
    if f.degree < 1:
        raise DegenerateScaleError("a family needs a polynomial of degree at least 1")
    N = n**5 if N_override is None else N_override
    if n < 1 or N < 1:
        raise DegenerateScaleError(f"scale n={n}, N={N} yields no family")
    seen: set[int] = set()
    xs: list[int] = []
    for x in range(f.degree * N):
        v = eval_poly(f, x)
        if v not in seen:
            seen.add(v)
            xs.append(x)
            if len(xs) == N:
                break
    m = digit_count(max(eval_poly(f, x) for x in xs), q)
    step = f.M * q**m
    floor_s = q ** (n * n - 1)
    s = -(-floor_s // step) * step
    words = [to_base(eval_poly(f, x + s), q) for x in xs]

    lengths = Counter(len(w) for w in words)
    L = min(lengths, key=lambda k: (-lengths[k], k))
    members = [i for i, w in enumerate(words) if len(w) == L]
    P = L
    while P > 0 and len({words[i][:P] for i in members}) > 2:
        P -= 1
    prefixes = Counter(words[i][:P] for i in members)
    best = min(prefixes, key=lambda p: (-prefixes[p], p))
    family = [i for i in members if words[i][:P] == best]
    fam_words = [words[i] for i in family]
    return WitnessFamily(
        q=q,
        m=m,
        s=s,
        N=N,
        n=n,
        M=f.M,
        xs=xs,
        words=fam_words,
        family_xs=[xs[i] for i in family],
        shared_prefix_len=_lcp(fam_words) if len(fam_words) > 1 else L,
        length_classes=dict(lengths),
        prefix_classes=sorted(prefixes.values(), reverse=True),
    )


# -- gaps -------------------------------------------------------------------


@dataclass
class GapReport:
    bound: int
    pairs: list[tuple[int, int, int]]  # (n, f(n), gap to the next distinct value)
    largest_n: int | None
    increasing_from: int | None
    eventually_increasing: bool | None
    q: int | None = None
    q_pairs: list[tuple[int, int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "pairs": [list(p) for p in self.pairs],
            "largest_n": self.largest_n,
            "increasing_from": self.increasing_from,
            "eventually_increasing": self.eventually_increasing,
            "q": self.q,
            "q_pairs": [list(p) for p in self.q_pairs],
        }


def gap_scan(f: Polynomial, B: int, n_limit: int = 1000, q: int | None = None) -> GapReport:
    """Adjacent distinct values of f(0..n_limit) at distance at most 2^B.

    With ``q`` given, pairs at distance below q^B are listed as well.
    """
    f = _natural(f)
    first_arg: dict[int, int] = {}
    for n in range(n_limit + 1):
        first_arg.setdefault(eval_poly(f, n), n)
    values = sorted(first_arg)
    gaps = [(first_arg[a], a, b - a) for a, b in zip(values, values[1:])]
    bound = 2**B
    pairs = [g for g in gaps if g[2] <= bound]
    q_pairs = [g for g in gaps if g[2] < q**B] if q is not None else []
    inc_from = eventually = None
    if f.degree >= 2 and len(gaps) >= 2:
        last_drop = max((i + 1 for i in range(len(gaps) - 1) if gaps[i + 1][2] <= gaps[i][2]), default=0)
        inc_from = gaps[last_drop][0] if last_drop < len(gaps) else None
        eventually = last_drop < len(gaps) - 1
    return GapReport(
        bound=bound,
        pairs=pairs,
        largest_n=max((p[0] for p in pairs), default=None),
        increasing_from=inc_from,
        eventually_increasing=eventually,
        q=q,
        q_pairs=q_pairs,
    )


# -- linear case ------------------------------------------------------------


def linear_range_grammar(a: int, b: int, q: int) -> Grammar:
    """Right-linear grammar for the base-q numerals of {a n + b : n >= 0}.

    Built from a digit automaton reading most significant digit first whose
    state is (value mod a, min(value, b)).
    """
    _check_base(q)
    if a < 0 or b < 0:
        raise ValueError("a and b must be natural numbers")
    digits = digit_alphabet(q)
    if a == 0:
        word = to_word(b, q)
        return Grammar.from_rules([("S", word)], terminals=digits)

    start = (None, None)
    accepting = lambda st: st[0] == b % a and st[1] == b  # noqa: E731

    def step(st, d):
        r, cap = st
        if r is None:
            return (d % a, min(d, b))
        return ((r * q + d) % a, min(cap * q + d, b))

    # states reachable from the first nonzero digit; zero handled separately
    states = []
    index = {}
    frontier = [step(start, d) for d in range(1, q)]
    for st in frontier:
        if st not in index:
            index[st] = len(states)
            states.append(st)
    k = 0
    while k < len(states):
        st = states[k]
        for d in range(q):
            nxt = step(st, d)
            if nxt not in index:
                index[nxt] = len(states)
                states.append(nxt)
        k += 1

    # keep states that can still reach acceptance
    live = {st for st in states if accepting(st)}
    changed = True
    while changed:
        changed = False
        for st in states:
            if st not in live and any(step(st, d) in live for d in range(q)):
                live.add(st)
                changed = True

    name = {st: f"Q{index[st]}" for st in states}
    rules: list[Rule] = []
    for d in range(1, q):
        st = step(start, d)
        if st in live:
            rules.append(Rule("S", (digits[d], name[st])))
    if b == 0:
        rules.append(Rule("S", (digits[0],)))
    for st in states:
        if st not in live:
            continue
        for d in range(q):
            nxt = step(st, d)
            if nxt in live:
                rules.append(Rule(name[st], (digits[d], name[nxt])))
        if accepting(st):
            rules.append(Rule(name[st], ()))
    return Grammar.from_rules(rules, start="S", terminals=digits)
