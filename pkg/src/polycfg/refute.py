"""Search for a word on which a grammar and a polynomial range language disagree.

Findings are packaged as self-contained JSON certificates that can be
re-checked later from the JSON alone.
"""

from __future__ import annotations

import json
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import (
    LemmaViolation,
    NoNonBadNodeError,
    PreconditionError,
    ResourceLimitError,
    UnknownLetterError,
)
from .grammar import CnfGrammar, Grammar, Word, format_grammar, parse_grammar, to_cnf
from .lemma import LemmaConstants, Marking, apply_combined, random_sequences
from .parser import DerivationTree, enumerate_words, member_cyk
from .poly import (
    Polynomial,
    digit_alphabet,
    eval_poly,
    format_poly,
    is_natural,
    range_bracket,
    range_slice,
    to_word,
    value_in_range,
    witness_family,
    word_value,
)

log = logging.getLogger(__name__)

MISSING = "missing-word"
EXTRA = "extra-word"

T = TypeVar("T")
R_ = TypeVar("R_")


def _fanout(fn: Callable[[T], R_], items: Sequence[T], workers: int) -> list[R_]:
    """Map in a bounded pool; results come back in input order."""
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _render(word: Sequence[str]) -> str:
    return "".join(word)


def digit_grammar(g: Grammar, q: int) -> CnfGrammar:
    """CNF of ``g`` over the full base-q digit alphabet.

    Raises ``UnknownLetterError`` when ``g`` uses a letter that is not a digit.
    """
    digits = digit_alphabet(q)
    allowed = set(digits)
    for a in g.terminals:
        if a not in allowed:
            raise UnknownLetterError(a)
    return to_cnf(g).with_terminals(digits)


@dataclass
class RefutationCertificate:
    kind: str
    word: Word
    q: int
    poly: Polynomial
    grammar_text: str
    seed: int | None
    evidence: dict

    @property
    def text(self) -> str:
        return _render(self.word)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "word": self.text,
            "letters": list(self.word),
            "q": self.q,
            "polynomial": {"text": format_poly(self.poly), "alphas": list(self.poly.alphas), "M": self.poly.M},
            "grammar": {"text": self.grammar_text, "sha256": parse_grammar(self.grammar_text).digest()},
            "seed": self.seed,
            "evidence": self.evidence,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _missing(word: Word, n: int, value: int, g: Grammar, f: Polynomial, q: int, seed) -> RefutationCertificate:
    return RefutationCertificate(
        MISSING, word, q, f, format_grammar(g), seed, {"n": n, "value": value, "member": False}
    )


def _extra(
    word: Word,
    tree: DerivationTree,
    g: Grammar,
    f: Polynomial,
    q: int,
    seed,
    recipe: dict | None = None,
) -> RefutationCertificate:
    value = word_value(word, q)
    evidence = {
        "member": True,
        "tree": tree.to_json(),
        "canonical": value is not None,
        "value": value,
        "in_range": None,
        "bracket": range_bracket(f, value) if value is not None else None,
        "recipe": recipe,
    }
    return RefutationCertificate(EXTRA, word, q, f, format_grammar(g), seed, evidence)


def _word_order(q: int):
    rank = {tok: d for d, tok in enumerate(digit_alphabet(q))}
    return lambda w: (len(w), [rank.get(a, q) for a in w])


@dataclass
class ScanReport:
    clean: bool
    lengths: list[dict]
    certificate: RefutationCertificate | None = None

    def to_json(self) -> dict:
        return {
            "clean": self.clean,
            "lengths": self.lengths,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


def consistency_scan(
    g: Grammar,
    f: Polynomial,
    q: int,
    len_limit: int,
    cap: int = 200_000,
    seed: int | None = None,
) -> ScanReport:
    """Compare L(g) with the range language slice by slice up to ``len_limit``."""
    verdict = is_natural(f)
    if not verdict:
        raise PreconditionError(f"{format_poly(f)} is not natural: {verdict.reason}")
    cnf = digit_grammar(g, q)
    key = _word_order(q)
    lengths = []
    for length in range(len_limit + 1):
        ours = enumerate_words(cnf, length, cap=cap + 1)
        if ours.truncated:
            raise ResourceLimitError(f"grammar slice of length {length} exceeds {cap} words")
        theirs = range_slice(f, q, length, cap=cap)
        extra = set(ours) - theirs
        missing = theirs - set(ours)
        lengths.append({"length": length, "grammar": len(ours), "range": len(theirs), "mismatches": len(extra) + len(missing)})
        if extra or missing:
            word = min(extra | missing, key=key)
            if word in extra:
                tree = member_cyk(cnf, word).tree
                cert = _extra(word, tree, g, f, q, seed)
            else:
                value = word_value(word, q)
                cert = _missing(word, value_in_range(f, value), value, g, f, q, seed)
            return ScanReport(False, lengths, cert)
    return ScanReport(True, lengths)


@dataclass
class RefuteReport:
    certificate: RefutationCertificate | None
    seed: int
    steps: list[dict] = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        return self.certificate is None

    def to_json(self) -> dict:
        return {
            "result": "certificate" if self.certificate else "consistent-up-to-bound",
            "seed": self.seed,
            "steps": self.steps,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
        }


def refute(
    g: Grammar,
    f: Polynomial,
    q: int,
    p_override: int | None = None,
    n_scale: int = 3,
    sample_count: int = 50,
    seed: int = 0,
    scan_len: int = 4,
    N_override: int | None = None,
    workers: int = 4,
) -> RefuteReport:
    """Try to show that L(g) is not the base-q range language of ``f``.

    Runs a slice-by-slice scan, then for non-linear ``f`` builds a witness
    family, checks it lies in L(g), and pumps/interchanges it through the
    combined lemma looking for a generated word whose value is outside the
    range.  Returns the first certificate found or a report of what was
    checked.
    """
    report = RefuteReport(None, seed)
    log.info("refute seed=%d", seed)
    cnf = digit_grammar(g, q)

    scan = consistency_scan(g, f, q, scan_len, seed=seed)
    report.steps.append({"step": "consistency_scan", **scan.to_json(), "certificate": None})
    if scan.certificate:
        report.certificate = scan.certificate
        return report
    if f.degree <= 1:
        report.steps.append({"step": "attack", "skipped": "degree <= 1: the range language is context-free"})
        return report

    fam = witness_family(f, q, n_scale, N_override)
    report.steps.append(
        {
            "step": "witness_family",
            "size": fam.size,
            "length": fam.length,
            "m": fam.m,
            "s": fam.s,
            "sharedPrefixLen": fam.shared_prefix_len,
            "hypotheses": fam.hypotheses(),
        }
    )
    words = [tuple(w) for w in fam.words]
    members = _fanout(lambda w: member_cyk(cnf, w, tree=False).member, words, workers)
    for w, x, ok in zip(words, fam.family_xs, members):
        if not ok:
            n = x + fam.s
            report.certificate = _missing(w, n, eval_poly(f, n), g, f, q, seed)
            report.steps.append({"step": "family_membership", "missing": _render(w)})
            return report
    report.steps.append({"step": "family_membership", "all_members": True})

    L, e = fam.length, fam.m
    k = LemmaConstants.for_grammar(cnf, p_override)
    p = k.p_effective
    room = L - e
    auto = None
    if p * (e + 1) > room:
        auto = room // (e + 1)
        p = auto
    attack: dict = {
        "step": "combined",
        "constants": k.to_json(),
        "p_used": p,
        "p_override_needed": auto is not None or p_override is not None,
    }
    report.steps.append(attack)
    if p < 1:
        attack["skipped"] = f"words of length {L} leave no room for p(e+1) distinguished positions with e={e}"
        return report
    marking = Marking(tuple(range(p * (e + 1))), tuple(range(L - e, L)), L)
    try:
        res = apply_combined(cnf, words, marking, p_override=p)
    except (NoNonBadNodeError, PreconditionError, LemmaViolation) as exc:
        attack["failed"] = f"{type(exc).__name__}: {exc}"
        return report
    attack.update({"selected": len(res.selected), "groups": len(res.groups), "A": res.A, "lengths": list(res.lengths)})

    rng = random.Random(seed)
    recipes: list[dict] = []
    for j, dec in enumerate(res.decompositions):
        for i in (0, 2, 3):
            recipes.append({"pump": i, "member": j})
    for seq in random_sequences(len(res.selected), sample_count, 3, rng):
        recipes.append({"sequence": list(seq)})

    def build(recipe: dict) -> Word:
        if "pump" in recipe:
            return res.decompositions[recipe["member"]].pump(recipe["pump"])
        return res.assemble(recipe["sequence"])

    generated = [build(r) for r in recipes]
    verdicts = _fanout(lambda w: member_cyk(cnf, w), generated, workers)
    checked = 0
    for recipe, word, mem in zip(recipes, generated, verdicts):
        if not mem.member:
            attack["lemma_failure"] = _render(word)
            continue
        checked += 1
        value = word_value(word, q)
        if value is None or value_in_range(f, value) is None:
            full = dict(recipe)
            if "member" in full:
                full["member"] = res.selected[full["member"]]
                full["decomposition"] = res.decompositions[recipe["member"]].to_json()
            else:
                full["sequence"] = [res.selected[i] for i in recipe["sequence"]]
            report.certificate = _extra(word, mem.tree, g, f, q, seed, recipe=full)
            attack["generated_checked"] = checked
            return report
    attack["generated_checked"] = checked
    return report


def verify_certificate(data: dict | str) -> tuple[bool, list[str]]:
    """Re-check a certificate from its JSON alone, with fresh computation."""
    if isinstance(data, str):
        data = json.loads(data)
    problems: list[str] = []
    g = parse_grammar(data["grammar"]["text"])
    if g.digest() != data["grammar"]["sha256"]:
        problems.append("grammar hash mismatch")
    q = data["q"]
    f = Polynomial(tuple(data["polynomial"]["alphas"]), data["polynomial"]["M"])
    if not is_natural(f):
        problems.append("polynomial is not natural")
        return False, problems
    word = tuple(data["letters"])
    if _render(word) != data["word"]:
        problems.append("word and letters disagree")
    cnf = digit_grammar(g, q)
    fresh = member_cyk(cnf, word)
    ev = data["evidence"]
    if data["kind"] == MISSING:
        n, value = ev["n"], ev["value"]
        if eval_poly(f, n) != value:
            problems.append(f"f({n}) != {value}")
        if to_word(value, q) != word:
            problems.append("word is not the numeral of the value")
        if fresh.member:
            problems.append("word is in L(g) after all")
    elif data["kind"] == EXTRA:
        if not fresh.member:
            problems.append("word is not in L(g)")
        tree = DerivationTree.from_json(ev["tree"], cnf.terminals)
        try:
            tree.check(cnf)
        except Exception as exc:  # noqa: BLE001 - any defect invalidates the tree
            problems.append(f"embedded tree invalid: {exc}")
        if tree.word != word:
            problems.append("embedded tree spells another word")
        value = word_value(word, q)
        if value is None:
            if ev["canonical"]:
                problems.append("word claimed canonical but is not")
        else:
            if value != ev["value"]:
                problems.append("value mismatch")
            if value_in_range(f, value) is not None:
                problems.append(f"value {value} is in the range")
            br = ev.get("bracket")
            if br and br.get("hi") is not None:
                if not eval_poly(f, br["hi"]) > value:
                    problems.append("bracket upper end does not exceed the value")
                if br.get("lo") is not None and not eval_poly(f, br["lo"]) < value:
                    problems.append("bracket lower end is not below the value")
    else:
        problems.append(f"unknown kind {data['kind']!r}")
    return not problems, problems
