"""Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned below.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly with ``python tests/test_acceptance.py``.
"""

import itertools
import json
import random
import time
from contextlib import contextmanager

from conftest import ACCEPTANCE_LINES, ALL_NUMERALS_10, random_grammar

from polycfg.grammar import Grammar, parse_grammar, to_cnf
from polycfg.lemma import Marking, annotate_tree, apply_combined, apply_dk, verify_combined
from polycfg.parser import enumerate_words, member_cyk, oracle_enumerate
from polycfg.poly import (
    NaturalPolynomial,
    digit_alphabet,
    eval_poly,
    gap_scan,
    linear_range_grammar,
    parse_poly,
    range_slice,
    to_base,
    witness_family,
    word_value,
)
from polycfg.refute import EXTRA, consistency_scan, refute, verify_certificate

# pinned limits (seconds) and sizes
LIMIT_1, LIMIT_2, LIMIT_3, LIMIT_4, LIMIT_6, LIMIT_7, LIMIT_9 = 10, 60, 300, 120, 60, 120, 60
TRIPLES_1 = 100
GRAMMARS_2, MAX_LEN_2 = 200, 8
WORDS_3, LEN_3, SAMPLES_3, MAX_M_3 = 500, 36, 100, 3
P_OVERRIDE_4 = 33
SAMPLES_5 = 100
CAP_6 = 200
SCAN_N_9 = 10**4
CERTS_10 = 20

TRI = NaturalPolynomial((0, 1, 1), 2)


@contextmanager
def criterion(k: int, title: str):
    start = time.perf_counter()
    detail: dict = {}
    try:
        yield detail
    except AssertionError as exc:
        took = time.perf_counter() - start
        ACCEPTANCE_LINES[k] = f"[{k:2d}] FAIL  {title} ({took:.1f}s): {str(exc).splitlines()[0]}"
        print(ACCEPTANCE_LINES[k])
        raise
    took = time.perf_counter() - start
    limit = detail.pop("limit", None)
    extra = ", ".join(f"{a}={b}" for a, b in detail.items())
    if limit is not None and took >= limit:
        ACCEPTANCE_LINES[k] = f"[{k:2d}] FAIL  {title} ({took:.1f}s >= {limit}s) {extra}"
        print(ACCEPTANCE_LINES[k])
        raise AssertionError(f"criterion {k} exceeded {limit}s")
    ACCEPTANCE_LINES[k] = f"[{k:2d}] PASS  {title} ({took:.1f}s) {extra}"
    print(ACCEPTANCE_LINES[k])


def test_branch_count_identities():
    with criterion(1, "d-1 d-branch and max(e-1,0) e-branch nodes") as info:
        info["limit"] = LIMIT_1
        rng = random.Random(101)
        done = mismatches = 0
        while done < TRIPLES_1:
            g = to_cnf(random_grammar(rng))
            words = sorted(set().union(*(enumerate_words(g, n) for n in range(1, 11))))
            if not words:
                continue
            z = rng.choice(words)
            pos = list(range(len(z)))
            rng.shuffle(pos)
            d = rng.randint(1, len(z))
            e = rng.randint(0, len(z) - d)
            at = annotate_tree(member_cyk(g, z).tree, Marking(tuple(pos[:d]), tuple(pos[d : d + e]), len(z)))
            mismatches += len(at.d_branch_nodes()) != d - 1 or len(at.e_branch_nodes()) != max(e - 1, 0)
            done += 1
        info["triples"] = done
        assert mismatches == 0, f"{mismatches} count mismatches"


def test_cnf_cyk_oracle_equivalence():
    with criterion(2, "oracle vs CYK-on-CNF slices") as info:
        info["limit"] = LIMIT_2
        rng = random.Random(202)
        differing = 0
        for _ in range(GRAMMARS_2):
            g = random_grammar(rng, max_nts=4, max_rules=8)
            cnf = to_cnf(g)
            oracle = oracle_enumerate(g, MAX_LEN_2)
            cyk = {
                s
                for n in range(MAX_LEN_2 + 1)
                for s in itertools.product(g.terminals, repeat=n)
                if member_cyk(cnf, s, tree=False).member
            }
            differing += oracle != cyk
        info["grammars"] = GRAMMARS_2
        assert differing == 0, f"{differing} grammars disagree"


def test_combined_lemma_true_constants():
    with criterion(3, "combined lemma at p=33 on S->SS|a|b") as info:
        info["limit"] = LIMIT_3
        g = to_cnf(parse_grammar("S -> S S | a | b"))
        rng = random.Random(303)
        R = ["".join(rng.choice("ab") for _ in range(LEN_3)) for _ in range(WORDS_3)]
        res = apply_combined(g, R, Marking.all_distinguished(LEN_3))
        assert res.constants.t == 1 and res.constants.p_theoretical == 33 and not res.constants.overridden
        bound = WORDS_3 / (33 * LEN_3**4)
        assert len(res.selected) >= bound, f"|Z|={len(res.selected)} < {bound}"
        assert len(res.groups) <= 1 * 40 * 39 * 38 * 37 // 24, f"{len(res.groups)} groups"
        rep = verify_combined(g, res, sample_count=SAMPLES_3, max_m=MAX_M_3, seed=3)
        passed = sum(c.member for c in rep.checks)
        info.update(Z=len(res.selected), groups=len(res.groups), lengths=res.lengths, verified=f"{passed}/{SAMPLES_3}")
        assert passed == SAMPLES_3 == len(rep.checks)


def test_pump_closure_anbn():
    with criterion(4, "pumps i=0..4 on a^200 b^200") as info:
        info["limit"] = LIMIT_4
        g = to_cnf(parse_grammar("S -> a S b |"))
        z = "a" * 200 + "b" * 200
        markings = {
            0: Marking.all_distinguished(400),
            5: Marking(tuple(range(200)), tuple(range(395, 400)), 400),
        }
        for e, m in markings.items():
            assert m.e == e and m.d >= 33
            dec = apply_dk(g, z, m, p_override=P_OVERRIDE_4)
            dec.check(m)
            for i in range(5):
                word = "".join(dec.pump(i))
                k = word.count("a")
                assert word == "a" * k + "b" * k, f"e={e} i={i}: not a^k b^k"
                assert member_cyk(g, tuple(word), tree=False).member, f"e={e} i={i}: CYK rejects"
            info[f"e{e}_vx"] = (dec.lengths[1], dec.lengths[3])
        info["p"] = P_OVERRIDE_4


def test_suffix_stability():
    with criterion(5, "last m digits of f(x) and f(x+s) agree") as info:
        rng = random.Random(505)
        failures = 0
        for q in (2, 10):
            fam = witness_family(TRI, q, 3)
            for _ in range(SAMPLES_5):
                x = rng.randrange(10**6)
                a, b = to_base(eval_poly(TRI, x), q), to_base(eval_poly(TRI, x + fam.s), q)
                failures += a.rjust(fam.m, "0")[-fam.m :] != b.rjust(fam.m, "0")[-fam.m :]
            info[f"m_q{q}"] = fam.m
        assert failures == 0, f"{failures} suffix mismatches"


def test_witness_family_invariants():
    with criterion(6, "witness families: length, suffixes, prefix, size") as info:
        info["limit"] = LIMIT_6
        problems = []
        for text in ("(x^2+x)/2", "x^2", "x^3"):
            f = NaturalPolynomial.parse(text)
            for q in (2, 10):
                fam = witness_family(f, q, 3, CAP_6)
                L, m = fam.length, fam.m
                tag = f"{text} q={q}"
                if len({len(w) for w in fam.words}) != 1:
                    problems.append(f"{tag}: unequal lengths")
                if len({w[-m:] for w in fam.words}) != fam.size:
                    problems.append(f"{tag}: repeated suffix")
                if fam.shared_prefix_len < L - m - 2:
                    problems.append(f"{tag}: prefix {fam.shared_prefix_len} < {L}-{m}-2")
                if fam.size < fam.N / 4:
                    problems.append(f"{tag}: size {fam.size} < {fam.N}/4")
        info["families"] = 6
        assert not problems, "; ".join(problems)


def test_linear_positive_case():
    with criterion(7, "linear range grammars match progression slices") as info:
        info["limit"] = LIMIT_7
        bad = []
        for a, b, q in itertools.product(range(6), range(10), (2, 3, 10)):
            g = to_cnf(linear_range_grammar(a, b, q))
            f = NaturalPolynomial((b, a), 1)
            for n in range(6):
                if set(enumerate_words(g, n)) != range_slice(f, q, n):
                    bad.append((a, b, q, n))
        info["cases"] = 6 * 10 * 3
        assert not bad, f"mismatches at {bad[:5]}"


def test_gap_growth():
    with criterion(8, "gap scan: largest n is 15; f=x pairs everywhere") as info:
        tri = gap_scan(TRI, 4)
        assert tri.largest_n == 15, f"largest n {tri.largest_n}"
        assert all(gap == n + 1 for n, _, gap in tri.pairs)
        lin = gap_scan(NaturalPolynomial((0, 1), 1), 0, n_limit=1000)
        assert [p[0] for p in lin.pairs] == list(range(1000))
        info.update(tri_pairs=len(tri.pairs), linear_pairs=len(lin.pairs))


def test_end_to_end_refutation():
    with criterion(9, "refute all-numerals vs triangular; even numerals vs 2x") as info:
        start = time.perf_counter()
        rep = refute(parse_grammar(ALL_NUMERALS_10), TRI, 10)
        first = time.perf_counter() - start
        cert = rep.certificate
        assert cert is not None and cert.kind == EXTRA
        value = word_value(cert.word, 10)
        assert value is not None
        assert all(eval_poly(TRI, n) != value for n in range(SCAN_N_9 + 1))
        assert first < LIMIT_9, f"first refute took {first:.1f}s"
        start = time.perf_counter()
        rep2 = refute(linear_range_grammar(2, 0, 10), NaturalPolynomial((0, 2), 1), 10)
        second = time.perf_counter() - start
        assert rep2.consistent
        lengths = rep2.steps[0]["lengths"]
        assert [r["length"] for r in lengths] == list(range(5))
        assert all(r["mismatches"] == 0 for r in lengths)
        assert second < LIMIT_9, f"second refute took {second:.1f}s"
        info.update(word=cert.text, consistent_through=4)


def _all_numerals(q: int) -> Grammar:
    d = digit_alphabet(q)
    return parse_grammar(
        "S -> 0 | P R\nP -> " + " | ".join(d[1:]) + "\nR -> D R |\nD -> " + " | ".join(d) + "\n"
    )


TRI_PREFIX_2 = "S -> " + " | ".join(" ".join(to_base(v, 2)) for v in (0, 1, 3, 6, 10, 15)) + """ | 1 D D D D R
D -> 0 | 1
R -> D R |
"""


def _certificates():
    polys = [TRI, parse_poly("x^2"), parse_poly("x^3"), parse_poly("2x+1")]
    for seed in (4, 5):
        yield refute(parse_grammar(TRI_PREFIX_2), TRI, 2, n_scale=5, N_override=60, seed=seed).certificate
    for q in (2, 3, 10):
        for f in polys[:3]:
            yield consistency_scan(_all_numerals(q), f, q, 4).certificate
    for q in (2, 10):
        for f in polys:
            yield consistency_scan(parse_grammar("S -> 0"), f, q, 4).certificate
    yield consistency_scan(linear_range_grammar(2, 0, 10), polys[3], 10, 4).certificate
    yield consistency_scan(linear_range_grammar(3, 1, 10), parse_poly("3x"), 10, 4).certificate
    yield consistency_scan(linear_range_grammar(1, 0, 2), TRI, 2, 4).certificate


def test_certificate_soundness():
    with criterion(10, "certificates re-verify from JSON alone") as info:
        certs = [c for c in itertools.islice(_certificates(), CERTS_10) if c is not None]
        assert len(certs) == CERTS_10, f"only {len(certs)} certificates emitted"
        ok = 0
        failures = []
        for c in certs:
            good, problems = verify_certificate(json.loads(c.dumps()))
            ok += good
            if not good:
                failures.append((c.text, problems))
        kinds = {c.kind for c in certs}
        lemma = sum(c.evidence.get("recipe") is not None for c in certs)
        info.update(verified=f"{ok}/{len(certs)}", kinds="+".join(sorted(kinds)), via_lemma=lemma)
        assert ok == CERTS_10, f"failures: {failures}"


if __name__ == "__main__":
    import sys

    status = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                status = 1
    sys.exit(status)
