"""Command-line entry point.

Exit codes: 0 consistent or verified, 1 certificate emitted (or a negative
verdict), 2 input error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .dot import export_dot
from .errors import PolyCFGError, ResourceLimitError
from .grammar import format_grammar, parse_grammar, to_cnf
from .lemma import Marking, annotate_tree, apply_combined, apply_dk, apply_interchange, parse_positions, verify_combined
from .parser import enumerate_words, member_cyk
from .poly import (
    NaturalPolynomial,
    eval_poly,
    gap_scan,
    is_natural,
    parse_poly,
    range_language,
    value_in_range,
    witness_family,
)
from .refute import refute

OK, CERTIFICATE, INPUT_ERROR, RESOURCE = 0, 1, 2, 3


def _split_word(text: str) -> tuple[str, ...]:
    return tuple(text.split()) if any(ch.isspace() for ch in text) else tuple(text)


def _load(path: str):
    return parse_grammar(Path(path).read_text())


def _emit(data) -> None:
    print(json.dumps(data, indent=2))


def cmd_grammar(args) -> int:
    g = _load(args.file)
    cnf = to_cnf(g)
    if args.action == "cnf":
        sys.stdout.write(format_grammar(cnf))
        return OK
    for w in sorted(enumerate_words(cnf, args.len)):
        print(" ".join(w) if any(len(a) > 1 for a in w) else "".join(w))
    return OK


def cmd_parse(args) -> int:
    cnf = to_cnf(_load(args.file))
    word = _split_word(args.word)
    res = member_cyk(cnf, word)
    print("member" if res.member else "not a member")
    if res.member and args.dot:
        dist = parse_positions(args.distinguish) if args.distinguish else list(range(len(word)))
        excl = parse_positions(args.exclude) if args.exclude else []
        at = annotate_tree(res.tree, Marking(tuple(dist), tuple(excl), len(word)))
        Path(args.dot).write_text(export_dot(at))
    return OK if res.member else CERTIFICATE


def cmd_lemma(args) -> int:
    cnf = to_cnf(_load(args.file))
    words = [_split_word(line.strip()) for line in Path(args.words).read_text().splitlines() if line.strip()]
    if not words:
        raise PolyCFGError("words file is empty")
    n = len(words[0])
    if args.kind == "interchange":
        res = apply_interchange(cnf, words, p_override=args.p_override)
        report = verify_combined(cnf, res.combined, args.samples, args.max_m, seed=args.seed)
        data = res.to_json()
        data["checks"] = [c.to_json() for c in report.checks]
    else:
        dist = parse_positions(args.distinguish) if args.distinguish else list(range(n))
        excl = parse_positions(args.exclude) if args.exclude else []
        marking = Marking(tuple(dist), tuple(excl), n)
        if args.kind == "dk":
            dec = apply_dk(cnf, words[0], marking, p_override=args.p_override)
            _emit({"decomposition": dec.to_json(), "pumps_verified": list(range(5))})
            return OK
        res = apply_combined(cnf, words, marking, p_override=args.p_override)
        report = verify_combined(cnf, res, args.samples, args.max_m, seed=args.seed)
        data = res.to_json(report)
    _emit(data)
    return OK if all(c["member"] for c in data["checks"]) else CERTIFICATE


def cmd_poly(args) -> int:
    f = parse_poly(args.expr)
    if args.action == "natural":
        v = is_natural(f)
        _emit({"natural": v.natural, "reason": v.reason, "witness": v.witness})
        return OK if v else CERTIFICATE
    f = NaturalPolynomial(f.alphas, f.M)
    if args.action == "eval":
        print(eval_poly(f, args.value))
    elif args.action == "member":
        n = value_in_range(f, args.value)
        print("none" if n is None else n)
        return OK if n is not None else CERTIFICATE
    elif args.action == "lang":
        for w in range_language(f, args.base, args.n_max):
            print(w)
    elif args.action == "witness":
        _emit(witness_family(f, args.base, args.scale, args.count).to_json())
    elif args.action == "gaps":
        _emit(gap_scan(f, args.bound, args.n_limit, q=args.base).to_json())
    return OK


def cmd_refute(args) -> int:
    g = _load(args.grammar)
    f = NaturalPolynomial.parse(args.poly)
    report = refute(
        g,
        f,
        args.base,
        p_override=args.p_override,
        n_scale=args.scale,
        sample_count=args.samples,
        seed=args.seed,
        scan_len=args.scan_len,
        N_override=args.count,
    )
    _emit(report.to_json())
    return OK if report.consistent else CERTIFICATE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polycfg", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    gp = sub.add_parser("grammar", help="normalize or enumerate a grammar")
    gp.add_argument("action", choices=["cnf", "enum"])
    gp.add_argument("file")
    gp.add_argument("--len", type=int, default=0)
    gp.set_defaults(func=cmd_grammar)

    pp = sub.add_parser("parse", help="CYK membership and derivation tree")
    pp.add_argument("file")
    pp.add_argument("--word", required=True)
    pp.add_argument("--dot")
    pp.add_argument("--distinguish")
    pp.add_argument("--exclude")
    pp.set_defaults(func=cmd_parse)

    lp = sub.add_parser("lemma", help="pumping/interchange decompositions")
    lp.add_argument("kind", choices=["combined", "dk", "interchange"])
    lp.add_argument("file")
    lp.add_argument("--words", required=True, help="file with one word per line")
    lp.add_argument("--distinguish", help="position ranges, e.g. 0-32,40")
    lp.add_argument("--exclude")
    lp.add_argument("--p-override", type=int)
    lp.add_argument("--samples", type=int, default=100)
    lp.add_argument("--max-m", type=int, default=3)
    lp.add_argument("--seed", type=int, default=0)
    lp.set_defaults(func=cmd_lemma)

    op = sub.add_parser("poly", help="natural polynomial utilities")
    op.add_argument("action", choices=["natural", "eval", "member", "lang", "witness", "gaps"])
    op.add_argument("expr")
    op.add_argument("value", type=int, nargs="?", default=0)
    op.add_argument("--base", type=int, default=10)
    op.add_argument("--n-max", type=int, default=10)
    op.add_argument("--scale", type=int, default=3)
    op.add_argument("--count", type=int)
    op.add_argument("--bound", type=int, default=4)
    op.add_argument("--n-limit", type=int, default=1000)
    op.set_defaults(func=cmd_poly)

    rp = sub.add_parser("refute", help="look for a counterexample certificate")
    rp.add_argument("grammar")
    rp.add_argument("--poly", required=True)
    rp.add_argument("--base", type=int, default=10)
    rp.add_argument("--scale", type=int, default=3)
    rp.add_argument("--count", type=int, help="cap on the witness family input size N")
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--samples", type=int, default=50)
    rp.add_argument("--scan-len", type=int, default=4)
    rp.add_argument("--p-override", type=int)
    rp.set_defaults(func=cmd_refute)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return RESOURCE
    except (PolyCFGError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
