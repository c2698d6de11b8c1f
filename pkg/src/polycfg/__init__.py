"""Grammar toolkit for marked pumping, interchange decompositions and
base-q range languages of natural polynomials."""

from .errors import *  # noqa: F401,F403
from .grammar import CnfGrammar, Grammar, Rule, format_grammar, parse_grammar, to_cnf
from .lemma import (
    AnnotatedTree,
    CombinedResult,
    Decomposition,
    LemmaConstants,
    Marking,
    annotate_tree,
    apply_combined,
    apply_dk,
    apply_interchange,
    extract_decomposition,
    verify_combined,
)
from .parser import DerivationTree, enumerate_words, member_cyk, oracle_enumerate
from .poly import (
    NaturalPolynomial,
    Polynomial,
    eval_poly,
    gap_scan,
    is_natural,
    linear_range_grammar,
    parse_poly,
    range_language,
    to_base,
    value_in_range,
    witness_family,
)
from .dot import export_dot
from .refute import RefutationCertificate, consistency_scan, refute, verify_certificate

__version__ = "0.1.0"
