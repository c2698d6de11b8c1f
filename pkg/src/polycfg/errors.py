"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class PolyCFGError(Exception):
    """Base class for all errors raised by polycfg."""


class GrammarError(PolyCFGError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GrammarSyntaxError(GrammarError):
    pass


class UndeclaredSymbolError(GrammarError):
    pass


class MissingStartError(GrammarError):
    pass


class DuplicateRuleError(GrammarError):
    pass


class UnknownLetterError(PolyCFGError):
    def __init__(self, letter: str, position: int | None = None):
        self.letter = letter
        self.position = position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"letter {letter!r}{where} is not in the grammar alphabet")


class ResourceLimitError(PolyCFGError):
    pass


class MarkingError(PolyCFGError):
    pass


class PreconditionError(PolyCFGError):
    pass


class NoNonBadNodeError(PolyCFGError):
    pass


class NonMemberWordError(PolyCFGError):
    def __init__(self, word, index: int | None = None):
        self.word = word
        self.index = index
        super().__init__(f"word {''.join(word)!r} is not in the language of the grammar")


class LemmaViolation(PolyCFGError):
    """A lemma conclusion failed to verify; indicates a bug, never a counterexample."""


class ZeroDenominatorError(PolyCFGError):
    pass


class NonDivisibleError(PolyCFGError):
    pass


class BadBaseError(PolyCFGError):
    pass


class NotNaturalError(PolyCFGError):
    pass


class DegenerateScaleError(PolyCFGError):
    pass


class PolynomialSyntaxError(PolyCFGError):
    pass
