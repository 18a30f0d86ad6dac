"""
Error hierarchy. Every failure the library signals derives from FuzzyOptError
so controllers can map them to exit codes in one place.
"""
from __future__ import annotations


class FuzzyOptError(Exception):
    """Base class for all library errors."""


# ── fuzzy core ────────────────────────────────────────────────────────────────

class OutOfUniverse(FuzzyOptError, ValueError):
    pass


class UnresolvedVariable(FuzzyOptError, KeyError):
    pass


class EmptyInput(FuzzyOptError, ValueError):
    pass


class AllZeroWeights(FuzzyOptError, ValueError):
    pass


class DegenerateSet(FuzzyOptError, ValueError):
    pass


# ── constraints / evaluation ──────────────────────────────────────────────────

class UnboundVariable(FuzzyOptError, KeyError):
    pass


class NonPositiveFactor(FuzzyOptError, ValueError):
    pass


class MissingAttribute(FuzzyOptError, KeyError):
    pass


class SchemaMismatch(FuzzyOptError, ValueError):
    pass


class UnknownPosition(FuzzyOptError, KeyError):
    pass


class KnowledgeBaseError(FuzzyOptError, ValueError):
    pass


# ── domain / optimizer ────────────────────────────────────────────────────────

class NoFeasibleSwap(FuzzyOptError):
    """Signalled no-op of a repair operator; never fatal."""


class Unsatisfiable(FuzzyOptError, ValueError):
    pass


class InvalidInitial(FuzzyOptError, ValueError):
    pass


class InfeasibleOffspring(FuzzyOptError):
    pass


# ── consistency ───────────────────────────────────────────────────────────────

class IncompatibleStructure(FuzzyOptError, ValueError):
    pass


class RefusedInconsistent(FuzzyOptError):
    pass


class RefusedNotImproving(FuzzyOptError):
    pass


class UnknownPair(FuzzyOptError, KeyError):
    pass
