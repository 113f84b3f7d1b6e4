"""Deterministic closed sample terms of a given type.

Functions and boxes cannot be compared exhaustively, so both the semantic
equality and the logical relation quantify over a small fixed family of
closed terms: numerals, pairs and injections of smaller samples, constant
and identity functions, ``next`` and ``box`` of samples, streams of the form
``fix x. fold <n, x>``, and any corpus definition whose declared type matches.
"""

from __future__ import annotations

import functools
import itertools
from typing import Mapping, Optional, Sequence

from glc.syntax import (
    Arrow,
    Box,
    BoxI,
    Fix,
    Fold,
    Inj,
    Lam,
    Later,
    Mu,
    Next,
    Pair,
    Prod,
    Succ,
    Sum,
    TEmpty,
    TNat,
    TUnit,
    TVar,
    Term,
    Type,
    Unit,
    Var,
    is_closed_type,
    numeral,
    subst_type,
    types_equal,
)

DEFAULT_BUDGET = 4

_corpus: dict[str, tuple[Type, Term]] = {}


def register_corpus(definitions: Mapping[str, tuple[Type, Term]]) -> None:
    """Make named closed terms available as samples of their declared type."""
    _corpus.update(definitions)
    _cached_terms.cache_clear()
    _cached_elements.cache_clear()


def _corpus_of(a: Type) -> list[Term]:
    return [t for ty, t in _corpus.values() if types_equal(ty, a)]


def _raw(a: Type, budget: int, depth: int, hole: Optional[tuple[Type, str]]) -> list[Term]:
    """Unelaborated candidates; ``hole`` maps ``|>M`` to a fix-bound variable."""
    if hole is not None and types_equal(a, Later(hole[0])):
        return [Var(hole[1])]
    match a:
        case TNat():
            return [numeral(n) for n in (1, 0, 2, 3, 4)[:budget]]
        case TUnit():
            return [Unit()]
        case TEmpty():
            return []
        case Prod(l, r):
            ls = _raw(l, 2, depth - 1, hole)
            rs = _raw(r, 2, depth - 1, hole)
            return [Pair(x, y) for x, y in itertools.product(ls, rs)][:budget]
        case Sum(l, r):
            ls = _raw(l, 2, depth - 1, hole)
            rs = _raw(r, 2, depth - 1, hole)
            return ([Inj(1, x) for x in ls] + [Inj(2, y) for y in rs])[:budget]
        case Arrow(dom, cod):
            out: list[Term] = []
            if types_equal(dom, cod):
                out.append(Lam("x", Var("x")))
            if isinstance(dom, TNat) and isinstance(cod, TNat):
                out.append(Lam("x", Succ(Var("x"))))
            if depth > 0:
                out += [Lam("x", b) for b in _raw(cod, 2, depth - 1, hole)]
            return out[:budget]
        case Later(b):
            if depth <= 0:
                return []
            return [Next(x) for x in _raw(b, budget, depth - 1, hole)] + [Next(x) for x in _corpus_of(b)]
        case Box(b):
            if depth <= 0:
                return []
            inner = _raw(b, budget, depth - 1, None) + _corpus_of(b)
            return [BoxI((), x) for x in inner]
        case Mu(v, body):
            if hole is not None or depth <= 0:
                return []
            unfolded = subst_type(body, v, a)
            name = "r"
            cells = _raw(unfolded, budget, depth - 1, (a, name))
            return [Fix(name, Fold(c)) for c in cells]
        case TVar():
            return []
    return []


def _elaborate(t: Term, a: Type) -> Optional[Term]:
    from glc.typecheck import TypingError, check

    try:
        return check({}, t, a)
    except TypingError:
        return None


@functools.lru_cache(maxsize=None)
def _cached_terms(a: Type, budget: int) -> tuple[Term, ...]:
    out: list[Term] = []
    for t in _raw(a, budget, 3, None):
        e = _elaborate(t, a)
        if e is not None:
            out.append(e)
    seen = len(out)
    out += _corpus_of(a)
    # keep every generated sample plus up to ``budget`` corpus entries
    return tuple(out[: seen + budget])


def sample_terms(a: Type, budget: int = DEFAULT_BUDGET) -> Sequence[Term]:
    """Closed elaborated terms of the closed type ``a``."""
    if not is_closed_type(a):
        raise ValueError("samples exist only for closed types")
    return _cached_terms(a, budget)


@functools.lru_cache(maxsize=None)
def _cached_elements(a: Type, j: int, budget: int):
    from glc.denote import denote

    return tuple(denote(t, j) for t in _cached_terms(a, budget))


def sample_elements(a: Type, j: int, budget: int = DEFAULT_BUDGET):
    """Denotations at index ``j`` of ``sample_terms(a)``."""
    return _cached_elements(a, j, budget)


def sample_pairs(a: Type, j: int, budget: int = DEFAULT_BUDGET):
    """``(element, term)`` pairs related by construction (denotation of the term)."""
    return list(zip(sample_elements(a, j, budget), sample_terms(a, budget)))
