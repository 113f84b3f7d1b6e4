"""Pretty-printing of types and terms in the concrete syntax.

Output always re-parses to the same tree; parentheses are inserted only
where precedence demands them.
"""

from __future__ import annotations

from typing import Mapping, Optional

from glc.syntax import (
    Abort,
    App,
    Arrow,
    Box,
    BoxI,
    BoxSum,
    Case,
    Fix,
    Fold,
    Inj,
    Lam,
    Later,
    LaterApp,
    Mu,
    Next,
    Pair,
    Prev,
    Prim,
    Prod,
    Proj,
    Succ,
    Sum,
    TEmpty,
    TNat,
    TUnit,
    TVar,
    Term,
    Type,
    Unbox,
    Unfold,
    Unit,
    Var,
    Zero,
    as_numeral,
    types_equal,
)

# type levels: 0 arrow, 1 sum, 2 product, 3 unary, 4 atom
# term levels: 0 binder, 1 <*>, 2 +, 3 *, 4 unary keyword, 5 application, 6 atom


def pretty_type(a: Type, aliases: Optional[Mapping[str, Type]] = None) -> str:
    return _ty(a, 0, aliases or {})


def _paren(s: str, inner: int, outer: int) -> str:
    return f"({s})" if inner < outer else s


def _ty(a: Type, level: int, aliases: Mapping[str, Type]) -> str:
    for name, b in aliases.items():
        if types_equal(a, b):
            return name
    match a:
        case TVar(name):
            return name
        case TUnit():
            return "1"
        case TNat():
            return "Nat"
        case TEmpty():
            return "0"
        case Arrow(d, c):
            return _paren(f"{_ty(d, 1, aliases)} -> {_ty(c, 0, aliases)}", 0, level)
        case Sum(l, r):
            return _paren(f"{_ty(l, 2, aliases)} + {_ty(r, 1, aliases)}", 1, level)
        case Prod(l, r):
            return _paren(f"{_ty(l, 3, aliases)} * {_ty(r, 2, aliases)}", 2, level)
        case Later(b):
            return _paren(f"|>{_ty(b, 3, aliases)}", 3, level)
        case Box(b):
            return _paren(f"#{_ty(b, 3, aliases)}", 3, level)
        case Mu(v, b):
            return _paren(f"mu {v}. {_ty(b, 0, aliases)}", 0, level)
    return repr(a)


_UNARY = {
    Succ: "succ",
    Fold: "fold",
    Unfold: "unfold",
    Next: "next",
    Unbox: "unbox",
    Abort: "abort",
}


def pretty_term(t: Term) -> str:
    return _tm(t, 0)


def _subst(kw: str, s, body: Term, iota: bool) -> tuple[str, int]:
    if iota:
        return f"{kw} iota. {_tm(body, 0)}", 0
    if not s:
        return f"{kw} {_tm(body, 4)}", 4
    items = ", ".join(f"{x} <- {_tm(u, 0)}" for x, u in s)
    return f"{kw} [{items}]. {_tm(body, 0)}", 0


def _tm(t: Term, level: int) -> str:
    n = as_numeral(t)
    if n is not None:
        return str(n)
    match t:
        case Var(name):
            return name
        case Unit():
            return "()"
        case Pair(l, r):
            return f"<{_tm(l, 0)}, {_tm(r, 0)}>"
        case Lam(x, b):
            return _paren(f"\\{x}. {_tm(b, 0)}", 0, level)
        case Fix(x, b):
            return _paren(f"fix {x}. {_tm(b, 0)}", 0, level)
        case Case(s, x1, b1, x2, b2):
            text = f"case {_tm(s, 0)} of {x1}. {_tm(b1, 0)} ; {x2}. {_tm(b2, 0)}"
            return _paren(text, 0, level)
        case Prev(s, b, iota):
            text, lv = _subst("prev", s, b, iota)
            return _paren(text, lv, level)
        case BoxI(s, b, iota):
            text, lv = _subst("box", s, b, iota)
            return _paren(text, lv, level)
        case BoxSum(s, b, iota):
            text, lv = _subst("boxplus", s, b, iota)
            return _paren(text, lv, level)
        case LaterApp(f, a):
            return _paren(f"{_tm(f, 1)} <*> {_tm(a, 2)}", 1, level)
        case Prim("+", l, r):
            return _paren(f"{_tm(l, 2)} + {_tm(r, 3)}", 2, level)
        case Prim("*", l, r):
            return _paren(f"{_tm(l, 3)} * {_tm(r, 4)}", 3, level)
        case App(f, a):
            return _paren(f"{_tm(f, 5)} {_tm(a, 6)}", 5, level)
        case Proj(d, b):
            kw = "fst" if d == 1 else "snd"
            return _paren(f"{kw} {_tm(b, 4)}", 4, level)
        case Inj(d, b):
            return _paren(f"in{d} {_tm(b, 4)}", 4, level)
        case Zero():
            return "0"
    kw = _UNARY.get(type(t))
    if kw is None:
        raise ValueError(f"cannot print {t!r}")
    (body,) = [getattr(t, "body")]
    return _paren(f"{kw} {_tm(body, 4)}", 4, level)
