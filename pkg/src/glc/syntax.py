"""Abstract syntax of guarded lambda-calculus types and terms.

Types and terms are immutable trees. Variables are named; substitution is
capture-avoiding and renames binders with primes (``y`` becomes ``y'``).
Source locations and type annotations ride along on nodes but take no part
in equality, so two terms that differ only in where they were parsed (or in
what the type checker wrote onto them) compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Union


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


# ---------------------------------------------------------------- types


class Type:
    """Base class of type expressions."""

    def __str__(self) -> str:
        from glc.pretty import pretty_type

        return pretty_type(self)


@dataclass(frozen=True)
class TVar(Type):
    name: str
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TUnit(Type):
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TNat(Type):
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TEmpty(Type):
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Prod(Type):
    left: Type
    right: Type
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Sum(Type):
    left: Type
    right: Type
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Arrow(Type):
    dom: Type
    cod: Type
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Mu(Type):
    var: str
    body: Type
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Later(Type):
    body: Type
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Box(Type):
    body: Type
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


NAT = TNat()
UNIT = TUnit()
EMPTY = TEmpty()


def type_children(a: Type) -> tuple[Type, ...]:
    match a:
        case Prod(l, r) | Sum(l, r):
            return (l, r)
        case Arrow(d, c):
            return (d, c)
        case Mu(_, b) | Later(b) | Box(b):
            return (b,)
    return ()


def free_type_vars(a: Type) -> frozenset[str]:
    match a:
        case TVar(name):
            return frozenset((name,))
        case Mu(v, body):
            return free_type_vars(body) - {v}
    out: frozenset[str] = frozenset()
    for c in type_children(a):
        out |= free_type_vars(c)
    return out


def is_closed_type(a: Type) -> bool:
    return not free_type_vars(a)


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    name = base + "'"
    while name in avoid:
        name += "'"
    return name


def subst_type(a: Type, var: str, b: Type) -> Type:
    """Capture-avoiding ``a[b/var]``."""
    if var not in free_type_vars(a):
        return a
    match a:
        case TVar(name):
            return b if name == var else a
        case Prod(l, r):
            return Prod(subst_type(l, var, b), subst_type(r, var, b), a.loc)
        case Sum(l, r):
            return Sum(subst_type(l, var, b), subst_type(r, var, b), a.loc)
        case Arrow(d, c):
            return Arrow(subst_type(d, var, b), subst_type(c, var, b), a.loc)
        case Later(body):
            return Later(subst_type(body, var, b), a.loc)
        case Box(body):
            return Box(subst_type(body, var, b), a.loc)
        case Mu(v, body):
            if v in free_type_vars(b):
                nv = fresh_name(v, free_type_vars(b) | free_type_vars(body))
                body = subst_type(body, v, TVar(nv))
                v = nv
            return Mu(v, subst_type(body, var, b), a.loc)
    return a


@lru_cache(maxsize=4096)
def unfold_mu(a: Mu) -> Type:
    """``A[mu a.A / a]`` for ``a = mu a.A``."""
    return subst_type(a.body, a.var, a)


def types_equal(a: Type, b: Type) -> bool:
    """Structural equality up to renaming of mu-binders."""
    return _teq(a, b, {}, {}, 0)


def _teq(a: Type, b: Type, ea: dict, eb: dict, depth: int) -> bool:
    match a, b:
        case TVar(x), TVar(y):
            return ea.get(x, x) == eb.get(y, y) and (x in ea) == (y in eb)
        case Mu(x, ba), Mu(y, bb):
            key = f"#{depth}"
            return _teq(ba, bb, {**ea, x: key}, {**eb, y: key}, depth + 1)
        case (TUnit(), TUnit()) | (TNat(), TNat()) | (TEmpty(), TEmpty()):
            return True
    if type(a) is not type(b):
        return False
    ca, cb = type_children(a), type_children(b)
    if not ca:
        return a == b
    return all(_teq(x, y, ea, eb, depth) for x, y in zip(ca, cb))


def guarded_in(alpha: str, a: Type) -> bool:
    """True iff every free occurrence of ``alpha`` in ``a`` sits under a Later."""
    match a:
        case TVar(name):
            return name != alpha
        case Later(_):
            return True
        case Mu(v, body):
            return v == alpha or guarded_in(alpha, body)
    return all(guarded_in(alpha, c) for c in type_children(a))


def is_constant(a: Type) -> bool:
    """True iff every Later in the closed type ``a`` is beneath some Box."""
    if not is_closed_type(a):
        raise ValueError(f"is_constant expects a closed type, got {a}")
    return _constant(a)


def _constant(a: Type) -> bool:
    match a:
        case Later(_):
            return False
        case Box(_):
            return True
    return all(_constant(c) for c in type_children(a))


def wf_type(nabla: Iterable[str], a: Type) -> bool:
    """Derivability of ``nabla |- a`` by the type formation rules."""
    nabla = frozenset(nabla)
    match a:
        case TVar(name):
            return name in nabla
        case Mu(v, body):
            return guarded_in(v, body) and wf_type(nabla | {v}, body)
        case Box(body):
            return wf_type((), body)
    return all(wf_type(nabla, c) for c in type_children(a))


def usize(a: Type) -> int:
    """Unguarded size: node count where every Later subtree counts 0."""
    match a:
        case Later(_):
            return 0
    return 1 + sum(usize(c) for c in type_children(a))


def box_depth(a: Type, join=min) -> int:
    """Box depth. Products, sums and arrows combine their parts with ``join``.

    The default ``min`` is the textbook definition. The logical relation's
    termination measure passes ``join=max``, the variant under which no
    clause of the relation increases depth.
    """
    match a:
        case Box(body):
            return box_depth(body, join) + 1
        case Mu(_, body) | Later(body):
            return box_depth(body, join)
        case Prod(l, r) | Sum(l, r) | Arrow(l, r):
            return join(box_depth(l, join), box_depth(r, join))
    return 0


def is_total_inhabited_syntactic(a: Type) -> bool:
    """Conservative total-and-inhabited check; False means "not known"."""
    if not is_closed_type(a):
        raise ValueError(f"expected a closed type, got {a}")
    return _ti(a, frozenset())


def _ti(a: Type, rec: frozenset[str], negative: bool = False) -> bool:
    match a:
        case TUnit() | TNat():
            return True
        case TEmpty():
            return False
        case TVar(name):
            # recursion variables count as inhabited but may not be exponents
            return name in rec and not negative
        case Prod(l, r) | Sum(l, r):
            return _ti(l, rec, negative) and _ti(r, rec, negative)
        case Arrow(d, c):
            return _ti(d, rec, True) and _ti(c, rec, negative)
        case Later(body):
            return _ti(body, rec, negative)
        case Mu(v, body):
            return _ti(body, rec | {v}, negative)
    return False


# ---------------------------------------------------------------- terms


class Term:
    """Base class of terms. ``fv`` is computed once per node."""

    def __str__(self) -> str:
        from glc.pretty import pretty_term

        return pretty_term(self)

    @property
    def fv(self) -> frozenset[str]:
        # cached by hand: functools.cached_property takes a lock on every read
        d = self.__dict__
        out = d.get("_fv")
        if out is None:
            out = d["_fv"] = _free_vars(self)
        return out


Bindings = tuple[tuple[str, Term], ...]


@dataclass(frozen=True, eq=True)
class Var(Term):
    name: str
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Unit(Term):
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Zero(Term):
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Succ(Term):
    body: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Proj(Term):
    index: int
    body: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Lam(Term):
    var: str
    body: Term
    # argument type, written by the type checker
    ty: Optional[Type] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Fold(Term):
    body: Term
    ty: Optional[Type] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Unfold(Term):
    body: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Next(Term):
    body: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Prev(Term):
    """``prev [x1 <- t1, ...]. body``; ``iota`` marks the unelaborated ``prev iota. body``."""

    subst: Bindings
    body: Term
    iota: bool = False
    tys: Optional[tuple[Type, ...]] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BoxI(Term):
    subst: Bindings
    body: Term
    iota: bool = False
    tys: Optional[tuple[Type, ...]] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Unbox(Term):
    body: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class LaterApp(Term):
    fn: Term
    arg: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Inj(Term):
    index: int
    body: Term
    # the whole sum type
    ty: Optional[Type] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Case(Term):
    scrut: Term
    var1: str
    branch1: Term
    var2: str
    branch2: Term
    tys: Optional[tuple[Type, Type]] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Abort(Term):
    body: Term
    ty: Optional[Type] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BoxSum(Term):
    subst: Bindings
    body: Term
    iota: bool = False
    tys: Optional[tuple[Type, ...]] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Fix(Term):
    """Surface ``fix x. t``; the type checker replaces it by a Theta encoding."""

    var: str
    body: Term
    ty: Optional[Type] = field(default=None, compare=False, repr=False)
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Prim(Term):
    """Built-in numeral arithmetic: ``op`` is ``"+"`` or ``"*"``."""

    op: str
    left: Term
    right: Term
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


Explicit = Union[Prev, BoxI, BoxSum]
PRIM_OPS = {"+": lambda a, b: a + b, "*": lambda a, b: a * b}


def term_children(t: Term) -> tuple[Term, ...]:
    """Immediate subterms, subst-list terms before bodies."""
    match t:
        case Succ(b) | Proj(_, b) | Fold(b) | Unfold(b) | Next(b) | Unbox(b) | Inj(_, b) | Abort(b):
            return (b,)
        case Lam(_, b) | Fix(_, b):
            return (b,)
        case Pair(l, r) | App(l, r) | LaterApp(l, r) | Prim(_, l, r):
            return (l, r)
        case Prev(s, b) | BoxI(s, b) | BoxSum(s, b):
            return tuple(u for _, u in s) + (b,)
        case Case(s, _, b1, _, b2):
            return (s, b1, b2)
    return ()


def _free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(name):
            return frozenset((name,))
        case Lam(x, b) | Fix(x, b):
            return b.fv - {x}
        case Prev(s, b, iota) | BoxI(s, b, iota) | BoxSum(s, b, iota):
            if iota:
                return b.fv
            out = b.fv - {x for x, _ in s}
            for _, u in s:
                out |= u.fv
            return out
        case Case(s, x1, b1, x2, b2):
            return s.fv | (b1.fv - {x1}) | (b2.fv - {x2})
    out: frozenset[str] = frozenset()
    for c in term_children(t):
        out |= c.fv
    return out


def numeral(n: int) -> Term:
    t: Term = Zero()
    for _ in range(n):
        t = Succ(t)
    return t


def as_numeral(t: Term) -> Optional[int]:
    n = 0
    while isinstance(t, Succ):
        t, n = t.body, n + 1
    return n if isinstance(t, Zero) else None


def is_value(t: Term) -> bool:
    """Value forms of closed terms, including injections."""
    match t:
        case Unit() | Pair() | Lam() | Fold() | BoxI() | Next() | Inj():
            return True
        case Zero() | Succ():
            return as_numeral(t) is not None
    return False


def desugar_iota(t: Explicit) -> Explicit:
    """Turn ``prev iota. b`` (and box/boxplus) into the explicit identity substitution."""
    if not t.iota:
        return t
    subst = tuple((x, Var(x)) for x in sorted(t.body.fv))
    return type(t)(subst, t.body, False, t.tys, t.loc)


def _rebuild_explicit(t: Explicit, subst: Bindings, body: Term) -> Explicit:
    return type(t)(subst, body, False, t.tys, t.loc)


def subst_term(t: Term, bindings: Mapping[str, Term]) -> Term:
    """Capture-avoiding simultaneous substitution ``t[bindings]``.

    Substituting into ``prev iota. b`` (likewise box/boxplus) first makes the
    identity substitution explicit, so the substituted terms land in the
    substitution list and never under the binder.
    """
    if len(bindings) == 1:
        ((x, u),) = bindings.items()
        return _subst1(t, x, u, u.fv)
    return _subst_many(t, bindings)


def _subst1(t: Term, x: str, u: Term, ufv: frozenset[str]) -> Term:
    """``t[u/x]``: the single-variable case, which beta and case steps use."""
    if x not in t.fv:
        return t
    cls = type(t)
    if cls is Var:
        return u
    if cls is App:
        return App(_subst1(t.fn, x, u, ufv), _subst1(t.arg, x, u, ufv), t.loc)
    if cls is LaterApp:
        return LaterApp(_subst1(t.fn, x, u, ufv), _subst1(t.arg, x, u, ufv), t.loc)
    if cls is Pair:
        return Pair(_subst1(t.left, x, u, ufv), _subst1(t.right, x, u, ufv), t.loc)
    if cls is Prim:
        return Prim(t.op, _subst1(t.left, x, u, ufv), _subst1(t.right, x, u, ufv), t.loc)
    if cls is Lam:
        y, body = _subst_under(t.var, t.body, x, u, ufv)
        return Lam(y, body, t.ty, t.loc)
    if cls is Next:
        return Next(_subst1(t.body, x, u, ufv), t.loc)
    if cls is Unfold:
        return Unfold(_subst1(t.body, x, u, ufv), t.loc)
    if cls is Fold:
        return Fold(_subst1(t.body, x, u, ufv), t.ty, t.loc)
    if cls is Proj:
        return Proj(t.index, _subst1(t.body, x, u, ufv), t.loc)
    if cls is Succ:
        return Succ(_subst1(t.body, x, u, ufv), t.loc)
    if cls is Unbox:
        return Unbox(_subst1(t.body, x, u, ufv), t.loc)
    if cls is Case:
        y1, b1 = _subst_under(t.var1, t.branch1, x, u, ufv)
        y2, b2 = _subst_under(t.var2, t.branch2, x, u, ufv)
        return Case(_subst1(t.scrut, x, u, ufv), y1, b1, y2, b2, t.tys, t.loc)
    return _subst_many(t, {x: u})


def _subst_under(y: str, body: Term, x: str, u: Term, ufv: frozenset[str]) -> tuple[str, Term]:
    """Substitute ``u`` for ``x`` in ``body`` under the binder ``y``, renaming ``y`` to avoid capture."""
    if y == x or x not in body.fv:
        return y, body
    if y in ufv:
        ny = fresh_name(y, ufv | body.fv | {x})
        body = _subst1(body, y, Var(ny), frozenset((ny,)))
        y = ny
    return y, _subst1(body, x, u, ufv)


def _subst_many(t: Term, bindings: Mapping[str, Term]) -> Term:
    live = {x: u for x, u in bindings.items() if x in t.fv}
    if not live:
        return t
    match t:
        case Var(name):
            return live[name]
        case Lam(x, b):
            x2, b2 = _under_binder(x, b, live)
            return Lam(x2, b2, t.ty, t.loc)
        case Fix(x, b):
            x2, b2 = _under_binder(x, b, live)
            return Fix(x2, b2, t.ty, t.loc)
        case Case(s, x1, b1, x2, b2):
            y1, c1 = _under_binder(x1, b1, live)
            y2, c2 = _under_binder(x2, b2, live)
            return Case(subst_term(s, live), y1, c1, y2, c2, t.tys, t.loc)
        case Prev() | BoxI() | BoxSum():
            t = desugar_iota(t)
            subst = tuple((x, subst_term(u, live)) for x, u in t.subst)
            bound = [x for x, _ in t.subst]
            inner = {x: u for x, u in live.items() if x not in bound and x in t.body.fv}
            body = t.body
            if inner:
                # only reachable for open (ill-typed) bodies
                subst, body = _rename_many(subst, body, inner)
                body = subst_term(body, inner)
            return _rebuild_explicit(t, subst, body)
        case Succ(b):
            return Succ(subst_term(b, live), t.loc)
        case Proj(d, b):
            return Proj(d, subst_term(b, live), t.loc)
        case Fold(b):
            return Fold(subst_term(b, live), t.ty, t.loc)
        case Unfold(b):
            return Unfold(subst_term(b, live), t.loc)
        case Next(b):
            return Next(subst_term(b, live), t.loc)
        case Unbox(b):
            return Unbox(subst_term(b, live), t.loc)
        case Inj(d, b):
            return Inj(d, subst_term(b, live), t.ty, t.loc)
        case Abort(b):
            return Abort(subst_term(b, live), t.ty, t.loc)
        case Pair(l, r):
            return Pair(subst_term(l, live), subst_term(r, live), t.loc)
        case App(l, r):
            return App(subst_term(l, live), subst_term(r, live), t.loc)
        case LaterApp(l, r):
            return LaterApp(subst_term(l, live), subst_term(r, live), t.loc)
        case Prim(op, l, r):
            return Prim(op, subst_term(l, live), subst_term(r, live), t.loc)
    raise TypeError(f"unknown term node {t!r}")


def _range_fv(live: Mapping[str, Term], body: Term) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    for x, u in live.items():
        if x in body.fv:
            out |= u.fv
    return out


def _under_binder(x: str, body: Term, live: Mapping[str, Term]) -> tuple[str, Term]:
    inner = {y: u for y, u in live.items() if y != x and y in body.fv}
    if not inner:
        return x, body
    danger = _range_fv(inner, body)
    if x in danger:
        nx = fresh_name(x, danger | body.fv | set(inner))
        body = subst_term(body, {x: Var(nx)})
        x = nx
    return x, subst_term(body, inner)


def _rename_many(subst: Bindings, body: Term, inner: Mapping[str, Term]):
    danger = _range_fv(inner, body)
    renames: dict[str, Term] = {}
    new_subst = []
    for x, u in subst:
        if x in danger:
            nx = fresh_name(x, danger | body.fv | set(inner) | {y for y, _ in subst})
            renames[x] = Var(nx)
            x = nx
        new_subst.append((x, u))
    if renames:
        body = subst_term(body, renames)
    return tuple(new_subst), body


def alpha_equal(t: Term, u: Term) -> bool:
    """Equality of terms up to renaming of bound variables.

    ``prev iota. t`` equals its explicit form ``prev [x <- x, ...]. t``.
    """
    return _aeq(t, u, {}, {}, [0])


def _aeq(t: Term, u: Term, et: dict, eu: dict, ctr: list) -> bool:
    if type(t) is not type(u):
        return False

    def bind(xs, ys):
        keys = []
        for _ in xs:
            ctr[0] += 1
            keys.append(f"#{ctr[0]}")
        return {**et, **dict(zip(xs, keys))}, {**eu, **dict(zip(ys, keys))}

    match t, u:
        case Var(x), Var(y):
            return et.get(x, x) == eu.get(y, y) and (x in et) == (y in eu)
        case (Lam(x, b), Lam(y, c)) | (Fix(x, b), Fix(y, c)):
            e1, e2 = bind([x], [y])
            return _aeq(b, c, e1, e2, ctr)
        case Case(s1, x1, b1, x2, b2), Case(s2, y1, c1, y2, c2):
            if not _aeq(s1, s2, et, eu, ctr):
                return False
            e1, e2 = bind([x1], [y1])
            f1, f2 = bind([x2], [y2])
            return _aeq(b1, c1, e1, e2, ctr) and _aeq(b2, c2, f1, f2, ctr)
        case (Prev(s1, b1, i1), Prev(s2, b2, i2)) | (BoxI(s1, b1, i1), BoxI(s2, b2, i2)) | (
            BoxSum(s1, b1, i1),
            BoxSum(s2, b2, i2),
        ):
            if i1 != i2:
                return _aeq(desugar_iota(t), desugar_iota(u), et, eu, ctr)
            if len(s1) != len(s2):
                return False
            if i1:
                return _aeq(b1, b2, et, eu, ctr)
            if not all(_aeq(a, b, et, eu, ctr) for (_, a), (_, b) in zip(s1, s2)):
                return False
            e1, e2 = bind([x for x, _ in s1], [y for y, _ in s2])
            return _aeq(b1, b2, e1, e2, ctr)
        case Proj(d1, b1), Proj(d2, b2):
            return d1 == d2 and _aeq(b1, b2, et, eu, ctr)
        case Inj(d1, b1), Inj(d2, b2):
            return d1 == d2 and _aeq(b1, b2, et, eu, ctr)
        case Prim(o1, l1, r1), Prim(o2, l2, r2):
            return o1 == o2 and _aeq(l1, l2, et, eu, ctr) and _aeq(r1, r2, et, eu, ctr)
    ct, cu = term_children(t), term_children(u)
    return len(ct) == len(cu) and all(_aeq(a, b, et, eu, ctr) for a, b in zip(ct, cu))


def term_size(t: Term) -> int:
    return 1 + sum(term_size(c) for c in term_children(t))


def rebuild(t: Term, children: tuple[Term, ...]) -> Term:
    """Copy of ``t`` with its immediate subterms replaced (order of ``term_children``)."""
    match t:
        case Succ() | Fold() | Unfold() | Next() | Unbox() | Abort() | Proj() | Inj() | Lam() | Fix():
            from dataclasses import replace

            return replace(t, body=children[0])
        case Pair(_, _):
            return Pair(children[0], children[1], t.loc)
        case App(_, _):
            return App(children[0], children[1], t.loc)
        case LaterApp(_, _):
            return LaterApp(children[0], children[1], t.loc)
        case Prim(op, _, _):
            return Prim(op, children[0], children[1], t.loc)
        case Prev(s, _, iota) | BoxI(s, _, iota) | BoxSum(s, _, iota):
            subst = tuple((x, u) for (x, _), u in zip(s, children[:-1]))
            return type(t)(subst, children[-1], iota, t.tys, t.loc)
        case Case(_, x1, _, x2, _):
            return Case(children[0], x1, children[1], x2, children[2], t.tys, t.loc)
    return t
