"""Finite-index semantics in the topos of trees.

A closed type ``A`` denotes a family of sets ``[[A]]_1, [[A]]_2, ...`` with
restriction maps going down one index at a time. Elements are built on demand:

* ``Nat`` and ``1`` are the same at every index;
* ``|>A`` at index 1 is a singleton (``LaterUnit``), at ``i+1`` it is ``[[A]]_i``;
* a function at index ``i`` is a family of maps, one for each ``j <= i``;
* ``#A`` is a global section ``j -> [[A]]_j``, computed lazily and cached;
* a recursive type is represented through its unfolding (``FoldVal``), which
  terminates because every recursive occurrence is guarded by ``|>``.

Indices start at 1.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from glc.syntax import (
    PRIM_OPS,
    Abort,
    App,
    Arrow,
    Box,
    BoxI,
    BoxSum,
    Case,
    Fold,
    Inj,
    Lam,
    LaterApp,
    Later,
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
    desugar_iota,
    unfold_mu,
)


class SemanticError(Exception):
    """An element or index does not fit the type it is used at."""


# ---------------------------------------------------------------- elements


class SemElem:
    """Base class of elements of some ``[[A]]_i``."""


@dataclass(frozen=True)
class NatVal(SemElem):
    n: int


@dataclass(frozen=True)
class UnitVal(SemElem):
    pass


@dataclass(frozen=True)
class PairVal(SemElem):
    left: SemElem
    right: SemElem


@dataclass(frozen=True)
class InjVal(SemElem):
    index: int
    body: SemElem


@dataclass(frozen=True)
class FoldVal(SemElem):
    body: SemElem


@dataclass(frozen=True)
class LaterUnit(SemElem):
    """The single element of ``[[|>A]]_1``."""


@dataclass(frozen=True)
class LaterVal(SemElem):
    """An element of ``[[|>A]]_{i+1}``, that is, of ``[[A]]_i``."""

    body: SemElem


@dataclass(frozen=True, eq=False)
class FunVal(SemElem):
    """An element of ``[[A -> B]]_index``: maps ``(j, a)`` with ``j <= index``."""

    index: int
    fn: Callable[[int, SemElem], SemElem]

    def apply(self, j: int, a: SemElem) -> SemElem:
        if not 1 <= j <= self.index:
            raise SemanticError(f"function at index {self.index} applied at index {j}")
        return self.fn(j, a)


@dataclass(eq=False)
class GlobalSection(SemElem):
    """An element of ``[[#A]]``: one element of ``[[A]]_j`` for every ``j``.

    Sections are cached. The cache only ever stores the value the pure
    function ``fn`` returns, so concurrent readers see the same results
    whatever order they run in; the lock merely keeps the dict consistent.
    """

    fn: Callable[[int], SemElem]
    _memo: dict[int, SemElem] = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def at(self, j: int) -> SemElem:
        if j < 1:
            raise SemanticError(f"no section at index {j}")
        with self._lock:
            if j in self._memo:
                return self._memo[j]
        v = self.fn(j)
        with self._lock:
            return self._memo.setdefault(j, v)


LATER_UNIT = LaterUnit()
UNIT_VAL = UnitVal()


# ---------------------------------------------------------------- restriction


def restrict(a_type: Type, i: int, a: SemElem) -> SemElem:
    """The restriction map ``[[A]]_{i+1} -> [[A]]_i``."""
    if i < 1:
        raise SemanticError("restriction below index 1")
    match a_type, a:
        case (TNat(), NatVal()) | (TUnit(), UnitVal()):
            return a
        case Prod(l, r), PairVal(x, y):
            return PairVal(restrict(l, i, x), restrict(r, i, y))
        case Sum(l, r), InjVal(d, x):
            return InjVal(d, restrict(l if d == 1 else r, i, x))
        case Mu(), FoldVal(x):
            return FoldVal(restrict(unfold_mu(a_type), i, x))
        case Later(b), LaterVal(x):
            return LATER_UNIT if i == 1 else LaterVal(restrict(b, i - 1, x))
        case Arrow(), FunVal(index, fn):
            if index != i + 1:
                raise SemanticError(f"function at index {index} restricted from {i + 1}")
            return FunVal(i, fn)
        case Box(), GlobalSection():
            return a
    raise SemanticError(f"{a!r} is not an element of {a_type} at index {i + 1}")


def restrict_to(a_type: Type, a: SemElem, i: int, j: int) -> SemElem:
    """Compose restrictions from index ``i`` down to ``j <= i``."""
    if j > i:
        raise SemanticError(f"cannot restrict from {i} up to {j}")
    if j == i:
        return a
    match a_type, a:
        case Arrow(), FunVal(_, fn):
            return FunVal(j, fn)
        case (TNat(), _) | (TUnit(), _) | (Box(), _):
            return a
    for k in range(i - 1, j - 1, -1):
        a = restrict(a_type, k, a)
    return a


def shift(a_type: Type, a: SemElem, i: int, k: int) -> SemElem:
    """Move an element of a constant type from index ``i`` to ``k``.

    Constant types denote constant objects, so every restriction map is a
    bijection; going up inverts it.
    """
    if k <= i:
        return restrict_to(a_type, a, i, k)
    match a_type, a:
        case (TNat(), _) | (TUnit(), _) | (Box(), _):
            return a
        case Prod(l, r), PairVal(x, y):
            return PairVal(shift(l, x, i, k), shift(r, y, i, k))
        case Sum(l, r), InjVal(d, x):
            return InjVal(d, shift(l if d == 1 else r, x, i, k))
        case Mu(), FoldVal(x):
            return FoldVal(shift(unfold_mu(a_type), x, i, k))
        case Arrow(dom, cod), FunVal(_, fn):

            def lifted(j: int, x: SemElem) -> SemElem:
                m = min(j, i)
                return shift(cod, fn(m, shift(dom, x, j, m)), m, j)

            return FunVal(k, lifted)
    raise SemanticError(f"cannot shift {a!r} at non-constant type {a_type}")


def unfold_iso(a_type: Mu, i: int, a: SemElem) -> SemElem:
    """``[[mu a. A]]_i -> [[A[mu a. A / a]]]_i``."""
    if not isinstance(a, FoldVal):
        raise SemanticError(f"{a!r} is not an element of {a_type}")
    return a.body


def fold_iso(a_type: Mu, i: int, a: SemElem) -> SemElem:
    """Inverse of ``unfold_iso``."""
    return FoldVal(a)


# ---------------------------------------------------------------- environments


@dataclass(frozen=True)
class SemEnv:
    """Values for the variables of a context, all at the same index."""

    index: int
    values: Mapping[str, SemElem] = field(default_factory=dict)
    types: Mapping[str, Type] = field(default_factory=dict)

    def extend(self, x: str, a_type: Type, v: SemElem) -> "SemEnv":
        return SemEnv(self.index, {**self.values, x: v}, {**self.types, x: a_type})

    def restrict(self, j: int) -> "SemEnv":
        if j == self.index:
            return self
        vals = {x: restrict_to(self.types[x], v, self.index, j) for x, v in self.values.items()}
        return SemEnv(j, vals, self.types)


# ---------------------------------------------------------------- terms


def _need(ty: Optional[Type], what: str) -> Type:
    if ty is None:
        raise SemanticError(f"{what} lacks a type annotation; elaborate the term first")
    return ty


def _constant_env(i: int, subst, tys, env: SemEnv) -> tuple[list[str], list[Type], list[SemElem]]:
    names = [x for x, _ in subst]
    types = list(_need(tys, "explicit substitution")) if subst else []
    vals = [denote_term(u, i, env) for _, u in subst]
    return names, types, vals


def _at(i: int, names, types, vals, k: int) -> SemEnv:
    return SemEnv(
        k,
        {x: shift(a, v, i, k) for x, a, v in zip(names, types, vals)},
        dict(zip(names, types)),
    )


def denote_term(t: Term, i: int, env: Optional[SemEnv] = None) -> SemElem:
    """``[[t]]_i(env)`` for an elaborated term."""
    env = env if env is not None else SemEnv(i)
    if env.index != i:
        raise SemanticError(f"environment at index {env.index} used at index {i}")
    match t:
        case Var(x):
            if x not in env.values:
                raise SemanticError(f"free variable {x}")
            return env.values[x]
        case Unit():
            return UNIT_VAL
        case Zero():
            return NatVal(0)
        case Succ(b):
            n = 1
            while isinstance(b, Succ):
                b, n = b.body, n + 1
            v = denote_term(b, i, env)
            return NatVal(v.n + n)
        case Prim(op, l, r):
            return NatVal(PRIM_OPS[op](denote_term(l, i, env).n, denote_term(r, i, env).n))
        case Pair(l, r):
            return PairVal(denote_term(l, i, env), denote_term(r, i, env))
        case Proj(d, b):
            p = denote_term(b, i, env)
            return p.left if d == 1 else p.right
        case Lam(x, body, ty):
            dom = _need(ty, "lambda")

            def fn(j: int, a: SemElem, env=env, x=x, body=body) -> SemElem:
                return denote_term(body, j, env.restrict(j).extend(x, dom, a))

            return FunVal(i, fn)
        case App(f, a):
            return denote_term(f, i, env).apply(i, denote_term(a, i, env))
        case Fold(b):
            return FoldVal(denote_term(b, i, env))
        case Unfold(b):
            v = denote_term(b, i, env)
            if not isinstance(v, FoldVal):
                raise SemanticError("unfold of a non-fold element")
            return v.body
        case Next(b):
            return LATER_UNIT if i == 1 else LaterVal(denote_term(b, i - 1, env.restrict(i - 1)))
        case LaterApp(f, a):
            if i == 1:
                return LATER_UNIT
            fv, av = denote_term(f, i, env), denote_term(a, i, env)
            return LaterVal(fv.body.apply(i - 1, av.body))
        case Prev():
            t = desugar_iota(t)
            names, types, vals = _constant_env(i, t.subst, t.tys, env)
            v = denote_term(t.body, i + 1, _at(i, names, types, vals, i + 1))
            if not isinstance(v, LaterVal):
                raise SemanticError("body of prev does not denote a later element")
            return v.body
        case BoxI():
            t = desugar_iota(t)
            names, types, vals = _constant_env(i, t.subst, t.tys, env)
            body = t.body
            return GlobalSection(lambda j: denote_term(body, j, _at(i, names, types, vals, j)))
        case Unbox(b):
            v = denote_term(b, i, env)
            if not isinstance(v, GlobalSection):
                raise SemanticError("unbox of a non-box element")
            return v.at(i)
        case BoxSum():
            t = desugar_iota(t)
            names, types, vals = _constant_env(i, t.subst, t.tys, env)
            body = t.body

            def section(j: int) -> SemElem:
                return denote_term(body, j, _at(i, names, types, vals, j))

            tag = section(1).index
            return InjVal(tag, GlobalSection(lambda j: section(j).body))
        case Inj(d, b):
            return InjVal(d, denote_term(b, i, env))
        case Case(s, x1, b1, x2, b2, tys):
            v = denote_term(s, i, env)
            left, right = _need(tys, "case")
            if v.index == 1:
                return denote_term(b1, i, env.extend(x1, left, v.body))
            return denote_term(b2, i, env.extend(x2, right, v.body))
        case Abort():
            raise SemanticError("abort reached: the empty type has no elements")
    raise SemanticError(f"cannot denote {type(t).__name__}")


def denote(t: Term, i: int) -> SemElem:
    """``[[t]]_i`` for a closed elaborated term."""
    return denote_term(t, i, SemEnv(i))


# ---------------------------------------------------------------- equality


EXACT = "exact"
SAMPLED = "sampled"

# sections of a box are compared up to this many indices past the query index
BOX_SLACK = 2


@dataclass(frozen=True)
class SemVerdict:
    equal: bool
    mode: str
    witness: Optional[str] = None

    def __bool__(self) -> bool:
        return self.equal


def _join(mode_a: str, mode_b: str) -> str:
    return SAMPLED if SAMPLED in (mode_a, mode_b) else EXACT


SampleFn = Callable[[Type, int], Sequence[SemElem]]


def sem_equal(
    a_type: Type,
    i: int,
    a: SemElem,
    b: SemElem,
    samples: Optional[SampleFn] = None,
) -> SemVerdict:
    """Compare two elements of ``[[A]]_i``.

    First-order layers are compared exactly. Functions are compared on
    sample arguments at every ``j <= i`` and boxes on sections up to
    ``i + BOX_SLACK``; either makes the verdict ``sampled``.
    """
    if samples is None:
        from glc.samples import sample_elements

        samples = sample_elements
    return _eq(a_type, i, a, b, samples)


def _eq(a_type: Type, i: int, a: SemElem, b: SemElem, samples: SampleFn) -> SemVerdict:
    match a_type:
        case TNat() | TUnit():
            ok = a == b
            return SemVerdict(ok, EXACT, None if ok else f"{render(a_type, i, a)} /= {render(a_type, i, b)}")
        case TEmpty():
            return SemVerdict(True, EXACT)
        case Prod(l, r):
            v = _eq(l, i, a.left, b.left, samples)
            if not v:
                return v
            w = _eq(r, i, a.right, b.right, samples)
            return SemVerdict(w.equal, _join(v.mode, w.mode), w.witness)
        case Sum(l, r):
            if a.index != b.index:
                return SemVerdict(False, EXACT, f"in{a.index} /= in{b.index}")
            return _eq(l if a.index == 1 else r, i, a.body, b.body, samples)
        case Mu():
            return _eq(unfold_mu(a_type), i, a.body, b.body, samples)
        case Later(inner):
            if i == 1:
                return SemVerdict(True, EXACT)
            return _eq(inner, i - 1, a.body, b.body, samples)
        case Arrow(dom, cod):
            for j in range(1, i + 1):
                for x in samples(dom, j):
                    v = _eq(cod, j, a.apply(j, x), b.apply(j, x), samples)
                    if not v:
                        return SemVerdict(False, SAMPLED, f"at index {j} on {render(dom, j, x)}: {v.witness}")
            return SemVerdict(True, SAMPLED)
        case Box(inner):
            for j in range(1, i + BOX_SLACK + 1):
                v = _eq(inner, j, a.at(j), b.at(j), samples)
                if not v:
                    return SemVerdict(False, SAMPLED, f"section {j}: {v.witness}")
            return SemVerdict(True, SAMPLED)
    raise SemanticError(f"cannot compare at type {a_type}")


# ---------------------------------------------------------------- rendering


def _stream_like(a_type: Mu) -> bool:
    body = a_type.body
    return (
        isinstance(body, Prod)
        and isinstance(body.right, Later)
        and isinstance(body.right.body, TVar)
        and body.right.body.name == a_type.var
    )


def stream_prefix(a_type: Mu, i: int, a: SemElem) -> list[SemElem]:
    """The heads stored in an element of a guarded stream type at index ``i``."""
    out = []
    while True:
        cell = a.body
        out.append(cell.left)
        tail = cell.right
        if isinstance(tail, LaterUnit):
            return out
        a, i = tail.body, i - 1


def render(a_type: Type, i: int, a: SemElem) -> str:
    """A one-line rendering; guarded streams print as tuples of their heads."""
    match a_type, a:
        case TNat(), NatVal(n):
            return str(n)
        case TUnit(), _:
            return "()"
        case Prod(l, r), PairVal(x, y):
            return f"<{render(l, i, x)}, {render(r, i, y)}>"
        case Sum(l, r), InjVal(d, x):
            return f"in{d} {render(l if d == 1 else r, i, x)}"
        case Mu(), FoldVal(x):
            if _stream_like(a_type):
                head = a_type.body.left
                items = [render(head, i - k, h) for k, h in enumerate(stream_prefix(a_type, i, a))]
                return "(" + ", ".join(items) + ")"
            return f"fold {render(unfold_mu(a_type), i, x)}"
        case Later(), LaterUnit():
            return "*"
        case Later(b), LaterVal(x):
            return f"next {render(b, i - 1, x)}"
        case Arrow(), FunVal(index, _):
            return f"<fun@{index}>"
        case Box(b), GlobalSection():
            return "box{" + ", ".join(f"{j}: {render(b, j, a.at(j))}" for j in range(1, i + 1)) + "}"
    raise SemanticError(f"{a!r} is not an element of {a_type}")
