"""Deterministic call-by-name small-step evaluation of closed terms.

A term is split into an evaluation context and a redex; the redex is
contracted and plugged back. Evaluation contexts are

    E ::= .  | succ E | fst E | snd E | E t | unfold E | prev E | unbox E
        | E <*> t | v <*> E | case E of ... | abort E | boxplus E
        | E + t | n + E | E * t | n * E

where ``prev E`` and ``boxplus E`` only apply to the empty substitution
(a non-empty one is itself a redex). ``evaluate`` does not restart from the
root after every step: it keeps the context as a stack of frames and resumes
at the hole, which visits exactly the same sequence of terms as iterating
``step``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Union

from glc.syntax import (
    PRIM_OPS,
    Abort,
    App,
    Box,
    BoxI,
    BoxSum,
    Case,
    Fix,
    Fold,
    Inj,
    Lam,
    LaterApp,
    Next,
    Pair,
    Prev,
    Prim,
    Proj,
    Succ,
    Sum,
    Term,
    Unbox,
    Unfold,
    Var,
    as_numeral,
    desugar_iota,
    is_value,
    numeral,
    subst_term,
)

DEFAULT_BUDGET = 10**6


def default_budget() -> int:
    """The step budget, overridable through the ``GLC_BUDGET`` variable."""
    raw = os.environ.get("GLC_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


class BudgetExceeded(Exception):
    def __init__(self, budget: int, term: Optional[Term] = None):
        self.budget = budget
        self.term = term
        super().__init__(f"no value within {budget} steps")


class StuckError(Exception):
    def __init__(self, term: Term, reason: str):
        self.term = term
        self.reason = reason
        super().__init__(f"stuck: {reason}")


# ---------------------------------------------------------------- frames


@dataclass(frozen=True)
class Frame:
    """One layer of an evaluation context; ``plug`` fills its hole."""

    kind: str
    node: Term

    def plug(self, t: Term) -> Term:
        n = self.node
        match self.kind:
            case "succ":
                return Succ(t, n.loc)
            case "proj":
                return Proj(n.index, t, n.loc)
            case "app":
                return App(t, n.arg, n.loc)
            case "unfold":
                return Unfold(t, n.loc)
            case "prev":
                return Prev((), t, False, n.tys, n.loc)
            case "unbox":
                return Unbox(t, n.loc)
            case "lapp-fn":
                return LaterApp(t, n.arg, n.loc)
            case "lapp-arg":
                return LaterApp(n.fn, t, n.loc)
            case "case":
                return Case(t, n.var1, n.branch1, n.var2, n.branch2, n.tys, n.loc)
            case "abort":
                return Abort(t, n.ty, n.loc)
            case "boxplus":
                return BoxSum((), t, False, n.tys, n.loc)
            case "prim-left":
                return Prim(n.op, t, n.right, n.loc)
            case "prim-right":
                return Prim(n.op, n.left, t, n.loc)
        raise AssertionError(self.kind)


def plug(frames: list[Frame] | tuple[Frame, ...], t: Term) -> Term:
    """``E[t]`` for the context given outermost frame first."""
    for f in reversed(frames):
        t = f.plug(t)
    return t


# ---------------------------------------------------------------- results


@dataclass(frozen=True)
class Decomposition:
    frames: tuple[Frame, ...]
    redex: Term


@dataclass(frozen=True)
class Stepped:
    term: Term


@dataclass(frozen=True)
class IsValue:
    value: Term


@dataclass(frozen=True)
class Stuck:
    term: Term
    reason: str


StepResult = Union[Stepped, IsValue, Stuck]


# ---------------------------------------------------------------- decomposition


def _descend(t: Term, frames: list[Frame]) -> Union[Term, Stuck, None]:
    """Walk from ``t`` down to its redex, pushing frames.

    Returns the redex, a Stuck, or None when ``t`` itself is a value.
    """
    while True:
        match t:
            case Succ(b):
                if as_numeral(b) is not None:
                    return None
                frames.append(Frame("succ", t))
                t = b
            case Proj(_, b):
                if is_value(b):
                    return t if isinstance(b, Pair) else Stuck(t, "projection from a non-pair")
                frames.append(Frame("proj", t))
                t = b
            case App(f, _):
                if is_value(f):
                    return t if isinstance(f, Lam) else Stuck(t, "application of a non-function")
                frames.append(Frame("app", t))
                t = f
            case Unfold(b):
                if is_value(b):
                    return t if isinstance(b, Fold) else Stuck(t, "unfold of a non-fold")
                frames.append(Frame("unfold", t))
                t = b
            case Prev(s, b, iota):
                if s or iota:
                    return t
                if is_value(b):
                    return t if isinstance(b, Next) else Stuck(t, "prev of a non-next value")
                frames.append(Frame("prev", t))
                t = b
            case Unbox(b):
                if is_value(b):
                    return t if isinstance(b, BoxI) else Stuck(t, "unbox of a non-box")
                frames.append(Frame("unbox", t))
                t = b
            case LaterApp(f, a):
                if not is_value(f):
                    frames.append(Frame("lapp-fn", t))
                    t = f
                elif not is_value(a):
                    frames.append(Frame("lapp-arg", t))
                    t = a
                elif isinstance(f, Next) and isinstance(a, Next):
                    return t
                else:
                    return Stuck(t, "<*> of values that are not both next")
            case Case(s):
                if is_value(s):
                    return t if isinstance(s, Inj) else Stuck(t, "case of a non-injection")
                frames.append(Frame("case", t))
                t = s
            case Abort(b):
                if is_value(b):
                    return Stuck(t, "abort of a value")
                frames.append(Frame("abort", t))
                t = b
            case BoxSum(s, b, iota):
                if s or iota:
                    return t
                if is_value(b):
                    return t if isinstance(b, Inj) else Stuck(t, "boxplus of a non-injection")
                frames.append(Frame("boxplus", t))
                t = b
            case Prim(_, l, r):
                if not is_value(l):
                    frames.append(Frame("prim-left", t))
                    t = l
                elif as_numeral(l) is None:
                    return Stuck(t, "arithmetic on a non-numeral")
                elif not is_value(r):
                    frames.append(Frame("prim-right", t))
                    t = r
                elif as_numeral(r) is None:
                    return Stuck(t, "arithmetic on a non-numeral")
                else:
                    return t
            case Var(name):
                return Stuck(t, f"free variable {name}")
            case Fix():
                return Stuck(t, "unelaborated fix")
            case _:
                if is_value(t):
                    return None
                return Stuck(t, f"no rule for {type(t).__name__}")


def decompose(t: Term) -> Union[Decomposition, IsValue, Stuck]:
    """Split a closed term into its unique evaluation context and redex."""
    frames: list[Frame] = []
    found = _descend(t, frames)
    if found is None:
        if frames:
            raise AssertionError("descent stopped at a value below the root")
        return IsValue(t)
    if isinstance(found, Stuck):
        return found
    return Decomposition(tuple(frames), found)


def contract(r: Term) -> Term:
    """Apply the reduction rule whose left-hand side ``r`` matches."""
    match r:
        case Proj(d, Pair(l, rt)):
            return l if d == 1 else rt
        case App(Lam(x, b), a):
            return subst_term(b, {x: a})
        case Unfold(Fold(u)):
            return u
        case Prev() if r.subst or r.iota:
            e = desugar_iota(r)
            return Prev((), subst_term(e.body, dict(e.subst)), False, (), r.loc)
        case Prev(_, Next(u)):
            return u
        case Unbox(BoxI() as b):
            e = desugar_iota(b)
            return subst_term(e.body, dict(e.subst))
        case LaterApp(Next(f), Next(a)):
            return Next(App(f, a, r.loc), r.loc)
        case Case(Inj(d, u), x1, b1, x2, b2):
            return subst_term(b1, {x1: u}) if d == 1 else subst_term(b2, {x2: u})
        case BoxSum() if r.subst or r.iota:
            e = desugar_iota(r)
            return BoxSum((), subst_term(e.body, dict(e.subst)), False, (), r.loc)
        case BoxSum(_, Inj(d, u, ty)):
            boxed = Sum(Box(ty.left), Box(ty.right)) if isinstance(ty, Sum) else None
            return Inj(d, BoxI((), u, False, ()), boxed, r.loc)
        case Prim(op, l, rt):
            return numeral(PRIM_OPS[op](as_numeral(l), as_numeral(rt)))
    raise AssertionError(f"not a redex: {r!r}")


def step(t: Term) -> StepResult:
    """One call-by-name step."""
    d = decompose(t)
    if isinstance(d, Decomposition):
        return Stepped(plug(d.frames, contract(d.redex)))
    return d


# ---------------------------------------------------------------- evaluation


@dataclass
class Trace:
    """The terms visited on the way to a value, initial term first."""

    terms: list[Term] = field(default_factory=list)
    steps: int = 0
    budget: int = DEFAULT_BUDGET

    @property
    def value(self) -> Term:
        return self.terms[-1]


def run(
    t: Term,
    budget: Optional[int] = None,
    on_step: Optional[Callable[[Callable[[], Term]], None]] = None,
) -> tuple[Term, int]:
    """Evaluate ``t`` to a value; return it with the number of steps taken.

    ``on_step`` is called after every step with a thunk that rebuilds the
    whole current term (rebuilding costs time, so it is only done on demand).
    """
    budget = default_budget() if budget is None else budget
    frames: list[Frame] = []
    focus = t
    steps = 0
    while True:
        found = _descend(focus, frames)
        if found is None:
            if not frames:
                return focus, steps
            focus = frames.pop().plug(focus)
            continue
        if isinstance(found, Stuck):
            raise StuckError(plug(frames, found.term), found.reason)
        if steps >= budget:
            raise BudgetExceeded(budget, plug(frames, found))
        focus = contract(found)
        steps += 1
        if on_step is not None:
            snapshot = (tuple(frames), focus)
            on_step(lambda: plug(*snapshot))


def evaluate(t: Term, budget: Optional[int] = None) -> Term:
    """The value of the closed term ``t``."""
    return run(t, budget)[0]


def trace(t: Term, budget: Optional[int] = None) -> Trace:
    """Evaluate ``t`` keeping every intermediate term."""
    budget = default_budget() if budget is None else budget
    out = Trace([t], 0, budget)
    _, out.steps = run(t, budget, lambda thunk: out.terms.append(thunk()))
    return out


# ---------------------------------------------------------------- streams


class _Meter:
    def __init__(self, budget: Optional[int]):
        self.budget = default_budget() if budget is None else budget
        self.used = 0

    def eval(self, t: Term) -> Term:
        try:
            v, n = run(t, self.budget - self.used)
        except BudgetExceeded as e:
            raise BudgetExceeded(self.budget, e.term) from None
        self.used += n
        return v


def _guarded_elements(s: Term, meter: _Meter) -> Iterator[int]:
    while True:
        cell = meter.eval(Unfold(s))
        if not isinstance(cell, Pair):
            raise StuckError(cell, "guarded stream did not unfold to a pair")
        head = as_numeral(meter.eval(cell.left))
        if head is None:
            raise StuckError(cell.left, "stream head is not a numeral")
        yield head
        later = meter.eval(cell.right)
        if not isinstance(later, Next):
            raise StuckError(later, "stream tail is not next")
        s = later.body


def force_guarded_stream(s: Term, n: int, budget: Optional[int] = None) -> list[int]:
    """The first ``n`` elements of a closed guarded stream.

    Element ``k+1`` is the head of ``prev (tlg s_k)``; rather than rebuilding
    that term from scratch each time, the tail is continued from the value
    the previous element already computed, which is where evaluating
    ``prev (tlg s_k)`` would pass through anyway.
    """
    meter = _Meter(budget)
    out: list[int] = []
    if n <= 0:
        return out
    for x in _guarded_elements(s, meter):
        out.append(x)
        if len(out) == n:
            return out
    return out


def force_coinductive_stream(s: Term, n: int, budget: Optional[int] = None) -> list[int]:
    """The first ``n`` elements of a closed term of type ``#StrG``.

    ``hd (tl^k s)`` equals the k-th element of the guarded stream
    ``unbox s``, so the guarded forcing does the work.
    """
    meter = _Meter(budget)
    if n <= 0:
        return []
    inner = meter.eval(Unbox(s))
    out: list[int] = []
    for x in _guarded_elements(inner, meter):
        out.append(x)
        if len(out) == n:
            return out
    return out


# ---------------------------------------------------------------- determinism oracle


def is_redex(t: Term) -> bool:
    """Does ``t`` match the left-hand side of some reduction rule?"""
    match t:
        case Proj(_, Pair()) | App(Lam(), _) | Unfold(Fold()) | Unbox(BoxI()):
            return True
        case Prev(s, b, iota):
            return bool(s) or iota or isinstance(b, Next)
        case BoxSum(s, b, iota):
            return bool(s) or iota or isinstance(b, Inj)
        case LaterApp(Next(), Next()):
            return True
        case Case(Inj()):
            return True
        case Prim(_, l, r):
            return as_numeral(l) is not None and as_numeral(r) is not None
    return False


def _holes(t: Term) -> list[tuple[str, Term]]:
    """Every context frame the grammar allows around ``t``, read syntactically."""
    match t:
        case Succ(b):
            return [("succ", b)]
        case Proj(_, b):
            return [("proj", b)]
        case App(f, _):
            return [("app", f)]
        case Unfold(b):
            return [("unfold", b)]
        case Prev((), b, False):
            return [("prev", b)]
        case Unbox(b):
            return [("unbox", b)]
        case LaterApp(f, a):
            return [("lapp-fn", f)] + ([("lapp-arg", a)] if is_value(f) else [])
        case Case(s):
            return [("case", s)]
        case Abort(b):
            return [("abort", b)]
        case BoxSum((), b, False):
            return [("boxplus", b)]
        case Prim(_, l, r):
            return [("prim-left", l)] + ([("prim-right", r)] if as_numeral(l) is not None else [])
    return []


def all_decompositions(t: Term) -> list[tuple[tuple[str, ...], Term]]:
    """Every way of writing ``t`` as ``E[r]`` with ``r`` a redex.

    Independent of ``decompose``: it tries every frame the context grammar
    permits instead of following one fixed strategy.
    """
    out: list[tuple[tuple[str, ...], Term]] = []
    if is_redex(t):
        out.append(((), t))
    for kind, sub in _holes(t):
        for ctx, r in all_decompositions(sub):
            out.append(((kind,) + ctx, r))
    return out
