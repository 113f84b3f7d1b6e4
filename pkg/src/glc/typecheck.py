"""Type checking and elaboration.

Terms are checked against the typing rules with unification variables
standing in for types the surface syntax leaves implicit (lambda binders,
injections). Every binder in the output carries its type, so the elaborated
term can be re-checked by synthesis alone and interpreted denotationally.

Elaboration also removes the surface sugar: ``prev iota. t`` and friends get
their identity substitution made explicit, and ``fix x. t`` is replaced by a
fixed-point combinator built from the recursive type ``mu w. |>w -> A``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from glc.parser import SourceProgram
from glc.pretty import pretty_type
from glc.syntax import (
    EMPTY,
    NAT,
    UNIT,
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
    Loc,
    Mu,
    Next,
    Pair,
    Prev,
    Prim,
    Prod,
    Proj,
    Succ,
    Sum,
    TVar,
    Term,
    Type,
    Unbox,
    Unfold,
    Unit,
    Var,
    Zero,
    desugar_iota,
    fresh_name,
    free_type_vars,
    guarded_in,
    is_closed_type,
    is_constant,
    rebuild,
    subst_type,
    term_children,
    type_children,
    types_equal,
    unfold_mu,
    wf_type,
)

TypingCtx = Mapping[str, Type]


class TypingError(Exception):
    """A rejected term. ``kind`` names the violated rule or side condition."""

    def __init__(
        self,
        kind: str,
        message: str,
        loc: Optional[Loc] = None,
        expected: Optional[Type] = None,
        found: Optional[Type] = None,
        definition: Optional[str] = None,
    ):
        self.kind = kind
        self.message = message
        self.loc = loc
        self.expected = expected
        self.found = found
        self.definition = definition
        super().__init__(self.render())

    def render(self, filename: str = "<input>", aliases: Optional[Mapping[str, Type]] = None) -> str:
        where = f"{filename}:{self.loc}" if self.loc else filename
        text = f"{where}: [{self.kind}] {self.message}"
        if self.expected is not None or self.found is not None:
            parts = []
            if self.expected is not None:
                parts.append(f"expected {pretty_type(self.expected, aliases)}")
            if self.found is not None:
                parts.append(f"found {pretty_type(self.found, aliases)}")
            text += " (" + ", ".join(parts) + ")"
        return text

    def record(self, filename: str = "<input>", aliases: Optional[Mapping[str, Type]] = None) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "location": f"{filename}:{self.loc}" if self.loc else filename,
                "message": self.message,
                "definition": self.definition,
                "expected": pretty_type(self.expected, aliases) if self.expected is not None else None,
                "found": pretty_type(self.found, aliases) if self.found is not None else None,
            }
        )


@dataclass(frozen=True, eq=False)
class Meta(Type):
    """Unification variable; only ever lives inside the elaborator."""

    id: int

    def __str__(self) -> str:
        return f"?{self.id}"


class _Mismatch(Exception):
    pass


class Elaborator:
    def __init__(self):
        self.solution: dict[int, Type] = {}
        self.ids = itertools.count(1)
        self.pending: list[Callable[[], bool]] = []
        self.constancy: list[tuple[str, Type, Optional[Loc], str]] = []

    # -- unification

    def fresh(self) -> Meta:
        return Meta(next(self.ids))

    def resolve(self, a: Type) -> Type:
        while isinstance(a, Meta) and a.id in self.solution:
            a = self.solution[a.id]
        return a

    def zonk(self, a: Type) -> Type:
        a = self.resolve(a)
        match a:
            case Meta():
                return a
            case Prod(l, r):
                return Prod(self.zonk(l), self.zonk(r))
            case Sum(l, r):
                return Sum(self.zonk(l), self.zonk(r))
            case Arrow(d, c):
                return Arrow(self.zonk(d), self.zonk(c))
            case Later(b):
                return Later(self.zonk(b))
            case Box(b):
                return Box(self.zonk(b))
            case Mu(v, b):
                return Mu(v, self.zonk(b))
        return a

    def has_metas(self, a: Type) -> bool:
        a = self.resolve(a)
        if isinstance(a, Meta):
            return True
        return any(self.has_metas(c) for c in type_children(a))

    def unify(self, expected: Type, found: Type, loc: Optional[Loc], kind: str = "mismatch", what: str = ""):
        try:
            self._unify(expected, found)
        except _Mismatch:
            msg = what or "type mismatch"
            raise TypingError(kind, msg, loc, self.zonk(expected), self.zonk(found)) from None
        self.flush()

    def _occurs(self, m: Meta, a: Type) -> bool:
        a = self.resolve(a)
        if isinstance(a, Meta):
            return a.id == m.id
        return any(self._occurs(m, c) for c in type_children(a))

    def _unify(self, a: Type, b: Type):
        a, b = self.resolve(a), self.resolve(b)
        # syntactically equal types (the common case on elaborated input) unify trivially
        if a is b or a == b:
            return
        if isinstance(a, Meta) or isinstance(b, Meta):
            if isinstance(a, Meta) and isinstance(b, Meta) and a.id == b.id:
                return
            m, other = (a, b) if isinstance(a, Meta) else (b, a)
            if self._occurs(m, other):
                raise _Mismatch()
            self.solution[m.id] = other
            return
        match a, b:
            case TVar(x), TVar(y):
                if x != y:
                    raise _Mismatch()
                return
            case Mu(x, _), Mu(y, _):
                za, zb = self.zonk(a), self.zonk(b)
                if not self.has_metas(za) and not self.has_metas(zb):
                    if not types_equal(za, zb):
                        raise _Mismatch()
                    return
                v = fresh_name("t", free_type_vars(za) | free_type_vars(zb) | {x, y})
                self._unify(subst_type(za.body, x, TVar(v)), subst_type(zb.body, y, TVar(v)))
                return
        if type(a) is not type(b):
            raise _Mismatch()
        for ca, cb in zip(type_children(a), type_children(b)):
            self._unify(ca, cb)

    def defer(self, attempt: Callable[[], bool]):
        if not attempt():
            self.pending.append(attempt)

    def flush(self):
        progress = True
        while progress and self.pending:
            progress = False
            waiting = self.pending
            self.pending = []
            for attempt in waiting:
                if attempt():
                    progress = True
                else:
                    self.pending.append(attempt)

    # -- shape requirements with readable diagnostics

    def expect_shape(self, found: Type, shape: Type, kind: str, what: str, loc):
        r = self.resolve(found)
        if not isinstance(r, Meta) and type(r) is not type(shape):
            raise TypingError(kind, what, loc, None, self.zonk(found))
        self.unify(shape, found, loc, what=what)

    # -- terms

    def infer(self, ctx: TypingCtx, t: Term) -> tuple[Term, Type]:
        return self.check(ctx, t, None)

    def check(self, ctx: TypingCtx, t: Term, expected: Optional[Type]) -> tuple[Term, Type]:
        out, ty = self._elab(ctx, t, expected)
        if expected is not None:
            self.unify(expected, ty, t.loc)
        return out, ty

    def _elab(self, ctx: TypingCtx, t: Term, expected: Optional[Type]) -> tuple[Term, Type]:
        exp = self.resolve(expected) if expected is not None else None
        loc = t.loc
        match t:
            case Var(name):
                if name not in ctx:
                    raise TypingError("unbound-variable", f"unbound variable {name!r}", loc)
                return t, ctx[name]
            case Unit():
                return t, UNIT
            case Zero():
                return t, NAT
            case Succ(b):
                b2, _ = self.check(ctx, b, NAT)
                return Succ(b2, loc), NAT
            case Prim(op, l, r):
                l2, _ = self.check(ctx, l, NAT)
                r2, _ = self.check(ctx, r, NAT)
                return Prim(op, l2, r2, loc), NAT
            case Pair(l, r):
                el = er = None
                if isinstance(exp, Prod):
                    el, er = exp.left, exp.right
                l2, lt = self.check(ctx, l, el)
                r2, rt = self.check(ctx, r, er)
                return Pair(l2, r2, loc), Prod(lt, rt)
            case Proj(d, b):
                b2, bt = self.infer(ctx, b)
                a1, a2 = self.fresh(), self.fresh()
                self.expect_shape(bt, Prod(a1, a2), "not-a-product", "projection from a non-product", loc)
                return Proj(d, b2, loc), (a1 if d == 1 else a2)
            case Lam(x, b, ann):
                dom, cod = None, None
                if isinstance(exp, Arrow):
                    dom, cod = exp.dom, exp.cod
                if ann is not None:
                    if dom is not None:
                        self.unify(dom, ann, loc)
                    dom = ann
                if dom is None:
                    dom = self.fresh()
                b2, bt = self.check({**ctx, x: dom}, b, cod)
                return Lam(x, b2, dom, loc), Arrow(dom, bt)
            case App(f, a):
                f2, ft = self.infer(ctx, f)
                r = self.resolve(ft)
                if isinstance(r, Arrow):
                    dom, cod = r.dom, r.cod
                else:
                    dom, cod = self.fresh(), self.fresh()
                    self.expect_shape(ft, Arrow(dom, cod), "not-a-function", "application of a non-function", loc)
                a2, _ = self.check(ctx, a, dom)
                return App(f2, a2, loc), cod
            case Fold(b, ann):
                mu = exp if exp is not None else self.fresh()
                if ann is not None:
                    self.unify(mu, ann, loc)
                inner = self.fresh()
                self._require_mu(mu, loc, lambda m: self.unify(unfold_mu(m), inner, loc))
                b2, _ = self.check(ctx, b, inner)
                return Fold(b2, mu, loc), mu
            case Unfold(b):
                b2, bt = self.infer(ctx, b)
                out = self.fresh()
                self._require_mu(bt, loc, lambda m: self.unify(out, unfold_mu(m), loc))
                return Unfold(b2, loc), out
            case Next(b):
                inner = exp.body if isinstance(exp, Later) else None
                b2, bt = self.check(ctx, b, inner)
                return Next(b2, loc), Later(bt)
            case LaterApp(f, a):
                f2, ft = self.infer(ctx, f)
                dom, cod = self.fresh(), self.fresh()
                self.expect_shape(ft, Later(Arrow(dom, cod)), "not-a-later-function", "left of <*> must have type |>(A -> B)", loc)
                a2, _ = self.check(ctx, a, Later(dom))
                return LaterApp(f2, a2, loc), Later(cod)
            case Prev() | BoxI() | BoxSum():
                return self._explicit(ctx, desugar_iota(t), exp)
            case Unbox(b):
                b2, bt = self.infer(ctx, b)
                inner = self.fresh()
                self.expect_shape(bt, Box(inner), "not-a-box", "unbox of a non-boxed term", loc)
                return Unbox(b2, loc), inner
            case Inj(d, b, ann):
                st = ann if ann is not None else (exp if isinstance(exp, Sum) else Sum(self.fresh(), self.fresh()))
                if ann is not None and exp is not None:
                    self.unify(exp, ann, loc)
                self.expect_shape(st, Sum(self.fresh(), self.fresh()), "mismatch", "injection into a non-sum", loc)
                s = self.resolve(st)
                b2, _ = self.check(ctx, b, s.left if d == 1 else s.right)
                return Inj(d, b2, st, loc), st
            case Case(s, x1, b1, x2, b2):
                s2, stt = self.infer(ctx, s)
                a1, a2 = self.fresh(), self.fresh()
                self.expect_shape(stt, Sum(a1, a2), "not-a-sum", "case analysis of a non-sum", loc)
                c1, t1 = self.check({**ctx, x1: a1}, b1, exp)
                c2, _ = self.check({**ctx, x2: a2}, b2, t1)
                return Case(s2, x1, c1, x2, c2, (a1, a2), loc), t1
            case Abort(b, ann):
                b2, _ = self.check(ctx, b, EMPTY)
                res = ann if ann is not None else (exp if exp is not None else self.fresh())
                return Abort(b2, res, loc), res
            case Fix(x, b, ann):
                a = ann if ann is not None else (exp if exp is not None else self.fresh())
                b2, _ = self.check({**ctx, x: Later(a)}, b, a)
                return Fix(x, b2, a, loc), a
        raise TypingError("internal", f"unknown term {t!r}", loc)

    def _require_mu(self, ty: Type, loc, then: Callable[[Mu], None]):
        def attempt() -> bool:
            r = self.resolve(ty)
            if isinstance(r, Meta):
                return False
            if not isinstance(r, Mu):
                raise TypingError("not-a-recursive-type", "fold/unfold at a non-recursive type", loc, None, self.zonk(r))
            then(self.zonk(r))
            return True

        self.defer(attempt)

    def _explicit(self, ctx: TypingCtx, t, exp: Optional[Type]) -> tuple[Term, Type]:
        loc = t.loc
        inner_ctx: dict[str, Type] = {}
        subst = []
        tys = []
        for x, u in t.subst:
            u2, ut = self.infer(ctx, u)
            inner_ctx[x] = ut
            subst.append((x, u2))
            tys.append(ut)
            self.constancy.append((x, ut, u.loc or loc, type(t).__name__))
        match t:
            case Prev():
                body, bt = self.check(inner_ctx, t.body, Later(exp) if exp is not None else None)
                res = self.fresh()
                self.expect_shape(bt, Later(res), "not-a-later", "body of prev must have a |> type", loc)
                return Prev(tuple(subst), body, False, tuple(tys), loc), res
            case BoxI():
                body, bt = self.check(inner_ctx, t.body, exp.body if isinstance(exp, Box) else None)
                return BoxI(tuple(subst), body, False, tuple(tys), loc), Box(bt)
            case BoxSum():
                body, bt = self.infer(inner_ctx, t.body)
                b1, b2 = self.fresh(), self.fresh()
                self.expect_shape(bt, Sum(b1, b2), "not-a-sum", "body of boxplus must have a sum type", loc)
                return BoxSum(tuple(subst), body, False, tuple(tys), loc), Sum(Box(b1), Box(b2))
        raise AssertionError(t)

    def finish(self, t: Term) -> Term:
        """Solve leftovers, default unconstrained types to 1, check side conditions, expand fix."""
        self.flush()
        if self.pending:
            # every remaining constraint waits on an undetermined recursive type
            raise TypingError("ambiguous", "cannot determine the recursive type of a fold/unfold", t.loc)
        self._default_metas(t)
        for x, ty, loc, form in self.constancy:
            zt = self.zonk(ty)
            if not is_constant(zt):
                raise TypingError(
                    "nonconstant-context",
                    f"{form.lower()} substitution {x} must have a constant type (side condition: A constant)",
                    loc,
                    None,
                    zt,
                )
        return self._finish_term(t)

    def _default_metas(self, t: Term):
        def visit_type(a):
            a = self.resolve(a)
            if isinstance(a, Meta):
                self.solution[a.id] = UNIT
                return
            for c in type_children(a):
                visit_type(c)

        for _, ty, _, _ in self.constancy:
            visit_type(ty)
        stack = [t]
        while stack:
            u = stack.pop()
            for ann in _annotations(u):
                visit_type(ann)
            stack.extend(term_children(u))

    def _finish_term(self, t: Term) -> Term:
        kids = tuple(self._finish_term(c) for c in term_children(t))
        t = rebuild(t, kids)
        z = self.zonk
        match t:
            case Lam(x, b, ann):
                return Lam(x, b, z(ann), t.loc)
            case Fold(b, ann):
                return Fold(b, z(ann), t.loc)
            case Inj(d, b, ann):
                return Inj(d, b, z(ann), t.loc)
            case Abort(b, ann):
                return Abort(b, z(ann), t.loc)
            case Case(s, x1, b1, x2, b2, tys):
                return Case(s, x1, b1, x2, b2, (z(tys[0]), z(tys[1])), t.loc)
            case Prev(s, b) | BoxI(s, b) | BoxSum(s, b):
                return type(t)(s, b, False, tuple(z(a) for a in t.tys), t.loc)
            case Fix(x, b, ann):
                return elaborate_fix(x, z(ann), b)
        return t


def _annotations(t: Term) -> list[Type]:
    match t:
        case Lam() | Fold() | Inj() | Abort() | Fix():
            return [t.ty] if t.ty is not None else []
        case Case() | Prev() | BoxI() | BoxSum():
            return list(t.tys or ())
    return []



# ---------------------------------------------------------------- fix


def theta(a: Type) -> Term:
    """Closed fixed-point combinator at type ``(|>a -> a) -> a``.

    With ``W = mu w. |>w -> a`` and
    ``h = \\y. f ((next (\\v. unfold v) <*> y) <*> next y)`` it is
    ``\\f. h (next (fold h))``.
    """
    w = fresh_name("w", free_type_vars(a))
    big_w = Mu(w, Arrow(Later(TVar(w)), a))
    f_ty = Arrow(Later(a), a)

    def h() -> Term:
        unf = Next(Lam("v", Unfold(Var("v")), big_w))
        arg = LaterApp(LaterApp(unf, Var("y")), Next(Var("y")))
        return Lam("y", App(Var("f"), arg), Later(big_w))

    return Lam("f", App(h(), Next(Fold(h(), big_w))), f_ty)


def elaborate_fix(x: str, a: Type, body: Term) -> Term:
    """``fix x. body`` at type ``a`` as ``theta(a) (\\x. body)``."""
    return App(theta(a), Lam(x, body, Later(a)))


# ---------------------------------------------------------------- entry points


def _check_ctx(gamma: TypingCtx):
    for x, a in gamma.items():
        if not is_closed_type(a) or not wf_type((), a):
            raise TypingError("ill-formed-type", f"context type of {x} is not a closed well-formed type", None, None, a)


def elaborate(gamma: TypingCtx, t: Term, expected: Optional[Type] = None) -> tuple[Term, Type]:
    """Check ``t`` (against ``expected`` if given); return the annotated term and its type."""
    _check_ctx(gamma)
    el = Elaborator()
    out, ty = el.check(dict(gamma), t, expected)
    out = el.finish(out)
    return out, el.zonk(ty)


def infer(gamma: TypingCtx, t: Term) -> Type:
    """The type of ``t`` in ``gamma``; raises TypingError on rejection."""
    return elaborate(gamma, t)[1]


def check(gamma: TypingCtx, t: Term, a: Type) -> Term:
    out, ty = elaborate(gamma, t, a)
    if not types_equal(ty, a):
        raise TypingError("mismatch", "type mismatch", t.loc, a, ty)
    return out


def diagnose_type(a: Type) -> Optional[TypingError]:
    """Explain why a declared type is not closed and well formed, if it is not."""

    def walk(b: Type, bound: frozenset[str]) -> Optional[TypingError]:
        match b:
            case TVar(name):
                if name not in bound:
                    return TypingError("ill-formed-type", f"unknown type or type variable {name!r}", b.loc)
            case Mu(v, body):
                if not guarded_in(v, body):
                    return TypingError("unguarded-mu", f"type variable {v} is not guarded by |> in mu {v}. ...", b.loc)
                return walk(body, bound | {v})
            case Box(body):
                if not is_closed_type(body):
                    return TypingError("ill-formed-type", "the body of # must be a closed type", b.loc)
                return walk(body, frozenset())
        for c in type_children(b):
            err = walk(c, bound)
            if err:
                return err
        return None

    return walk(a, frozenset())


# ---------------------------------------------------------------- programs


@dataclass
class CheckedDefinition:
    name: str
    type: Type
    term: Term
    source: Term
    loc: Loc


@dataclass
class CheckedProgram:
    definitions: dict[str, CheckedDefinition] = field(default_factory=dict)
    aliases: dict[str, Type] = field(default_factory=dict)

    def term(self, name: str) -> Term:
        return self.definitions[name].term

    def type(self, name: str) -> Type:
        return self.definitions[name].type


def inline(t: Term, env: Mapping[str, Term], bound: frozenset[str] = frozenset()) -> Term:
    """Replace free references to definitions by their (closed) bodies.

    Unlike substitution this goes straight through ``iota`` sugar: definitions
    are closed, so they never join an implicit substitution list.
    """
    if not (t.fv - bound) & env.keys():
        return t
    match t:
        case Var(name):
            return env[name] if name in env and name not in bound else t
        case Lam(x, _) | Fix(x, _):
            return rebuild(t, (inline(t.body, env, bound | {x}),))
        case Case(s, x1, b1, x2, b2):
            return rebuild(t, (inline(s, env, bound), inline(b1, env, bound | {x1}), inline(b2, env, bound | {x2})))
        case Prev(s, b, iota) | BoxI(s, b, iota) | BoxSum(s, b, iota):
            inner = bound if iota else bound | {x for x, _ in s}
            kids = tuple(inline(u, env, bound) for _, u in s) + (inline(b, env, inner),)
            return rebuild(t, kids)
    return rebuild(t, tuple(inline(c, env, bound) for c in term_children(t)))


def check_definition(
    name: str, declared: Type, body: Term, env: Mapping[str, Term], loc: Optional[Loc] = None
) -> Term:
    err = diagnose_type(declared)
    if err is not None:
        err.definition = name
        err.loc = err.loc or loc
        raise err
    try:
        term = check({}, inline(body, env), declared)
        # the elaborated term must synthesize the declared type on its own
        again = infer({}, term)
    except TypingError as e:
        e.definition = name
        if e.loc is None:
            e.loc = loc
        raise
    if not types_equal(again, declared):
        raise TypingError("mismatch", f"elaborated {name} changed type", loc, declared, again, name)
    return term


def check_program(p: SourceProgram, base: Optional[CheckedProgram] = None) -> CheckedProgram:
    """Check every definition in order; later ones may use earlier ones.

    ``base`` supplies definitions already in scope (the prelude); the
    program's own definitions shadow them.
    """
    out = CheckedProgram(aliases={**(base.aliases if base else {}), **p.aliases})
    env: dict[str, Term] = {}
    if base is not None:
        out.definitions.update(base.definitions)
        env.update({n: d.term for n, d in base.definitions.items()})
    for d in p.definitions:
        term = check_definition(d.name, d.type, d.body, env, d.loc)
        out.definitions[d.name] = CheckedDefinition(d.name, d.type, term, d.body, d.loc)
        env[d.name] = term
    return out
