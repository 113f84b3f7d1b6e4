"""Behavioural differential equations compiled to guarded stream programs.

A stream function ``f`` of arity ``k`` is specified by two equations

    hd (f s1 .. sk) = h         over the heads x1..xk
    tl (f s1 .. sk) = t         over heads x_i, streams y_i, tails z_i and f

written in a spec file as

    bde plus(2) { head = x1 + x2; tail = plus(z1, z2); }

In tail position a base-sorted expression ``e`` stands for the stream
``rho(e)`` (``e`` followed by zeros), so ``times(x1, z2)`` is the product of
``rho(x1)`` with the tail of the second argument.

The compiled guarded function is

    fix f. \\s1 .. sk. cons h[hdg s_i / x_i] T(t)

where the translation ``T`` of a stream expression has type ``|>StrG``:

    T(e) = next (rho e[hdg s_i / x_i])   for base-sorted e
    T(y_i) = next s_i
    T(z_i) = tlg s_i
    T(f(e1..ek)) = f <*> T(e1) .. <*> T(ek)
    T(g(e1..em)) = next g <*> T(e1) .. <*> T(em)   for an earlier spec g
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence, Union

from glc.evaluator import force_coinductive_stream, force_guarded_stream
from glc.syntax import (
    App,
    Arrow,
    Box,
    BoxI,
    Fix,
    Lam,
    LaterApp,
    Next,
    Prev,
    Prim,
    Term,
    Type,
    Unbox,
    Var,
    numeral,
)

BASE = "base"
STREAM = "stream"


class SpecError(Exception):
    """A spec that does not parse or does not sort-check."""

    def __init__(self, message: str, line: int = 0, col: int = 0, name: Optional[str] = None):
        self.message = message
        self.line = line
        self.col = col
        self.name = name
        super().__init__(f"{line}:{col}: {message}" if line else message)


# ---------------------------------------------------------------- expressions


@dataclass(frozen=True)
class BVar:
    name: str
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BNum:
    value: int


@dataclass(frozen=True)
class BOp:
    op: str
    left: "BExpr"
    right: "BExpr"


@dataclass(frozen=True)
class BCall:
    fn: str
    args: tuple["BExpr", ...]
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


BExpr = Union[BVar, BNum, BOp, BCall]


@dataclass(frozen=True)
class BdeSpec:
    name: str
    arity: int
    head: BExpr
    tail: BExpr
    line: int = field(default=0, compare=False)


def show(e: BExpr) -> str:
    match e:
        case BVar(name):
            return name
        case BNum(v):
            return str(v)
        case BOp(op, l, r):
            return f"({show(l)} {op} {show(r)})"
        case BCall(fn, args):
            return f"{fn}({', '.join(show(a) for a in args)})"
    raise TypeError(e)


# ---------------------------------------------------------------- parsing


_TOKEN = re.compile(r"\s+|--[^\n]*|(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z_0-9']*)|(?P<sym>[(){};,=+*])")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokens(text: str) -> list[_Tok]:
    out, pos, line, start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SpecError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        if m.lastgroup:
            out.append(_Tok(m.lastgroup, m.group(), line, pos - start + 1))
        for k, ch in enumerate(m.group()):
            if ch == "\n":
                line, start = line + 1, pos + k + 1
        pos = m.end()
    out.append(_Tok("eof", "", line, pos - start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self, text: Optional[str] = None, kind: Optional[str] = None) -> _Tok:
        t = self.peek()
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            found = repr(t.text) if t.text else "end of input"
            raise SpecError(f"expected {want}, found {found}", t.line, t.col)
        self.pos += 1
        return t

    def specs(self) -> list[BdeSpec]:
        out = []
        while self.peek().kind != "eof":
            out.append(self.spec())
        return out

    def spec(self) -> BdeSpec:
        kw = self.take("bde")
        name = self.take(kind="id").text
        self.take("(")
        arity = int(self.take(kind="num").text)
        self.take(")")
        self.take("{")
        self.take("head")
        self.take("=")
        head = self.expr()
        self.take(";")
        self.take("tail")
        self.take("=")
        tail = self.expr()
        self.take(";")
        self.take("}")
        return BdeSpec(name, arity, head, tail, kw.line)

    def expr(self) -> BExpr:
        e = self.product()
        while self.peek().text == "+":
            self.take()
            e = BOp("+", e, self.product())
        return e

    def product(self) -> BExpr:
        e = self.atom()
        while self.peek().text == "*":
            self.take()
            e = BOp("*", e, self.atom())
        return e

    def atom(self) -> BExpr:
        t = self.peek()
        if t.kind == "num":
            self.take()
            return BNum(int(t.text))
        if t.text == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        name = self.take(kind="id")
        if self.peek().text != "(":
            if re.fullmatch(r"[xyz][0-9]+", name.text):
                return BVar(name.text, name.line, name.col)
            # any other bare name is a call of an arity-0 stream function
            return BCall(name.text, (), name.line, name.col)
        self.take("(")
        if self.peek().text == ")":
            self.take()
            return BCall(name.text, (), name.line, name.col)
        args = [self.expr()]
        while self.peek().text == ",":
            self.take()
            args.append(self.expr())
        self.take(")")
        return BCall(name.text, tuple(args), name.line, name.col)


def parse_specs(text: str) -> list[BdeSpec]:
    """Parse a file of ``bde`` blocks."""
    return _Parser(text).specs()


# ---------------------------------------------------------------- validation


def _var_role(name: str, k: int) -> Optional[tuple[str, int]]:
    m = re.fullmatch(r"([xyz])([1-9][0-9]*)", name)
    if m is None or int(m.group(2)) > k:
        return None
    return m.group(1), int(m.group(2))


def _sort(e: BExpr, spec: BdeSpec, arities: Mapping[str, int], in_head: bool) -> str:
    where = "head" if in_head else "tail"
    match e:
        case BNum():
            return BASE
        case BVar(name, line, col):
            role = _var_role(name, spec.arity)
            if role is None:
                raise SpecError(f"unknown variable {name} in the {where} of {spec.name}", line, col, name)
            if role[0] == "x":
                return BASE
            if in_head:
                raise SpecError(f"the head of {spec.name} may only use heads x1..x{spec.arity}, not {name}", line, col, name)
            return STREAM
        case BOp(op, l, r):
            for side in (l, r):
                if _sort(side, spec, arities, in_head) != BASE:
                    raise SpecError(f"operands of {op} must be base-sorted, not {show(side)}", name=show(side))
            return BASE
        case BCall(fn, args, line, col):
            if in_head:
                raise SpecError(f"the head of {spec.name} may not call the stream function {fn}", line, col, fn)
            if fn == spec.name:
                want = spec.arity
            elif fn in arities:
                want = arities[fn]
            else:
                raise SpecError(f"unknown function symbol {fn}", line, col, fn)
            if len(args) != want:
                raise SpecError(f"{fn} takes {want} arguments, given {len(args)}", line, col, fn)
            for a in args:
                _sort(a, spec, arities, in_head)
            return STREAM
    raise TypeError(e)


def validate(spec: BdeSpec, arities: Mapping[str, int] = {}) -> None:
    """Sort-check a spec; ``arities`` lists the earlier compiled specs."""
    if spec.arity < 0:
        raise SpecError(f"negative arity for {spec.name}", spec.line, 0, spec.name)
    _sort(spec.head, spec, arities, True)
    _sort(spec.tail, spec, arities, False)


# ---------------------------------------------------------------- compilation


def stream_type(k: int, str_g: Type) -> Type:
    out = str_g
    for _ in range(k):
        out = Arrow(str_g, out)
    return out


def _app(f: Term, *args: Term) -> Term:
    for a in args:
        f = App(f, a)
    return f


def _base(e: BExpr, heads: Sequence[Term]) -> Term:
    """A base expression with ``x_i`` replaced by ``heads[i-1]``."""
    match e:
        case BNum(v):
            return numeral(v)
        case BVar(name):
            return heads[int(name[1:]) - 1]
        case BOp(op, l, r):
            return Prim(op, _base(l, heads), _base(r, heads))
    raise SpecError(f"{show(e)} is not a base expression")


def _is_base(e: BExpr) -> bool:
    match e:
        case BNum():
            return True
        case BVar(name):
            return name.startswith("x")
        case BOp():
            return True
    return False


def _streams(k: int) -> list[str]:
    return [f"s{i}" for i in range(1, k + 1)]


def _tail(e: BExpr, spec: BdeSpec) -> Term:
    """The translation ``T`` (a term of type ``|>StrG``)."""
    ss = _streams(spec.arity)
    heads = [App(Var("hdg"), Var(s)) for s in ss]
    if _is_base(e):
        return Next(App(Var("rho"), _base(e, heads)))
    match e:
        case BVar(name):
            i = int(name[1:]) - 1
            return Next(Var(ss[i])) if name[0] == "y" else App(Var("tlg"), Var(ss[i]))
        case BCall(fn, args):
            out: Term = Var("f") if fn == spec.name else Next(Var(fn))
            for a in args:
                out = LaterApp(out, _tail(a, spec))
            return out
    raise TypeError(e)


def guarded_source(spec: BdeSpec) -> Term:
    """The compiled term before definitions are inlined (as printed by ``--emit``)."""
    ss = _streams(spec.arity)
    heads = [App(Var("hdg"), Var(s)) for s in ss]
    body: Term = _app(Var("cons"), _base(spec.head, heads), _tail(spec.tail, spec))
    for s in reversed(ss):
        body = Lam(s, body)
    return Fix("f", body)


def lift_source(k: int, g: Term) -> Term:
    """``L_k(g)``: the lim construction iterated ``k`` times.

    ``lim = \\f. \\x. box iota. (unbox f) (unbox x)`` is inlined at each use
    so that every instance gets its own type.
    """
    xs = [f"x{i}" for i in range(1, k + 1)]
    out: Term = BoxI((), g)
    for x in xs:
        lim = Lam("f", Lam("x", BoxI((), App(Unbox(Var("f")), Unbox(Var("x"))), iota=True)))
        out = App(App(lim, out), Var(x))
    for x in reversed(xs):
        out = Lam(x, out)
    return out


@dataclass
class Compiled:
    spec: BdeSpec
    source: Term
    guarded: Term
    lifted: Term


@dataclass
class BdeProgram:
    """Compiled specs, in order, over a base environment of prelude definitions."""

    env: dict[str, Term]
    str_g: Type
    compiled: dict[str, Compiled] = field(default_factory=dict)

    def arities(self) -> dict[str, int]:
        return {n: c.spec.arity for n, c in self.compiled.items()}

    def _elaborate(self, t: Term, a: Type) -> Term:
        from glc.typecheck import TypingError, check, inline

        env = {**self.env, **{n: c.guarded for n, c in self.compiled.items()}}
        try:
            return check({}, inline(t, env), a)
        except TypingError as e:
            raise RuntimeError(f"internal error: compiled term does not typecheck: {e}") from e

    def compile(self, spec: BdeSpec) -> Compiled:
        validate(spec, self.arities())
        source = guarded_source(spec)
        guarded = self._elaborate(source, stream_type(spec.arity, self.str_g))
        lifted = lift(guarded, spec.arity, self.str_g)
        out = Compiled(spec, source, guarded, lifted)
        self.compiled[spec.name] = out
        return out


def new_program(prelude=None) -> BdeProgram:
    if prelude is None:
        from glc.prelude import checked_prelude

        prelude = checked_prelude()
    env = {n: d.term for n, d in prelude.definitions.items()}
    return BdeProgram(env, prelude.aliases["StrG"])


def compile_guarded(spec: BdeSpec, program: Optional[BdeProgram] = None) -> Term:
    """The elaborated guarded term for ``spec`` (earlier specs come from ``program``)."""
    program = program if program is not None else new_program()
    return program.compile(spec).guarded


def compile_file(text: str, prelude=None) -> BdeProgram:
    program = new_program(prelude)
    for spec in parse_specs(text):
        program.compile(spec)
    return program


def lift(g: Term, k: int, str_g: Type) -> Term:
    """``L_k(g)`` elaborated at ``(#StrG)^k -> #StrG``."""
    from glc.typecheck import check

    a: Type = Box(str_g)
    for _ in range(k):
        a = Arrow(Box(str_g), a)
    return check({}, lift_source(k, g), a)


# ---------------------------------------------------------------- equations


def _stream_rhs(e: BExpr, spec: BdeSpec, args: Sequence[Term], program: BdeProgram, self_term: Term) -> Term:
    """The tail equation's right-hand side as a closed guarded stream."""
    env = program.env
    if _is_base(e):
        heads = [App(env["hdg"], s) for s in args]
        return App(env["rho"], _base(e, heads))
    match e:
        case BVar(name):
            s = args[int(name[1:]) - 1]
            return s if name[0] == "y" else Prev((), App(env["tlg"], s), False, ())
        case BCall(fn, sub):
            f = self_term if fn == spec.name else program.compiled[fn].guarded
            return _app(f, *(_stream_rhs(a, spec, args, program, self_term) for a in sub))
    raise TypeError(e)


@dataclass(frozen=True)
class Mismatch:
    equation: str
    arguments: tuple[str, ...]
    position: int
    expected: int
    found: int

    def describe(self) -> str:
        args = ", ".join(self.arguments)
        return (
            f"{self.equation} equation fails on ({args}) at position {self.position}: "
            f"expected {self.expected}, found {self.found}"
        )


@dataclass
class EquationReport:
    name: str
    depth: int
    checked: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def sample_streams(program: BdeProgram) -> list[tuple[str, Term]]:
    """Argument streams: nats, toggle, paperfolds and the constant stream of twos."""
    from glc.typecheck import check, inline
    from glc.parser import parse_term

    out = [(n, program.env[n]) for n in ("nats", "toggle", "paperfolds")]
    const = check({}, inline(parse_term("fix s. cons 2 s"), program.env), program.str_g)
    out.append(("twos", const))
    return out


def check_equations(
    spec: BdeSpec,
    depth: int,
    program: Optional[BdeProgram] = None,
    samples: Optional[Sequence[tuple[str, Term]]] = None,
    budget: Optional[int] = None,
) -> EquationReport:
    """Force both sides of the head and tail equations on sample arguments.

    ``f`` means the artifact already compiled under ``spec.name`` in
    ``program`` (compiling ``spec`` first if there is none), so a spec that
    disagrees with the compiled function shows up as a mismatch.
    """
    program = program if program is not None else new_program()
    if spec.name not in program.compiled:
        program.compile(spec)
    else:
        validate(spec, {n: a for n, a in program.arities().items() if n != spec.name})
    f = program.compiled[spec.name].guarded
    samples = samples if samples is not None else sample_streams(program)
    report = EquationReport(spec.name, depth)
    env = program.env
    for combo in itertools.product(samples, repeat=spec.arity):
        names = tuple(n for n, _ in combo)
        args = [t for _, t in combo]
        applied = _app(f, *args)
        report.checked += 1
        lhs_head = force_guarded_stream(applied, 1, budget)
        rhs_head = force_guarded_stream(App(env["rho"], _base(spec.head, [App(env["hdg"], s) for s in args])), 1, budget)
        if lhs_head != rhs_head:
            report.mismatches.append(Mismatch("head", names, 0, rhs_head[0], lhs_head[0]))
            continue
        lhs_tail = force_guarded_stream(Prev((), App(env["tlg"], applied), False, ()), depth, budget)
        rhs_tail = force_guarded_stream(_stream_rhs(spec.tail, spec, args, program, f), depth, budget)
        for pos, (got, want) in enumerate(zip(lhs_tail, rhs_tail)):
            if got != want:
                report.mismatches.append(Mismatch("tail", names, pos, want, got))
                break
    return report


# ---------------------------------------------------------------- oracle


def oracle(
    spec: BdeSpec,
    args: Sequence[Sequence[int]],
    n: int,
    specs: Mapping[str, BdeSpec] = {},
) -> list[int]:
    """The first ``n`` elements of ``f(args)`` computed directly on Python lists.

    Each argument needs at least ``n + 1`` elements when the tail uses ``z``.
    """
    if n <= 0:
        return []
    table = {**specs, spec.name: spec}

    def run(sp: BdeSpec, streams: Sequence[Sequence[int]], m: int) -> list[int]:
        if m <= 0:
            return []
        heads = [s[0] for s in streams]
        return [base(sp.head, heads)] + tail(sp.tail, sp, streams, m - 1)

    def base(e: BExpr, heads: Sequence[int]) -> int:
        match e:
            case BNum(v):
                return v
            case BVar(name):
                return heads[int(name[1:]) - 1]
            case BOp("+", l, r):
                return base(l, heads) + base(r, heads)
            case BOp("*", l, r):
                return base(l, heads) * base(r, heads)
        raise TypeError(e)

    def tail(e: BExpr, sp: BdeSpec, streams, m: int) -> list[int]:
        if _is_base(e):
            return ([base(e, [s[0] for s in streams])] + [0] * m)[:m]
        match e:
            case BVar(name):
                s = streams[int(name[1:]) - 1]
                out = list(s[:m]) if name[0] == "y" else list(s[1 : m + 1])
                if len(out) < m:
                    raise ValueError("argument prefix too short for the oracle")
                return out
            case BCall(fn, sub):
                return run(table[fn], [tail(a, sp, streams, m) for a in sub], m)
        raise TypeError(e)

    return run(spec, args, n)


def iter_mismatches(reports: Sequence[EquationReport]) -> Iterator[str]:
    for r in reports:
        for m in r.mismatches:
            yield f"{r.name}: {m.describe()}"


def lift_agrees(
    program: BdeProgram,
    name: str,
    depth: int,
    samples: Optional[Sequence[tuple[str, Term]]] = None,
    budget: Optional[int] = None,
) -> list[str]:
    """``unbox (L_k g (box s1) .. (box sk))`` against ``g s1 .. sk``; returns failures."""
    c = program.compiled[name]
    samples = samples if samples is not None else sample_streams(program)
    bad = []
    for combo in itertools.product(samples, repeat=c.spec.arity):
        args = [t for _, t in combo]
        boxed = [BoxI((), t) for t in args]
        lifted = force_coinductive_stream(_app(c.lifted, *boxed), depth, budget)
        direct = force_guarded_stream(_app(c.guarded, *args), depth, budget)
        if lifted != direct:
            bad.append(f"{name}({', '.join(n for n, _ in combo)}): lifted {lifted}, direct {direct}")
    return bad
