"""Lexer and recursive-descent parser for programs, types and terms.

Program ::= (TypeAlias | Definition)*
TypeAlias ::= "type" Ident "=" Type ";"
Definition ::= "def" Ident ":" Type "=" Term ";"

Type precedence, loosest first: ``->`` (right), ``+`` (right), ``*`` (right),
then the prefix formers ``|>``, ``#`` and ``mu a.``.  Term precedence,
loosest first: binders (``\\x.``, ``fix``, ``prev [..].``, ``box iota.``,
``case``) which extend as far right as possible, ``<*>``, ``+``, ``*``
(all left-associative), keyword formers such as ``next`` whose operand is a
whole application, then application.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

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
)


class ParseError(Exception):
    def __init__(self, message: str, loc: Loc, expected: frozenset[str] = frozenset()):
        self.message = message
        self.loc = loc
        self.expected = expected
        super().__init__(f"{loc}: {message}")


KEYWORDS = {
    "type", "def", "mu", "Nat", "succ", "fst", "snd", "fold", "unfold", "next",
    "prev", "box", "unbox", "in1", "in2", "case", "of", "abort", "boxplus", "fix", "iota",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|--[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<sym><\*>|\|>|->|<-|[()<>\[\],.;:=*+#\\])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "ident", "kw", "sym", "eof"
    text: str
    loc: Loc


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", Loc(line, pos - line_start + 1))
        kind = m.lastgroup
        value = m.group()
        if kind != "ws":
            if kind == "ident" and value in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, value, Loc(line, pos - line_start + 1)))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "<end of input>", Loc(line, pos - line_start + 1)))
    return tokens


@dataclass
class Definition:
    name: str
    type: Type
    body: Term
    loc: Loc


@dataclass
class SourceProgram:
    definitions: list[Definition] = field(default_factory=list)
    aliases: dict[str, Type] = field(default_factory=dict)

    def names(self) -> list[str]:
        return [d.name for d in self.definitions]

    def get(self, name: str) -> Optional[Definition]:
        for d in self.definitions:
            if d.name == name:
                return d
        return None


_UNARY_KW = {
    "succ": lambda b, loc: Succ(b, loc),
    "fst": lambda b, loc: Proj(1, b, loc),
    "snd": lambda b, loc: Proj(2, b, loc),
    "fold": lambda b, loc: Fold(b, None, loc),
    "unfold": lambda b, loc: Unfold(b, loc),
    "next": lambda b, loc: Next(b, loc),
    "unbox": lambda b, loc: Unbox(b, loc),
    "in1": lambda b, loc: Inj(1, b, None, loc),
    "in2": lambda b, loc: Inj(2, b, None, loc),
    "abort": lambda b, loc: Abort(b, None, loc),
}
_EXPLICIT_KW = {"prev": Prev, "box": BoxI, "boxplus": BoxSum}
_BINDER_KW = {"fix", "case"}


class Parser:
    def __init__(self, text: str, aliases: Optional[dict[str, Type]] = None):
        self.tokens = tokenize(text)
        self.pos = 0
        self.aliases: dict[str, Type] = dict(aliases or {})

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        return self.tok.kind in ("sym", "kw") and self.tok.text in texts

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail({text})
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.fail({"identifier"})
        return self.advance()

    def fail(self, expected: set[str]):
        exp = frozenset(expected)
        shown = ", ".join(sorted(exp))
        raise ParseError(f"expected {shown} but found {self.tok.text!r}", self.tok.loc, exp)

    # -- programs

    def program(self) -> SourceProgram:
        prog = SourceProgram(aliases=self.aliases)
        seen: set[str] = set()
        while self.tok.kind != "eof":
            if self.at("type"):
                self.advance()
                name = self.ident()
                self.expect("=")
                ty = self.type_()
                self.expect(";")
                self.aliases[name.text] = ty
            elif self.at("def"):
                start = self.advance()
                name = self.ident()
                if name.text in seen:
                    raise ParseError(f"duplicate definition {name.text!r}", name.loc)
                seen.add(name.text)
                self.expect(":")
                ty = self.type_()
                self.expect("=")
                body = self.term()
                self.expect(";")
                prog.definitions.append(Definition(name.text, ty, body, start.loc))
            else:
                self.fail({"type", "def"})
        return prog

    # -- types

    def type_(self) -> Type:
        loc = self.tok.loc
        left = self.sum_type()
        if self.at("->"):
            self.advance()
            return Arrow(left, self.type_(), loc)
        return left

    def sum_type(self) -> Type:
        loc = self.tok.loc
        left = self.prod_type()
        if self.at("+"):
            self.advance()
            return Sum(left, self.sum_type(), loc)
        return left

    def prod_type(self) -> Type:
        loc = self.tok.loc
        left = self.unary_type()
        if self.at("*"):
            self.advance()
            return Prod(left, self.prod_type(), loc)
        return left

    def unary_type(self) -> Type:
        loc = self.tok.loc
        if self.at("|>"):
            self.advance()
            return Later(self.unary_type(), loc)
        if self.at("#"):
            self.advance()
            return Box(self.unary_type(), loc)
        if self.at("mu"):
            self.advance()
            v = self.ident()
            self.expect(".")
            return Mu(v.text, self.type_(), loc)
        return self.atom_type()

    def atom_type(self) -> Type:
        t = self.tok
        if t.kind == "num" and t.text in ("0", "1"):
            self.advance()
            return TUnit(t.loc) if t.text == "1" else TEmpty(t.loc)
        if self.at("Nat"):
            self.advance()
            return TNat(t.loc)
        if t.kind == "ident":
            self.advance()
            return self.aliases.get(t.text) or TVar(t.text, t.loc)
        if self.at("("):
            self.advance()
            ty = self.type_()
            self.expect(")")
            return ty
        self.fail({"type"})

    # -- terms

    def starts_binder(self) -> bool:
        if self.at("\\", *_BINDER_KW):
            return True
        return self.at(*_EXPLICIT_KW) and (self.peek().text in ("[", "iota"))

    def term(self) -> Term:
        if self.starts_binder():
            return self.binder()
        return self.later_app()

    def binder(self) -> Term:
        start = self.advance()
        loc = start.loc
        if start.text == "\\":
            x = self.ident()
            self.expect(".")
            return Lam(x.text, self.term(), None, loc)
        if start.text == "fix":
            x = self.ident()
            self.expect(".")
            return Fix(x.text, self.term(), None, loc)
        if start.text == "case":
            scrut = self.term()
            self.expect("of")
            x1 = self.ident()
            self.expect(".")
            b1 = self.term()
            self.expect(";")
            x2 = self.ident()
            self.expect(".")
            b2 = self.term()
            return Case(scrut, x1.text, b1, x2.text, b2, None, loc)
        node = _EXPLICIT_KW[start.text]
        if self.at("iota"):
            self.advance()
            self.expect(".")
            return node((), self.term(), True, None, loc)
        subst = self.subst_list()
        self.expect(".")
        return node(subst, self.term(), False, None, loc)

    def subst_list(self):
        self.expect("[")
        items = []
        names = set()
        while True:
            x = self.ident()
            if x.text in names:
                raise ParseError(f"variable {x.text!r} bound twice in substitution", x.loc)
            names.add(x.text)
            self.expect("<-")
            items.append((x.text, self.term()))
            if self.at(","):
                self.advance()
                continue
            self.expect("]")
            return tuple(items)

    def later_app(self) -> Term:
        left = self.plus()
        while self.at("<*>"):
            op = self.advance()
            right = self.term() if self.starts_binder() else self.plus()
            left = LaterApp(left, right, op.loc)
        return left

    def plus(self) -> Term:
        left = self.times()
        while self.at("+"):
            op = self.advance()
            right = self.term() if self.starts_binder() else self.times()
            left = Prim("+", left, right, op.loc)
        return left

    def times(self) -> Term:
        left = self.application()
        while self.at("*"):
            op = self.advance()
            right = self.term() if self.starts_binder() else self.application()
            left = Prim("*", left, right, op.loc)
        return left

    def starts_atom(self) -> bool:
        t = self.tok
        return t.kind in ("ident", "num") or self.at("(", "<")

    def starts_unary(self) -> bool:
        return self.at(*_UNARY_KW) or (self.at(*_EXPLICIT_KW) and not self.starts_binder())

    def unary(self) -> Term:
        kw = self.advance()
        body = self.application()
        if kw.text in _EXPLICIT_KW:
            return _EXPLICIT_KW[kw.text]((), body, False, None, kw.loc)
        return _UNARY_KW[kw.text](body, kw.loc)

    def application(self) -> Term:
        if self.starts_unary():
            return self.unary()
        head = self.atom()
        while True:
            if self.starts_atom():
                head = App(head, self.atom(), head.loc)
            elif self.starts_unary():
                return App(head, self.unary(), head.loc)
            elif self.starts_binder():
                return App(head, self.binder(), head.loc)
            else:
                return head

    def atom(self) -> Term:
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return Var(t.text, t.loc)
        if t.kind == "num":
            self.advance()
            out: Term = Zero(t.loc)
            for _ in range(int(t.text)):
                out = Succ(out, t.loc)
            return out
        if self.at("("):
            self.advance()
            if self.at(")"):
                self.advance()
                return Unit(t.loc)
            inner = self.term()
            self.expect(")")
            return inner
        if self.at("<"):
            self.advance()
            left = self.term()
            self.expect(",")
            right = self.term()
            self.expect(">")
            return Pair(left, right, t.loc)
        self.fail({"term"})

    def finish(self):
        if self.tok.kind != "eof":
            self.fail({"<end of input>"})


def parse_program(text: str, aliases: Optional[dict[str, Type]] = None) -> SourceProgram:
    return Parser(text, aliases).program()


def parse_term(text: str) -> Term:
    p = Parser(text)
    t = p.term()
    p.finish()
    return t


def parse_type(text: str, aliases: Optional[dict[str, Type]] = None) -> Type:
    p = Parser(text, aliases)
    t = p.type_()
    p.finish()
    return t
