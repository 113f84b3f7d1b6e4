"""Command-line driver: ``glc check|eval|take|denote|adequacy|bde``.

Exit codes: 0 success, 1 type error (or a stuck evaluation), 2 parse or
usage error, 3 step budget exceeded, 4 a property or equation failed.
Results go to standard output and diagnostics to standard error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import re
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from glc.parser import ParseError, parse_program, parse_term
from glc.pretty import pretty_term, pretty_type
from glc.syntax import Box, Term, Type, types_equal
from glc.typecheck import CheckedProgram, TypingError, check_program, elaborate, inline

OK, TYPE_ERROR, USAGE_ERROR, BUDGET, PROPERTY_FAILURE = 0, 1, 2, 3, 4
PRELUDE_NAME = "prelude"
DEFAULT_INDEX = 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


@dataclass
class Session:
    """A loaded program plus how to report problems with it."""

    filename: str
    program: CheckedProgram
    own: list[str]
    json: bool

    def resolve(self, text: str, typecheck: bool = True) -> tuple[Term, Type]:
        """A definition by name, or an expression over the program's definitions."""
        if re.fullmatch(r"[A-Za-z_][A-Za-z_0-9']*", text):
            if text not in self.program.definitions:
                raise CliError(USAGE_ERROR, f"no definition named {text} in {self.filename}")
            return self.program.term(text), self.program.type(text)
        try:
            surface = parse_term(text)
        except ParseError as e:
            raise CliError(USAGE_ERROR, f"--term:{e.loc}: [parse-error] {e.message}") from None
        env = {n: d.term for n, d in self.program.definitions.items()}
        term = inline(surface, env)
        if not typecheck:
            return term, None
        try:
            return elaborate({}, term)
        except TypingError as e:
            raise CliError(TYPE_ERROR, self.diagnostic(e, "--term")) from None

    def diagnostic(self, e: TypingError, filename: Optional[str] = None) -> str:
        name = filename or self.filename
        if self.json:
            return e.record(name, self.program.aliases)
        return e.render(name, self.program.aliases)

    def show_type(self, a: Type) -> str:
        return pretty_type(a, self.program.aliases)


def _read(filename: str) -> str:
    if filename == PRELUDE_NAME:
        from glc.prelude import prelude_source

        return prelude_source()
    try:
        with open(filename, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise CliError(USAGE_ERROR, f"{filename}: cannot read file: {e.strerror}") from None


def _parse_error(filename: str, e: ParseError, as_json: bool) -> str:
    if as_json:
        return json.dumps(
            {"kind": "parse-error", "location": f"{filename}:{e.loc}", "message": e.message, "expected": sorted(e.expected)}
        )
    exp = f" (expected {', '.join(sorted(e.expected))})" if e.expected else ""
    return f"{filename}:{e.loc}: [parse-error] {e.message}{exp}"


def load(filename: str, as_json: bool = False, typecheck: bool = True) -> Session:
    """Parse and check ``filename`` with the prelude in scope."""
    from glc.prelude import checked_prelude

    prelude = checked_prelude()
    if filename == PRELUDE_NAME:
        return Session(filename, prelude, list(prelude.definitions), as_json)
    text = _read(filename)
    try:
        source = parse_program(text, dict(prelude.aliases))
    except ParseError as e:
        raise CliError(USAGE_ERROR, _parse_error(filename, e, as_json)) from None
    own = [d.name for d in source.definitions]
    if not typecheck:
        program = CheckedProgram(dict(prelude.definitions), {**prelude.aliases, **source.aliases})
        env = {n: d.term for n, d in prelude.definitions.items()}
        from glc.typecheck import CheckedDefinition

        for d in source.definitions:
            term = inline(d.body, env)
            program.definitions[d.name] = CheckedDefinition(d.name, d.type, term, d.body, d.loc)
            env[d.name] = term
        return Session(filename, program, own, as_json)
    try:
        program = check_program(source, prelude)
    except TypingError as e:
        session = Session(filename, CheckedProgram(aliases={**prelude.aliases, **source.aliases}), own, as_json)
        raise CliError(TYPE_ERROR, session.diagnostic(e)) from None
    return Session(filename, program, own, as_json)


# ---------------------------------------------------------------- commands


def cmd_check(args, out) -> int:
    s = load(args.file, args.json)
    for name in s.own:
        out.write(f"{name} : {s.show_type(s.program.type(name))}\n")
    return OK


def _budget(args) -> Optional[int]:
    return args.steps


def cmd_eval(args, out) -> int:
    from glc.evaluator import run

    s = load(args.file, args.json, not args.no_typecheck)
    term, _ = s.resolve(args.term, not args.no_typecheck)
    if args.trace:
        count = [0]
        out.write(f"step 0: {pretty_term(term)}\n")

        def show(thunk):
            count[0] += 1
            out.write(f"step {count[0]}: {pretty_term(thunk())}\n")

        run(term, _budget(args), show)
        return OK
    value, _ = run(term, _budget(args))
    out.write(pretty_term(value) + "\n")
    return OK


def _stream_kind(s: Session, a: Type) -> str:
    str_g = s.program.aliases.get("StrG")
    if str_g is not None and types_equal(a, str_g):
        return "guarded"
    if str_g is not None and types_equal(a, Box(str_g)):
        return "coinductive"
    raise CliError(TYPE_ERROR, f"--term: [mismatch] take needs a stream (expected StrG or Str, found {s.show_type(a)})")


def cmd_take(args, out) -> int:
    from glc.evaluator import force_coinductive_stream, force_guarded_stream

    if args.n is None or args.n < 0:
        raise CliError(USAGE_ERROR, "take needs --n with a non-negative count")
    s = load(args.file, args.json)
    term, a = s.resolve(args.term)
    force = force_guarded_stream if _stream_kind(s, a) == "guarded" else force_coinductive_stream
    out.write(" ".join(str(x) for x in force(term, args.n, _budget(args))) + "\n")
    return OK


def _index(args) -> int:
    if args.index < 1:
        raise CliError(USAGE_ERROR, "--index must be at least 1")
    return args.index


def cmd_denote(args, out) -> int:
    from glc.denote import denote, render

    i = _index(args)
    s = load(args.file, args.json)
    term, a = s.resolve(args.term)
    out.write(render(a, i, denote(term, i)) + "\n")
    return OK


def cmd_adequacy(args, out) -> int:
    from glc.adequacy import check_fundamental

    i = _index(args)
    s = load(args.file, args.json)
    term, a = s.resolve(args.term)
    v = check_fundamental(term, a, i, budget=_budget(args))
    out.write(v.describe(s.program.aliases) + "\n")
    if v.inconclusive:
        return BUDGET
    return OK if v.holds else PROPERTY_FAILURE


def cmd_bde(args, out) -> int:
    from glc.bde import SpecError, check_equations, compile_file, lift_agrees, stream_type

    if args.emit == (args.check_depth is not None):
        raise CliError(USAGE_ERROR, "bde needs exactly one of --emit and --check-depth")
    if args.check_depth is not None and args.check_depth < 1:
        raise CliError(USAGE_ERROR, "--check-depth must be at least 1")
    text = _read(args.file)
    try:
        program = compile_file(text)
    except SpecError as e:
        where = f"{args.file}:{e.line}:{e.col}" if e.line else args.file
        raise CliError(USAGE_ERROR, f"{where}: [spec-error] {e.message}") from None
    if args.emit:
        aliases = {"StrG": program.str_g}
        for name, c in program.compiled.items():
            a = stream_type(c.spec.arity, program.str_g)
            out.write(f"def {name} : {pretty_type(a, aliases)} =\n  {pretty_term(c.source)};\n")
        return OK
    code = OK
    for name, c in program.compiled.items():
        report = check_equations(c.spec, args.check_depth, program, budget=_budget(args))
        lifted = lift_agrees(program, name, args.check_depth, budget=_budget(args))
        if report.ok and not lifted:
            out.write(f"{name}: equations and lifting hold on {report.checked} argument tuples to depth {args.check_depth}\n")
            continue
        code = PROPERTY_FAILURE
        for m in report.mismatches:
            out.write(f"{name}: {m.describe()}\n")
        for line in lifted:
            out.write(f"{name}: lifting fails: {line}\n")
    return code


COMMANDS = {
    "check": cmd_check,
    "eval": cmd_eval,
    "take": cmd_take,
    "denote": cmd_denote,
    "adequacy": cmd_adequacy,
    "bde": cmd_bde,
}


def _env_budget() -> Optional[int]:
    raw = os.environ.get("GLC_BUDGET")
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise CliError(USAGE_ERROR, f"GLC_BUDGET must be a positive integer, not {raw!r}") from None
    if value < 1:
        raise CliError(USAGE_ERROR, "GLC_BUDGET must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="glc", description="Guarded lambda-calculus toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(cmd, help_text, term=True):
        c = sub.add_parser(cmd, help=help_text)
        c.add_argument("file", help="program file, or 'prelude' for the bundled corpus")
        c.add_argument("--json", action="store_true", help="diagnostics as JSON lines")
        c.add_argument("--steps", type=int, default=None, help="step budget (default: GLC_BUDGET or 10^6)")
        if term:
            c.add_argument("--term", required=True, help="definition name or expression")
        return c

    common("check", "type check a program", term=False)
    e = common("eval", "evaluate a term to a value")
    e.add_argument("--trace", action="store_true", help="print every intermediate term")
    e.add_argument("--no-typecheck", action="store_true", help="skip type checking of the file and term")
    t = common("take", "print a stream prefix")
    t.add_argument("--n", type=int, required=True, help="number of elements")
    d = common("denote", "print the denotation at an index")
    d.add_argument("--index", type=int, default=DEFAULT_INDEX)
    a = common("adequacy", "check the logical relation for a term")
    a.add_argument("--index", type=int, default=DEFAULT_INDEX)
    b = sub.add_parser("bde", help="compile or check behavioural differential equations")
    b.add_argument("file", help="spec file")
    b.add_argument("--emit", action="store_true", help="print the compiled guarded terms")
    b.add_argument("--check-depth", type=int, default=None, help="check the equations to this depth")
    b.add_argument("--steps", type=int, default=None, help="step budget (default: GLC_BUDGET or 10^6)")
    return p


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    from glc.evaluator import BudgetExceeded, StuckError

    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE_ERROR if e.code else OK
    try:
        if args.steps is None:
            args.steps = _env_budget()
        elif args.steps < 1:
            raise CliError(USAGE_ERROR, "--steps must be at least 1")
        return COMMANDS[args.command](args, out)
    except CliError as e:
        err.write(e.message + "\n")
        return e.code
    except BudgetExceeded as e:
        err.write(f"{args.file}: [budget] {e}\n")
        return BUDGET
    except StuckError as e:
        err.write(f"{args.file}: [stuck] evaluation is stuck: {e.reason}\n")
        return TYPE_ERROR
    except BrokenPipeError:
        # the reader went away (``glc eval --trace ... | head``); not an error.
        # Point stdout at devnull so the interpreter's final flush stays quiet.
        if out is sys.stdout:
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return OK


if __name__ == "__main__":
    sys.exit(main())
