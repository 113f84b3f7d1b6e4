"""Byte-exact command-line behaviour: outputs, diagnostics and exit codes."""

import io
import json
import os
import subprocess
import sys

import pytest

from glc.cli import main

DATA = os.path.join(os.path.dirname(__file__), "data")


@pytest.fixture(autouse=True)
def in_data_dir(monkeypatch):
    monkeypatch.chdir(DATA)
    monkeypatch.delenv("GLC_BUDGET", raising=False)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def ok(*argv):
    code, out, err = run(*argv)
    assert (code, err) == (0, "")
    return out


# ---------------------------------------------------------------- check


def test_check_lists_own_definitions():
    assert ok("check", "streams.glc") == (
        "ones : StrG\n"
        "evens : StrG\n"
        "sum_nt : StrG\n"
        "first_two : StrG -> Nat * |>Nat\n"
        "nats_from : Nat -> StrG\n"
        "swap : Nat + 1 -> 1 + Nat\n"
    )


def test_check_prelude():
    out = ok("check", "prelude")
    assert out.startswith("cons : Nat -> |>StrG -> StrG\nhdg : StrG -> Nat\n")
    assert "lim : #(StrG -> StrG) -> Str -> Str\n" in out


@pytest.mark.parametrize(
    "file, message",
    [
        (
            "prev_nonconstant.glc",
            "prev_nonconstant.glc:2:35: [nonconstant-context] prev substitution s must have a constant type"
            " (side condition: A constant) (found StrG)\n",
        ),
        ("paperfolds_swapped.glc", "paperfolds_swapped.glc:3:47: [mismatch] type mismatch (expected StrG, found |>StrG)\n"),
        ("forward_reference.glc", "forward_reference.glc:1:24: [unbound-variable] unbound variable 'later_one'\n"),
    ],
)
def test_check_type_errors(file, message):
    assert run("check", file) == (1, "", message)


def test_check_json_diagnostic():
    code, out, err = run("check", "prev_nonconstant.glc", "--json")
    assert (code, out) == (1, "")
    assert json.loads(err) == {
        "kind": "nonconstant-context",
        "location": "prev_nonconstant.glc:2:35",
        "message": "prev substitution s must have a constant type (side condition: A constant)",
        "definition": "bad_tail",
        "expected": None,
        "found": "StrG",
    }


def test_check_parse_error(tmp_path):
    f = tmp_path / "bad.glc"
    f.write_text("def x : Nat = (0;\n")
    code, out, err = run("check", str(f))
    assert (code, out) == (2, "")
    assert err.startswith(f"{f}:1:17: [parse-error] ")


def test_check_parse_error_json(tmp_path):
    f = tmp_path / "bad.glc"
    f.write_text("def x : Nat = ;")
    code, _, err = run("check", str(f), "--json")
    record = json.loads(err)
    assert code == 2 and record["kind"] == "parse-error" and record["location"] == f"{f}:1:15"
    assert record["expected"]


def test_missing_file():
    assert run("check", "missing.glc") == (2, "", "missing.glc: cannot read file: No such file or directory\n")


# ---------------------------------------------------------------- eval


def test_eval_expression():
    assert ok("eval", "streams.glc", "--term", "swap (in1 3)") == "in2 3\n"


def test_eval_trace():
    assert ok("eval", "streams.glc", "--term", "(\\x. succ x) 0", "--trace") == "step 0: (\\x. succ x) 0\nstep 1: 1\n"


def test_eval_term_type_error():
    assert run("eval", "streams.glc", "--term", "hdg (unfold evens)") == (
        1,
        "",
        "--term:1:6: [mismatch] type mismatch (expected StrG, found Nat * |>StrG)\n",
    )


def test_eval_term_type_error_json():
    code, _, err = run("eval", "streams.glc", "--term", "fst 0", "--json")
    assert code == 1
    assert json.loads(err) == {
        "kind": "not-a-product",
        "location": "--term:1:1",
        "message": "projection from a non-product",
        "definition": None,
        "expected": None,
        "found": "Nat",
    }


def test_eval_without_typecheck_gets_stuck():
    assert run("eval", "streams.glc", "--term", "fst 0", "--no-typecheck") == (
        1,
        "",
        "streams.glc: [stuck] evaluation is stuck: projection from a non-pair\n",
    )


def test_eval_budget():
    assert run("eval", "streams.glc", "--term", "hdg paperfolds", "--steps", "3") == (
        3,
        "",
        "streams.glc: [budget] no value within 3 steps\n",
    )


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("GLC_BUDGET", "3")
    assert run("eval", "streams.glc", "--term", "hdg paperfolds")[0] == 3
    # an explicit flag wins over the environment
    assert run("eval", "streams.glc", "--term", "hdg paperfolds", "--steps", "100000") == (0, "1\n", "")


@pytest.mark.parametrize("value", ["zero", "0"])
def test_bad_environment_budget(monkeypatch, value):
    monkeypatch.setenv("GLC_BUDGET", value)
    code, out, err = run("eval", "streams.glc", "--term", "swap (in1 3)")
    assert (code, out) == (2, "") and err.startswith("GLC_BUDGET must be a positive integer")


def test_eval_unknown_definition():
    assert run("eval", "streams.glc", "--term", "nope") == (2, "", "no definition named nope in streams.glc\n")


def test_eval_term_parse_error():
    assert run("eval", "streams.glc", "--term", "(0") == (
        2,
        "",
        "--term:1:3: [parse-error] expected ) but found '<end of input>'\n",
    )


def test_nonpositive_steps():
    assert run("eval", "streams.glc", "--term", "swap", "--steps", "0") == (2, "", "--steps must be at least 1\n")


# ---------------------------------------------------------------- take


def test_take_prelude_paperfolds():
    assert ok("take", "prelude", "--term", "paperfolds", "--n", "8") == "1 1 0 1 1 0 0 1\n"


def test_eval_prelude_second_of_boxed_nats():
    # numerals print as digits, which is how the surface syntax writes them
    assert ok("eval", "prelude", "--term", "second (box iota. nats)") == "1\n"


def test_take_guarded():
    assert ok("take", "streams.glc", "--term", "evens", "--n", "5") == "0 2 4 6 8\n"


def test_take_coinductive():
    assert ok("take", "streams.glc", "--term", "box iota. sum_nt", "--n", "4") == "1 1 3 3\n"


def test_take_zero():
    assert ok("take", "streams.glc", "--term", "ones", "--n", "0") == "\n"


def test_take_needs_stream():
    assert run("take", "streams.glc", "--term", "swap", "--n", "4") == (
        1,
        "",
        "--term: [mismatch] take needs a stream (expected StrG or Str, found Nat + 1 -> 1 + Nat)\n",
    )


def test_take_negative_count():
    assert run("take", "streams.glc", "--term", "ones", "--n", "-1") == (
        2,
        "",
        "take needs --n with a non-negative count\n",
    )


# ---------------------------------------------------------------- denote and adequacy


def test_denote_stream():
    assert ok("denote", "streams.glc", "--term", "sum_nt", "--index", "4") == "(1, 1, 3, 3)\n"


def test_denote_function_and_pair():
    assert ok("denote", "streams.glc", "--term", "first_two", "--index", "2") == "<fun@2>\n"
    assert ok("denote", "streams.glc", "--term", "first_two ones", "--index", "2") == "<1, next 1>\n"


def test_denote_default_index():
    assert ok("denote", "streams.glc", "--term", "nats") == "(0, 1, 2)\n"


def test_denote_index_must_be_positive():
    assert run("denote", "streams.glc", "--term", "ones", "--index", "0") == (2, "", "--index must be at least 1\n")


def test_adequacy_exact_and_sampled():
    assert ok("adequacy", "streams.glc", "--term", "sum_nt", "--index", "3") == "holds (exact) at index 3, type StrG\n"
    assert (
        ok("adequacy", "streams.glc", "--term", "nats_from", "--index", "2")
        == "holds (sampled) at index 2, type Nat -> StrG\n"
    )


def test_adequacy_budget_is_inconclusive():
    assert run("adequacy", "streams.glc", "--term", "paperfolds", "--steps", "5") == (
        3,
        "inconclusive (exact) at index 3, type StrG: no value within 5 steps\n",
        "",
    )


def test_adequacy_failure_exit_code(monkeypatch):
    from glc import adequacy
    from glc.adequacy import RelVerdict
    from glc.syntax import NAT

    monkeypatch.setattr(adequacy, "check_fundamental", lambda *a, **k: RelVerdict(False, "exact", 3, NAT, "forced"))
    assert run("adequacy", "streams.glc", "--term", "swap (in1 3)") == (
        4,
        "fails (exact) at index 3, type Nat: forced\n",
        "",
    )


# ---------------------------------------------------------------- bde


def test_bde_emit():
    assert ok("bde", "arith.bde", "--emit") == (
        "def plus : StrG -> StrG -> StrG =\n"
        "  fix f. \\s1. \\s2. cons (hdg s1 + hdg s2) (f <*> tlg s1 <*> tlg s2);\n"
        "def times : StrG -> StrG -> StrG =\n"
        "  fix f. \\s1. \\s2. cons (hdg s1 * hdg s2) "
        "(next plus <*> (f <*> next rho (hdg s1) <*> tlg s2) <*> (f <*> tlg s1 <*> next s2));\n"
    )


def test_bde_check():
    assert ok("bde", "arith.bde", "--check-depth", "3") == (
        "plus: equations and lifting hold on 16 argument tuples to depth 3\n"
        "times: equations and lifting hold on 16 argument tuples to depth 3\n"
    )


def test_bde_check_failure(monkeypatch):
    from glc import bde

    monkeypatch.setattr(bde, "lift_agrees", lambda program, name, depth, **k: [f"{name}(nats, nats): broken"])
    code, out, err = run("bde", "arith.bde", "--check-depth", "2")
    assert (code, err) == (4, "")
    assert out == "plus: lifting fails: plus(nats, nats): broken\ntimes: lifting fails: times(nats, nats): broken\n"


@pytest.mark.parametrize("argv", [["bde", "arith.bde"], ["bde", "arith.bde", "--emit", "--check-depth", "2"]])
def test_bde_needs_one_mode(argv):
    assert run(*argv) == (2, "", "bde needs exactly one of --emit and --check-depth\n")


def test_bde_spec_error(tmp_path):
    f = tmp_path / "bad.bde"
    f.write_text("bde f(1) { head = x1; tail = g(z1); }\n")
    assert run("bde", str(f), "--emit") == (2, "", f"{f}:1:30: [spec-error] unknown function symbol g\n")


# ---------------------------------------------------------------- usage


def test_unknown_command():
    code, out, err = run("frob")
    assert (code, out) == (2, "")
    assert err.startswith("usage: glc [-h] {check,eval,take,denote,adequacy,bde} ...\n")


def test_missing_term_option():
    code, _, err = run("eval", "streams.glc")
    assert code == 2 and "--term" in err


def test_help_goes_to_stdout():
    code, out, err = run("--help")
    assert (code, err) == (0, "")
    assert out.startswith("usage: glc")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "glc", "take", "streams.glc", "--term", "ones", "--n", "3"],
        capture_output=True,
        text=True,
        cwd=DATA,
    )
    assert (proc.returncode, proc.stdout, proc.stderr) == (0, "1 1 1\n", "")
