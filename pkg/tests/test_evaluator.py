"""Call-by-name reduction: decomposition, single steps, evaluation and stream forcing."""

import pytest
from hypothesis import given

from corpus import BOXED_STREAMS, GUARDED_STREAMS, elab, prelude
from strategies import closed_terms

from glc.evaluator import (
    BudgetExceeded,
    Decomposition,
    IsValue,
    Stepped,
    Stuck,
    StuckError,
    all_decompositions,
    decompose,
    evaluate,
    force_coinductive_stream,
    force_guarded_stream,
    is_redex,
    plug,
    run,
    step,
    trace,
)
from glc.parser import parse_term
from glc.syntax import App, Fold, Lam, Next, Unfold, alpha_equal, as_numeral, is_value, numeral, types_equal
from glc.typecheck import check, infer, theta


def nat(src: str) -> int:
    return as_numeral(evaluate(elab(src, "Nat")[0]))


# ---------------------------------------------------------------- decomposition


def test_decompose_projection_at_root():
    t = parse_term("fst <0, 1>")
    d = decompose(t)
    assert isinstance(d, Decomposition)
    assert d.frames == () and d.redex == t


def test_decompose_right_of_later_application():
    t = parse_term("(next (\\x. x)) <*> (unfold (fold (next 0)))")
    d = decompose(t)
    assert [f.kind for f in d.frames] == ["lapp-arg"]
    assert d.redex == parse_term("unfold (fold (next 0))")
    assert plug(d.frames, d.redex) == t


def test_decompose_value():
    t = parse_term("\\x. x")
    assert decompose(t) == IsValue(t)


def test_decompose_stuck():
    d = decompose(parse_term("fst 0"))
    assert isinstance(d, Stuck)


# ---------------------------------------------------------------- steps


def steps_of(src: str) -> list:
    return trace(parse_term(src)).terms


def test_prev_with_substitution_takes_two_steps():
    terms = steps_of("prev [x <- 1]. next x")
    assert len(terms) == 3
    assert alpha_equal(terms[1], parse_term("prev (next 1)"))
    assert terms[2] == numeral(1)


def test_later_application_of_nexts():
    t = parse_term("next (\\x. x) <*> next 0")
    s = step(t)
    assert isinstance(s, Stepped)
    assert alpha_equal(s.term, parse_term("next ((\\x. x) 0)"))
    assert isinstance(step(s.term), IsValue)


def test_unbox_box_in_one_step():
    s = step(parse_term("unbox (box [y <- 0]. succ y)"))
    assert s == Stepped(numeral(1))


def test_case_of_injection():
    assert evaluate(parse_term("case in1 0 of a. a ; b. succ b")) == numeral(0)


def test_beta_and_succ_context():
    assert evaluate(parse_term("(\\x. succ x) 0")) == numeral(1)
    assert steps_of("succ ((\\x. x) 0)")[-1] == numeral(1)


def test_primitive_arithmetic():
    assert evaluate(parse_term("(1 + 2) * 3")) == numeral(9)


def test_boxplus_moves_box_inside():
    t, _ = elab("boxplus iota. in2 ()", "#Nat + #1")
    v = evaluate(t)
    assert v.index == 2 and is_value(v)
    assert evaluate(App(Lam("b", parse_term("unbox b")), v.body)) == parse_term("()")


def test_toggle_evaluates_to_fold():
    v = evaluate(prelude().term("toggle"))
    assert type(v).__name__ == "Fold"
    assert force_guarded_stream(prelude().term("toggle"), 1) == [1]


def test_budget_and_stuck():
    with pytest.raises(BudgetExceeded):
        run(elab("hdg (times_g nats nats)", "Nat")[0], 5)
    with pytest.raises(StuckError):
        evaluate(parse_term("0 0"))
    value, n = run(parse_term("(\\x. x) 0"), 1)
    assert value == numeral(0) and n == 1


def test_budget_counts_steps_exactly():
    t = parse_term("(\\x. \\y. y) 0 1")
    with pytest.raises(BudgetExceeded):
        run(t, 1)
    assert run(t, 2) == (numeral(1), 2)


def test_trace_entries_are_single_steps():
    tr = trace(elab("hdg paperfolds", "Nat")[0])
    assert tr.steps == len(tr.terms) - 1
    for a, b in zip(tr.terms, tr.terms[1:]):
        assert step(a) == Stepped(b)
    assert isinstance(step(tr.value), IsValue)


# ---------------------------------------------------------------- streams


@pytest.mark.parametrize(
    "name, n, expected",
    [
        ("toggle", 4, [1, 0, 1, 0]),
        ("paperfolds", 8, [1, 1, 0, 1, 1, 0, 0, 1]),
        ("nats", 4, [0, 1, 2, 3]),
    ],
)
def test_force_guarded(name, n, expected):
    assert force_guarded_stream(prelude().term(name), n) == expected


@pytest.mark.parametrize(
    "src, n, expected",
    [
        ("box iota. nats", 3, [0, 1, 2]),
        ("(\\s. box iota. every2nd s) (box iota. nats)", 4, [0, 2, 4, 6]),
        ("box iota. toggle", 2, [1, 0]),
    ],
)
def test_force_coinductive(src, n, expected):
    assert force_coinductive_stream(elab(src, "Str")[0], n) == expected


@pytest.mark.parametrize("src", GUARDED_STREAMS)
def test_guarded_forcing_matches_literal_observations(src):
    """Element k is hdg (prev (tlg (... prev (tlg s))))."""
    forced = force_guarded_stream(elab(src, "StrG")[0], 3)
    literal = []
    expr = f"({src})"
    for _ in range(3):
        literal.append(nat(f"hdg {expr}"))
        expr = f"(prev (tlg {expr}))"
    assert forced == literal


@pytest.mark.parametrize("src", BOXED_STREAMS)
def test_coinductive_forcing_matches_hd_tl(src):
    forced = force_coinductive_stream(elab(src, "Str")[0], 3)
    literal = [nat(f"hd ({src})"), nat(f"hd (tl ({src}))"), nat(f"hd (tl (tl ({src})))")]
    assert forced == literal


def test_force_rejects_budget():
    with pytest.raises(BudgetExceeded):
        force_guarded_stream(prelude().term("paperfolds"), 16, budget=50)


# ---------------------------------------------------------------- the fixed-point combinator


def _theta_parts(t):
    """``theta(A) F`` as produced by the fix elaboration."""
    assert isinstance(t, App)
    return t.fn, t.arg


def test_theta_reduces_to_f_of_next():
    t = prelude().term("toggle")
    th, f = _theta_parts(t)
    tr = trace(t)
    # step 1: theta F -> h (next (fold h)); step 2: -> F (...)
    assert isinstance(tr.terms[2], App) and alpha_equal(tr.terms[2].fn, f)
    delayed = evaluate(tr.terms[2].arg)
    assert isinstance(delayed, Next)
    # next (Theta' F): step 1 behind the internal redex (\v. unfold v) (fold h)
    inner = delayed.body
    assert isinstance(inner, App) and isinstance(inner.fn, App)
    unfold_fn, folded = inner.fn.fn, inner.fn.arg
    assert isinstance(unfold_fn, Lam) and isinstance(unfold_fn.body, Unfold) and isinstance(folded, Fold)
    assert alpha_equal(App(folded.body, inner.arg), tr.terms[1])


@pytest.mark.parametrize("name", ["toggle", "paperfolds", "zeros"])
def test_theta_unfolding_law(name):
    t = prelude().term(name)
    th, f = _theta_parts(t)
    unfolded = App(f, Next(App(th, f)))
    assert types_equal(infer({}, unfolded), prelude().type(name))
    assert force_guarded_stream(unfolded, 8) == force_guarded_stream(t, 8)


def test_theta_unfolding_law_at_function_type():
    th, f = _theta_parts(prelude().term("plus_g"))
    args = [prelude().term("nats"), prelude().term("toggle")]
    direct = App(App(App(th, f), args[0]), args[1])
    unfolded = App(App(App(f, Next(App(th, f))), args[0]), args[1])
    assert force_guarded_stream(unfolded, 6) == force_guarded_stream(direct, 6) == [1, 1, 3, 3, 5, 5]


def test_theta_is_closed_combinator():
    a = prelude().type("toggle")
    assert theta(a).fv == frozenset()


# ---------------------------------------------------------------- properties


@given(closed_terms())
def test_generated_terms_normalize_deterministically(pair):
    a, surface = pair
    t = check({}, surface, a)
    tr = trace(t)
    for u in tr.terms:
        found = all_decompositions(u)
        if is_value(u):
            assert found == [] and isinstance(step(u), IsValue)
        else:
            assert len(found) == 1
            d = decompose(u)
            assert found[0][1] == d.redex
            assert [f.kind for f in d.frames] == list(found[0][0])


@given(closed_terms())
def test_subject_reduction(pair):
    a, surface = pair
    for u in trace(check({}, surface, a)).terms:
        assert types_equal(infer({}, u), a)


@given(closed_terms())
def test_values_are_not_redexes(pair):
    a, surface = pair
    v = evaluate(check({}, surface, a))
    assert is_value(v) and not is_redex(v)
    assert isinstance(step(v), IsValue)
