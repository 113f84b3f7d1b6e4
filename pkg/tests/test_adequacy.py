"""The logical relation, the fundamental property and adequacy at Nat."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import elab, prelude, ty
from strategies import DrawChooser, TermGen, closed_terms, constant_types

from glc.adequacy import (
    MeasureMonitor,
    MeasureViolation,
    check_adequacy_nat,
    check_fundamental,
    explain_nat,
    measure,
    rel,
)
from glc.denote import EXACT, LATER_UNIT, SAMPLED, NatVal, denote, restrict, shift
from glc.evaluator import trace
from glc.syntax import NAT, Later, numeral, usize
from glc.typecheck import check


# ---------------------------------------------------------------- examples


def test_numeral_related_to_its_value():
    v = rel(NatVal(3), numeral(3), NAT, 2)
    assert v.holds and v.mode == EXACT


def test_wrong_numeral_is_not_related():
    v = rel(NatVal(2), numeral(3), NAT, 1)
    assert not v.holds and "denotation 2, value 3" in v.witness


def test_later_at_index_one_relates_anything_delayed():
    t, _ = elab("next (fst <0, 0>)", "|>Nat")
    assert rel(LATER_UNIT, t, Later(NAT), 1).holds


def test_paperfolds_related_exactly():
    t = prelude().term("paperfolds")
    v = rel(denote(t, 4), t, ty("StrG"), 4)
    assert v.holds and v.mode == EXACT


def test_fundamental_zero():
    v = check_fundamental(numeral(0), NAT, 1)
    assert v.holds and v.mode == EXACT


def test_fundamental_boxed_toggle_is_sampled():
    t, a = elab("box iota. toggle", "#StrG")
    v = check_fundamental(t, a, 2)
    assert v.holds and v.mode == SAMPLED


def test_fundamental_function_is_sampled():
    v = check_fundamental(prelude().term("plus_g"), prelude().type("plus_g"), 2)
    assert v.holds and v.mode == SAMPLED


@pytest.mark.parametrize("src", ["hdg paperfolds", "prev (second_g nats)", "third (box iota. toggle)", "2 * 3 + 1"])
@pytest.mark.parametrize("i", [1, 3])
def test_adequacy_at_nat(src, i):
    t, _ = elab(src, "Nat")
    assert check_adequacy_nat(t, i), explain_nat(t, i)


def test_explain_nat():
    t, _ = elab("1 + 1", "Nat")
    assert explain_nat(t, 1) == "denotation 2, value 2"


def test_budget_makes_verdict_inconclusive():
    t = prelude().term("paperfolds")
    v = rel(denote(t, 4), t, ty("StrG"), 4, budget=3)
    assert not v.holds and v.inconclusive
    assert v.describe({}).startswith("inconclusive")


def test_describe():
    v = rel(NatVal(2), numeral(3), NAT, 1)
    assert v.describe() == "fails (exact) at index 1, type Nat: denotation 2, value 3"
    assert rel(NatVal(3), numeral(3), NAT, 1).describe() == "holds (exact) at index 1, type Nat"


# ---------------------------------------------------------------- the measure


def test_measure_components():
    a = ty("#Nat -> Nat")
    assert measure(a, 3) == (1, 3, usize(a))
    assert measure(ty("StrG"), 2)[:2] == (0, 2)


def test_strict_monitor_raises_on_non_decrease():
    m = MeasureMonitor()
    m.check((0, 2, 3), (0, 1, 9))
    with pytest.raises(MeasureViolation):
        m.check((0, 2, 3), (0, 2, 3))
    assert (m.assertions, m.violations) == (2, 1)


def test_lenient_monitor_counts():
    m = MeasureMonitor(strict=False)
    m.check((1, 1, 1), (1, 2, 0))
    assert (m.assertions, m.violations) == (1, 1)


def test_relation_runs_record_measure_checks():
    m = MeasureMonitor()
    t, a = elab("box iota. nats", "#StrG")
    assert check_fundamental(t, a, 2, monitor=m).holds
    assert m.assertions > 0 and m.violations == 0


# ---------------------------------------------------------------- properties


@settings(max_examples=40)
@given(closed_terms(), st.integers(1, 3))
def test_downward_closure(pair, i):
    a, surface = pair
    t = check({}, surface, a)
    upper = denote(t, i + 1)
    if rel(upper, t, a, i + 1).holds:
        assert rel(restrict(a, i, upper), t, a, i).holds


@settings(max_examples=40)
@given(closed_terms(), st.integers(1, 3))
def test_relation_closed_under_reduction(pair, i):
    a, surface = pair
    t = check({}, surface, a)
    d = denote(t, i)
    for u in trace(t).terms:
        assert rel(d, u, a, i).holds


@settings(max_examples=30)
@given(constant_types(), st.data())
def test_constant_types_relate_at_every_index(a, data):
    t = check({}, TermGen(DrawChooser(data.draw)).term(a, {}, 10), a)
    d = denote(t, 1)
    for j in range(1, 6):
        assert rel(shift(a, d, 1, j), t, a, j).holds
