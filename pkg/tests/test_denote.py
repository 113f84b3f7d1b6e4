"""The finite-index model: restriction, denotations, equality and its invariants."""

import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpus import elab, prelude, ty
from strategies import DrawChooser, TermGen, closed_terms, constant_types, open_instances

from glc.denote import (
    EXACT,
    LATER_UNIT,
    SAMPLED,
    FoldVal,
    GlobalSection,
    LaterVal,
    NatVal,
    PairVal,
    SemanticError,
    SemEnv,
    denote,
    denote_term,
    fold_iso,
    render,
    restrict,
    restrict_to,
    sem_equal,
    shift,
    stream_prefix,
    unfold_iso,
)
from glc.evaluator import force_guarded_stream, trace
from glc.syntax import NAT, Later, is_constant, subst_term
from glc.typecheck import check


def guarded(*heads):
    """A guarded stream element at index ``len(heads)``."""
    out = None
    for n in reversed(heads):
        tail = LATER_UNIT if out is None else LaterVal(out)
        out = FoldVal(PairVal(NatVal(n), tail))
    return out


# ---------------------------------------------------------------- restriction


def test_restrict_stream_drops_last_head():
    s = ty("StrG")
    assert restrict(s, 2, guarded(0, 1, 2)) == guarded(0, 1)


def test_restrict_nat_is_identity():
    assert restrict(NAT, 5, NatVal(7)) == NatVal(7)


def test_restrict_later_to_index_one():
    assert restrict(Later(NAT), 1, LaterVal(NatVal(3))) == LATER_UNIT


def test_restrict_to_composes():
    s = ty("StrG")
    assert restrict_to(s, guarded(5, 6, 7, 8), 4, 1) == guarded(5)
    with pytest.raises(SemanticError):
        restrict_to(s, guarded(5), 1, 2)


def test_restrict_rejects_ill_typed_element():
    with pytest.raises(SemanticError):
        restrict(NAT, 1, LATER_UNIT)


# ---------------------------------------------------------------- denotations


def den(src: str, expected: str, i: int):
    return denote(elab(src, expected)[0], i)


def test_denote_numeral():
    assert den("succ 0", "Nat", 3) == NatVal(1)


def test_denote_next_at_two_and_one():
    assert den("next 0", "|>Nat", 2) == LaterVal(NatVal(0))
    assert den("next 0", "|>Nat", 1) == LATER_UNIT


def test_denote_nats_prefix():
    s = ty("StrG")
    assert render(s, 3, den("nats", "StrG", 3)) == "(0, 1, 2)"


def test_denote_boxed_toggle_section():
    s = ty("StrG")
    section = den("box iota. toggle", "#StrG", 1)
    assert isinstance(section, GlobalSection)
    assert [h.n for h in stream_prefix(s, 2, section.at(2))] == [1, 0]


def test_denote_prev_of_next():
    assert den("prev [x <- 2]. next x", "Nat", 1) == NatVal(2)


def test_denote_requires_elaboration():
    from glc.parser import parse_term

    with pytest.raises(SemanticError):
        denote(parse_term("\\x. x"), 1)


def test_render_shapes():
    assert render(Later(NAT), 1, LATER_UNIT) == "*"
    assert render(ty("#Nat"), 2, den("box iota. 4", "#Nat", 2)) == "box{1: 4, 2: 4}"


# ---------------------------------------------------------------- equality


def test_sem_equal_streams_exact():
    s = ty("StrG")
    v = sem_equal(s, 3, den("nats", "StrG", 3), den("map_g (\\n. n) nats", "StrG", 3))
    assert v.equal and v.mode == EXACT
    w = sem_equal(s, 3, den("nats", "StrG", 3), den("toggle", "StrG", 3))
    assert not w.equal and w.mode == EXACT and w.witness


def test_sem_equal_ignores_beyond_index():
    # the two streams differ only at position 1, invisible at index 1
    s = ty("StrG")
    assert sem_equal(s, 1, den("nats", "StrG", 1), den("zeros", "StrG", 1)).equal
    assert not sem_equal(s, 2, den("nats", "StrG", 2), den("zeros", "StrG", 2)).equal


def test_plus_g_commutes_at_four():
    s = ty("StrG")
    v = sem_equal(s, 4, den("plus_g nats toggle", "StrG", 4), den("plus_g toggle nats", "StrG", 4))
    assert v.equal and v.mode == EXACT


def test_functions_compare_sampled():
    a = ty("Nat -> Nat")
    v = sem_equal(a, 2, den("\\n. n + 0", "Nat -> Nat", 2), den("\\n. n", "Nat -> Nat", 2))
    assert v.equal and v.mode == SAMPLED
    w = sem_equal(a, 2, den("\\n. succ n", "Nat -> Nat", 2), den("\\n. n", "Nat -> Nat", 2))
    assert not w.equal and w.mode == SAMPLED


def test_boxes_compare_sampled():
    a = ty("#StrG")
    v = sem_equal(a, 1, den("box iota. nats", "#StrG", 1), den("box iota. toggle", "#StrG", 1))
    assert not v.equal and v.mode == SAMPLED


# ---------------------------------------------------------------- the recursive-type isomorphism


def test_unfold_iso_examples():
    s = ty("StrG")
    x = guarded(1, 2)
    assert unfold_iso(s, 2, x) == PairVal(NatVal(1), LaterVal(guarded(2)))
    assert fold_iso(s, 2, unfold_iso(s, 2, x)) == x
    with pytest.raises(SemanticError):
        unfold_iso(s, 1, NatVal(0))


@given(st.lists(st.integers(0, 9), min_size=1, max_size=6))
def test_unfold_fold_round_trip(heads):
    s = ty("StrG")
    x = guarded(*heads)
    i = len(heads)
    assert fold_iso(s, i, unfold_iso(s, i, x)) == x
    assert unfold_iso(s, i, fold_iso(s, i, x.body)) == x.body


# ---------------------------------------------------------------- invariants


@settings(max_examples=60)
@given(closed_terms(), st.integers(1, 3))
def test_naturality(pair, i):
    a, surface = pair
    t = check({}, surface, a)
    assert sem_equal(a, i, restrict(a, i, denote(t, i + 1)), denote(t, i)).equal


@settings(max_examples=60)
@given(closed_terms(), st.integers(1, 3))
def test_soundness_along_traces(pair, i):
    a, surface = pair
    tr = trace(check({}, surface, a))
    first = denote(tr.terms[0], i)
    for u in tr.terms[1:]:
        assert sem_equal(a, i, first, denote(u, i)).equal


@settings(max_examples=60)
@given(open_instances(), st.integers(1, 3))
def test_substitution_lemma(inst, i):
    a, b, t, u = inst
    t_el, u_el = check({"x": b}, t, a), check({}, u, b)
    env = SemEnv(i).extend("x", b, denote(u_el, i))
    assert sem_equal(a, i, denote(subst_term(t_el, {"x": u_el}), i), denote_term(t_el, i, env)).equal


@settings(max_examples=60)
@given(constant_types(), st.data())
def test_constant_types_shift_between_indices(a, data):
    assert is_constant(a)
    surface = TermGen(DrawChooser(data.draw)).term(a, {}, 10)
    t = check({}, surface, a)
    for k in (1, 2, 3):
        assert sem_equal(a, k, shift(a, denote(t, 1), 1, k), denote(t, k)).equal
        assert sem_equal(a, 1, shift(a, denote(t, k), k, 1), denote(t, 1)).equal


@pytest.mark.parametrize("name", ["nats", "toggle", "paperfolds", "zeros"])
def test_prefix_matches_evaluation(name):
    s = ty("StrG")
    heads = stream_prefix(s, 5, denote(prelude().term(name), 5))
    assert [h.n for h in heads] == force_guarded_stream(prelude().term(name), 5)


def test_global_section_is_thread_safe():
    calls = []

    def fn(j):
        calls.append(j)
        return NatVal(j * j)

    g = GlobalSection(fn)
    results = []

    def worker():
        results.append([g.at(j).n for j in range(1, 30)])

    threads = [threading.Thread(target=worker) for _ in range(8)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert all(r == [j * j for j in range(1, 30)] for r in results)
    assert all(g.at(j) is g.at(j) for j in range(1, 30))
    with pytest.raises(SemanticError):
        g.at(0)
