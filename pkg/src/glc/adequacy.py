"""The logical relation between denotations and closed terms.

``rel(a, t, A, i)`` decides ``a R^i_A t`` clause by clause: ``t`` is
evaluated and the shape of its value checked, then the components are
related recursively. Two clauses quantify over infinite sets and are
sampled, which makes their verdicts ``sampled`` rather than ``exact``:

* ``A -> B``: "for all j <= i and related (b, u)" ranges over the
  denotations of the sample terms of ``A``;
* ``#A``: "for all j" is cut off at ``i + BOX_SLACK``.

Every recursive call is checked against the well-founded measure
(box depth, index, unguarded size), compared lexicographically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from glc.denote import BOX_SLACK, EXACT, SAMPLED, SemElem, denote, render
from glc.evaluator import BudgetExceeded, StuckError, evaluate
from glc.pretty import pretty_term, pretty_type
from glc.samples import DEFAULT_BUDGET as SAMPLE_BUDGET
from glc.samples import sample_pairs
from glc.syntax import (
    Arrow,
    Box,
    BoxI,
    Fold,
    Inj,
    Lam,
    Later,
    Mu,
    Next,
    Pair,
    Prod,
    Sum,
    TEmpty,
    TNat,
    TUnit,
    Term,
    Type,
    Unit,
    as_numeral,
    box_depth,
    desugar_iota,
    subst_term,
    unfold_mu,
    usize,
)


def measure(a: Type, i: int) -> tuple[int, int, int]:
    """The lexicographic measure that every recursive clause decreases.

    Box depth joins with ``max`` here: with ``min``, ``Nat -> #Nat`` has
    depth 0 while its codomain has depth 1, so the arrow clause would
    increase the measure.
    """
    return (box_depth(a, join=max), i, usize(a))


class MeasureViolation(AssertionError):
    pass


@dataclass
class MeasureMonitor:
    """Counts measure checks across a run of ``rel``."""

    assertions: int = 0
    violations: int = 0
    strict: bool = True

    def check(self, parent: tuple, child: tuple) -> None:
        self.assertions += 1
        if not child < parent:
            self.violations += 1
            if self.strict:
                raise MeasureViolation(f"measure {child} does not decrease from {parent}")


@dataclass(frozen=True)
class RelVerdict:
    holds: bool
    mode: str
    index: int
    type: Type
    witness: Optional[str] = None
    inconclusive: bool = False

    def __bool__(self) -> bool:
        return self.holds

    def describe(self, aliases=None) -> str:
        status = "inconclusive" if self.inconclusive else ("holds" if self.holds else "fails")
        line = f"{status} ({self.mode}) at index {self.index}, type {pretty_type(self.type, aliases)}"
        return line if self.witness is None else f"{line}: {self.witness}"


@dataclass
class Relation:
    """One run of the relation, sharing a monitor, a step budget and a sample size."""

    budget: Optional[int] = None
    samples: int = SAMPLE_BUDGET
    monitor: MeasureMonitor = field(default_factory=MeasureMonitor)
    # antecedents of the arrow clause, keyed by sample term identity
    _known: dict = field(default_factory=dict, repr=False)

    def rel(self, a: SemElem, t: Term, a_type: Type, i: int) -> RelVerdict:
        return self._rel(a, t, a_type, i, None)

    def _child(self, parent, a, t, a_type, i) -> RelVerdict:
        self.monitor.check(parent, measure(a_type, i))
        return self._rel(a, t, a_type, i, parent)

    def _rel(self, a, t, a_type, i, parent) -> RelVerdict:
        here = measure(a_type, i)

        def verdict(ok: bool, mode: str = EXACT, witness: Optional[str] = None) -> RelVerdict:
            return RelVerdict(ok, mode, i, a_type, witness)

        try:
            v = evaluate(t, self.budget)
        except BudgetExceeded as e:
            return RelVerdict(False, EXACT, i, a_type, str(e), inconclusive=True)
        except StuckError as e:
            return verdict(False, witness=f"{pretty_term(t)} is stuck: {e.reason}")

        def shape(expected: str) -> RelVerdict:
            return verdict(False, witness=f"expected {expected}, {pretty_term(t)} evaluates to {pretty_term(v)}")

        match a_type:
            case TUnit():
                return verdict(True) if isinstance(v, Unit) else shape("()")
            case TNat():
                n = as_numeral(v)
                if n is None:
                    return shape("a numeral")
                return verdict(n == a.n, witness=None if n == a.n else f"denotation {a.n}, value {n}")
            case TEmpty():
                return verdict(False, witness="the empty type has no elements")
            case Prod(l, r):
                if not isinstance(v, Pair):
                    return shape("a pair")
                return self._all(here, [(a.left, v.left, l, i), (a.right, v.right, r, i)], verdict)
            case Sum(l, r):
                if not isinstance(v, Inj):
                    return shape("an injection")
                if v.index != a.index:
                    return verdict(False, witness=f"denotation in{a.index}, value in{v.index}")
                return self._all(here, [(a.body, v.body, l if a.index == 1 else r, i)], verdict)
            case Mu():
                if not isinstance(v, Fold):
                    return shape("a fold")
                return self._all(here, [(a.body, v.body, unfold_mu(a_type), i)], verdict)
            case Later(b):
                if not isinstance(v, Next):
                    return shape("next")
                if i == 1:
                    return verdict(True)
                return self._all(here, [(a.body, v.body, b, i - 1)], verdict)
            case Box(b):
                if not isinstance(v, BoxI):
                    return shape("box")
                e = desugar_iota(v)
                u = subst_term(e.body, dict(e.subst))
                checks = [(a.at(j), u, b, j) for j in range(1, i + BOX_SLACK + 1)]
                return self._all(here, checks, verdict, SAMPLED)
            case Arrow(dom, cod):
                if not isinstance(v, Lam):
                    return shape("a lambda")
                for j in range(1, i + 1):
                    for b, u in sample_pairs(dom, j, self.samples):
                        key = (id(u), dom, j)
                        pre = self._known.get(key)
                        if pre is None:
                            pre = self._known[key] = self._child(here, b, u, dom, j)
                        else:
                            self.monitor.check(here, measure(dom, j))
                        if pre.inconclusive:
                            return pre
                        if not pre.holds:
                            continue
                        post = self._child(here, a.apply(j, b), subst_term(v.body, {v.var: u}), cod, j)
                        if not post.holds:
                            where = f"at index {j} on argument {pretty_term(u)}"
                            return RelVerdict(False, SAMPLED, i, a_type, f"{where}: {post.witness}", post.inconclusive)
                return verdict(True, SAMPLED)
        raise TypeError(f"no relation at type {a_type}")

    def _all(self, here, checks, verdict, mode: str = EXACT) -> RelVerdict:
        for a, t, a_type, j in checks:
            sub = self._child(here, a, t, a_type, j)
            if sub.mode == SAMPLED:
                mode = SAMPLED
            if not sub.holds:
                return RelVerdict(False, mode, here[1], sub.type, sub.witness, sub.inconclusive)
        return verdict(True, mode)


def rel(
    a: SemElem,
    t: Term,
    a_type: Type,
    i: int,
    samples: int = SAMPLE_BUDGET,
    budget: Optional[int] = None,
    monitor: Optional[MeasureMonitor] = None,
) -> RelVerdict:
    """Decide ``a R^i_A t`` (sampled at function and box types)."""
    r = Relation(budget, samples, monitor if monitor is not None else MeasureMonitor())
    return r.rel(a, t, a_type, i)


def check_fundamental(
    t: Term,
    a_type: Type,
    i: int,
    samples: int = SAMPLE_BUDGET,
    budget: Optional[int] = None,
    monitor: Optional[MeasureMonitor] = None,
) -> RelVerdict:
    """``[[t]]_i R^i_A t`` for a closed elaborated term ``t : A``."""
    return rel(denote(t, i), t, a_type, i, samples, budget, monitor)


def check_adequacy_nat(t: Term, i: int, budget: Optional[int] = None) -> bool:
    """The denotation of a closed ``t : Nat`` is the numeral ``t`` evaluates to."""
    return denote(t, i).n == as_numeral(evaluate(t, budget))


def explain_nat(t: Term, i: int, budget: Optional[int] = None) -> str:
    """A human-readable comparison used in failure messages."""
    return f"denotation {render(TNat(), i, denote(t, i))}, value {pretty_term(evaluate(t, budget))}"
