"""Decidable behavioral checks with counterexample reporting.

Each check enumerates its quantifier domain in a fixed canonical order
(subsets by size then lexicographic, items sorted) and stops at the
first violation, so verdicts are deterministic across runs.  A verdict
carries the number of instances compared and, on failure, a
counterexample whose fields re-evaluate against the dataset.

Two properties make a set of items a category:

* ratio independence: choice-probability ratios inside the set are
  unchanged when items from outside the set are added;
* outside neutrality: from the outside the set's members are perfect
  substitutes; an external item's probability depends only on which
  outside items accompany the set, not on which members are present.

A weak category needs ratio independence only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .core import Menu, StochasticChoice, ZERO, canon_menu, eq_within, strictly_less, subsets
from .errors import NotPositiveError


def _frac(value: Fraction | None) -> str | None:
    return None if value is None else str(value)


@dataclass(frozen=True)
class Counterexample:
    """Site of a failed check; only the fields the axiom uses are set."""

    menu_s: Menu | None = None
    menu_t: Menu | None = None
    menu_e: Menu | None = None
    menu_a: Menu | None = None
    menu_b: Menu | None = None
    item_a: str | None = None
    item_b: str | None = None
    item_x: str | None = None
    class_label: str | None = None
    lhs: Fraction | None = None
    rhs: Fraction | None = None

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {}
        for field, value in (
            ("menu_s", self.menu_s),
            ("menu_t", self.menu_t),
            ("menu_e", self.menu_e),
            ("menu_a", self.menu_a),
            ("menu_b", self.menu_b),
        ):
            if value is not None:
                doc[field] = list(value)
        for field, value in (
            ("item_a", self.item_a),
            ("item_b", self.item_b),
            ("item_x", self.item_x),
            ("class_label", self.class_label),
        ):
            if value is not None:
                doc[field] = value
        doc["lhs"] = _frac(self.lhs)
        doc["rhs"] = _frac(self.rhs)
        return doc


@dataclass(frozen=True)
class AxiomVerdict:
    """Outcome of one behavioral check on one candidate set.

    ``holds`` is true exactly when ``counterexample`` is absent.
    ``non_trivial`` is set by the category checks: whether the subject
    satisfies 1 < |subject| < |universe|.
    """

    axiom: str
    subject: Menu
    holds: bool
    witnesses_checked: int
    counterexample: Counterexample | None = None
    non_trivial: bool | None = None

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "axiom": self.axiom,
            "subject": list(self.subject),
            "holds": self.holds,
            "witnesses_checked": self.witnesses_checked,
        }
        if self.non_trivial is not None:
            doc["non_trivial"] = self.non_trivial
        if self.counterexample is not None:
            doc["counterexample"] = self.counterexample.to_json_dict()
        return doc


def check_ratio_independence(
    p: StochasticChoice, candidate: Any, epsilon: Fraction = ZERO
) -> AxiomVerdict:
    """Within-set choice ratios survive the addition of outside items.

    For every S inside the candidate with at least two items, every
    nonempty extension E from outside, and every adjacent item pair in
    S, the ratio p(a,S)/p(b,S) must equal p(a,S∪E)/p(b,S∪E).  Adjacent
    pairs suffice because ratio equalities chain along the sorted order.
    The comparison itself is done cross-multiplied, avoiding division.
    """
    if not p.positive:
        raise NotPositiveError()
    c = canon_menu(candidate)
    outside = tuple(x for x in p.universe if x not in c)
    checked = 0
    for s in subsets(c, 2):
        base = p.row(s)
        for e in subsets(outside, 1):
            extended = p.row(s + e)
            for a, b in zip(s, s[1:]):
                checked += 1
                lhs_cross = base[a] * extended[b]
                rhs_cross = base[b] * extended[a]
                if not eq_within(lhs_cross, rhs_cross, epsilon):
                    ce = Counterexample(
                        menu_s=s,
                        menu_e=e,
                        item_a=a,
                        item_b=b,
                        lhs=base[a] / base[b],
                        rhs=extended[a] / extended[b],
                    )
                    return AxiomVerdict("ratio-independence", c, False, checked, ce)
    return AxiomVerdict("ratio-independence", c, True, checked)


def check_outside_neutrality(
    p: StochasticChoice, candidate: Any, epsilon: Fraction = ZERO
) -> AxiomVerdict:
    """Outside items cannot tell the candidate's members apart.

    For every nonempty E outside the candidate, every x in E and every
    nonempty S inside: p(x, S∪E) = p(x, C∪E).  Vacuously true when the
    candidate is the whole universe.
    """
    c = canon_menu(candidate)
    outside = tuple(x for x in p.universe if x not in c)
    checked = 0
    for e in subsets(outside, 1):
        full_row = p.row(c + e)
        for x in e:
            reference = full_row[x]
            for s in subsets(c, 1, len(c) - 1):
                checked += 1
                value = p.prob(x, s + e)
                if not eq_within(value, reference, epsilon):
                    ce = Counterexample(
                        menu_s=s, menu_e=e, item_x=x, lhs=value, rhs=reference
                    )
                    return AxiomVerdict("outside-neutrality", c, False, checked, ce)
    return AxiomVerdict("outside-neutrality", c, True, checked)


def _with_triviality(p: StochasticChoice, verdict: AxiomVerdict, axiom: str) -> AxiomVerdict:
    non_trivial = 1 < len(verdict.subject) < p.n
    return AxiomVerdict(
        axiom,
        verdict.subject,
        verdict.holds,
        verdict.witnesses_checked,
        verdict.counterexample,
        non_trivial,
    )


def is_category(p: StochasticChoice, candidate: Any, epsilon: Fraction = ZERO) -> AxiomVerdict:
    """Ratio independence and outside neutrality together."""
    ratio = check_ratio_independence(p, candidate, epsilon)
    if not ratio.holds:
        return _with_triviality(p, ratio, "category")
    neutral = check_outside_neutrality(p, candidate, epsilon)
    merged = AxiomVerdict(
        "category",
        neutral.subject,
        neutral.holds,
        ratio.witnesses_checked + neutral.witnesses_checked,
        neutral.counterexample,
    )
    return _with_triviality(p, merged, "category")


def is_weak_category(p: StochasticChoice, candidate: Any, epsilon: Fraction = ZERO) -> AxiomVerdict:
    """Ratio independence alone."""
    ratio = check_ratio_independence(p, candidate, epsilon)
    return _with_triviality(p, ratio, "weak-category")


def check_local_iia(p: StochasticChoice, candidate: Any, epsilon: Fraction = ZERO) -> AxiomVerdict:
    """Pairwise ratios inside the candidate are fixed across all menus.

    Stronger than ratio independence: the comparison menus include ones
    that add or remove other members of the candidate itself.
    """
    if not p.positive:
        raise NotPositiveError()
    c = canon_menu(candidate)
    rest = tuple(x for x in p.universe if x not in c)
    checked = 0
    for idx, a in enumerate(c):
        for b in c[idx + 1:]:
            pair = canon_menu((a, b))
            pair_row = p.row(pair)
            others = tuple(x for x in p.universe if x not in pair)
            for extra in subsets(others, 1):
                menu = canon_menu(pair + extra)
                row = p.row(menu)
                checked += 1
                if not eq_within(pair_row[a] * row[b], pair_row[b] * row[a], epsilon):
                    ce = Counterexample(
                        menu_a=menu,
                        item_a=a,
                        item_b=b,
                        lhs=pair_row[a] / pair_row[b],
                        rhs=row[a] / row[b],
                    )
                    return AxiomVerdict("local-iia", c, False, checked, ce)
    del rest
    return AxiomVerdict("local-iia", c, True, checked)


def _content_effect(
    p: StochasticChoice,
    candidate: Any,
    epsilon: Fraction,
    axiom: str,
    outside_gains: bool,
) -> AxiomVerdict:
    """Shared walk for the strict content-effect checks.

    Compares p(x, S∪E) against p(x, T∪E) over nested pairs S ⊊ T inside
    the candidate, stepping one added member at a time (strict
    inequalities chain along such steps).  ``outside_gains`` selects the
    direction: True demands the outside item gain probability as the
    candidate's content grows, False demands it lose.
    """
    g = canon_menu(candidate)
    outside = tuple(x for x in p.universe if x not in g)
    checked = 0
    for s in subsets(g, 1, len(g) - 1):
        remaining = tuple(x for x in g if x not in s)
        for added in remaining:
            t = canon_menu(s + (added,))
            for e in subsets(outside, 1):
                small = p.row(s + e)
                large = p.row(t + e)
                for x in e:
                    checked += 1
                    small_v, large_v = small[x], large[x]
                    ok = (
                        strictly_less(small_v, large_v, epsilon)
                        if outside_gains
                        else strictly_less(large_v, small_v, epsilon)
                    )
                    if not ok:
                        ce = Counterexample(
                            menu_s=s, menu_t=t, menu_e=e, item_x=x, lhs=small_v, rhs=large_v
                        )
                        return AxiomVerdict(axiom, g, False, checked, ce)
    return AxiomVerdict(axiom, g, True, checked)


def check_choice_overload(
    p: StochasticChoice, candidate: Any, epsilon: Fraction = ZERO
) -> AxiomVerdict:
    """The candidate set loses first-stage weight as its content grows.

    Observable footprint: every outside item is chosen strictly more
    often when more of the candidate's members are offered, so
    p(x, S∪E) < p(x, T∪E) for S ⊊ T inside the candidate.
    """
    return _content_effect(p, candidate, epsilon, "choice-overload", outside_gains=True)


def check_content_monotonicity(
    p: StochasticChoice, candidate: Any, epsilon: Fraction = ZERO
) -> AxiomVerdict:
    """The candidate set gains first-stage weight as its content grows.

    Mirror image of choice overload: p(x, S∪E) > p(x, T∪E) for S ⊊ T.
    """
    return _content_effect(p, candidate, epsilon, "content-monotonicity", outside_gains=False)


def reevaluate(p: StochasticChoice, verdict: AxiomVerdict, epsilon: Fraction = ZERO) -> bool:
    """Check that a failed verdict's counterexample reproduces against `p`.

    Returns True when the recorded quantities match a fresh evaluation
    and the recorded violation is real.  Used by the CLI certificate
    replay and by the test suite.
    """
    ce = verdict.counterexample
    if verdict.holds or ce is None:
        return verdict.holds
    axiom = verdict.axiom
    if axiom in ("ratio-independence", "weak-category") or (
        axiom == "category" and ce.item_a is not None
    ):
        assert ce.menu_s is not None and ce.menu_e is not None
        assert ce.item_a is not None and ce.item_b is not None
        lhs = p.prob(ce.item_a, ce.menu_s) / p.prob(ce.item_b, ce.menu_s)
        joined = ce.menu_s + ce.menu_e
        rhs = p.prob(ce.item_a, joined) / p.prob(ce.item_b, joined)
        return lhs == ce.lhs and rhs == ce.rhs and not eq_within(lhs, rhs, epsilon)
    if axiom in ("outside-neutrality", "category"):
        assert ce.menu_s is not None and ce.menu_e is not None and ce.item_x is not None
        lhs = p.prob(ce.item_x, ce.menu_s + ce.menu_e)
        rhs = p.prob(ce.item_x, verdict.subject + ce.menu_e)
        return lhs == ce.lhs and rhs == ce.rhs and not eq_within(lhs, rhs, epsilon)
    if axiom == "local-iia":
        assert ce.menu_a is not None and ce.item_a is not None and ce.item_b is not None
        pair = canon_menu((ce.item_a, ce.item_b))
        lhs = p.prob(ce.item_a, pair) / p.prob(ce.item_b, pair)
        rhs = p.prob(ce.item_a, ce.menu_a) / p.prob(ce.item_b, ce.menu_a)
        return lhs == ce.lhs and rhs == ce.rhs and not eq_within(lhs, rhs, epsilon)
    if axiom in ("choice-overload", "content-monotonicity"):
        assert ce.menu_s is not None and ce.menu_t is not None
        assert ce.menu_e is not None and ce.item_x is not None
        small = p.prob(ce.item_x, ce.menu_s + ce.menu_e)
        large = p.prob(ce.item_x, ce.menu_t + ce.menu_e)
        if small != ce.lhs or large != ce.rhs:
            return False
        if axiom == "choice-overload":
            return not strictly_less(small, large, epsilon)
        return not strictly_less(large, small, epsilon)
    if axiom == "mass-invariance":
        assert ce.menu_a is not None and ce.menu_b is not None
        assert ce.class_label is not None and ce.menu_s is not None
        lhs = p.event_prob(ce.menu_s, ce.menu_a)
        rhs = p.event_prob(ce.menu_s, ce.menu_b)
        return lhs == ce.lhs and rhs == ce.rhs and not eq_within(lhs, rhs, epsilon)
    raise ValueError(f"unknown axiom {axiom!r}")
