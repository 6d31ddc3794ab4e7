"""Populations of deterministic two-stage choices.

A resolvable choice is a deterministic choice function that factors
through a partition: a base choice picks a class among those offered,
and a fiber choice per class picks an item within it.  A probability
distribution over the resolvable choices induces a stochastic choice by
menu-wise aggregation.  This module enumerates the resolvable choices,
induces and represents stochastic choices, and decides when a given
choice is generated by such a population.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod
from typing import Any

from .axioms import AxiomVerdict, Counterexample
from .categorize import Decomposition, Partition, decompose
from .core import Menu, StochasticChoice, ZERO, all_menus, eq_within
from .errors import (
    DegeneratePartitionError,
    MassInvarianceViolatedError,
    NotPositiveError,
    NotRepresentableError,
    OmegaIllDefinedError,
    PartitionError,
    RecompositionMismatchError,
    SizeBoundError,
)
from .exactlp import solve_equalities
from .limits import MAX_POPULATION, MAX_SOLVE_VARIABLES, effective_bound

ONE = Fraction(1)


@dataclass(frozen=True)
class ResolvableChoice:
    """One deterministic two-stage choice, stored in factored form.

    `base[k]` is the label chosen on the k-th index menu (canonical
    order over label subsets); `fibers[i][k]` is the item chosen on the
    k-th menu within class i.  The flat choice on a menu A follows by
    first routing through the base choice on the classes present in A,
    then applying that class's fiber choice to A's overlap with it.
    """

    partition: Partition
    base: tuple[str, ...]
    fibers: tuple[tuple[str, ...], ...]

    def base_choice(self, index_menu: Menu) -> str:
        return self.base[self.partition.index_menu_position(index_menu)]

    def fiber_choice(self, label: str, menu: Menu) -> str:
        idx = self.partition.class_index(label)
        return self.fibers[idx][self.partition.class_menu_position(idx, menu)]

    def choose(self, menu: Menu) -> str:
        label = self.base_choice(self.partition.image(menu))
        inner = self.partition.within_class(menu, label)
        return self.fiber_choice(label, inner)

    def flat_table(self) -> dict[Menu, str]:
        return {menu: self.choose(menu) for menu in all_menus(self.partition.universe)}

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "base": [
                {"menu": list(m), "choice": self.base[k]}
                for k, m in enumerate(self.partition.index_menus)
            ],
            "fibers": {
                label: [
                    {"menu": list(m), "choice": self.fibers[i][k]}
                    for k, m in enumerate(self.partition.class_menus(i))
                ]
                for i, label in enumerate(self.partition.labels)
            },
        }


def resolvable_count(partition: Partition) -> int:
    """Exact size of the resolvable family: product of all menu sizes."""
    base = prod(len(m) for m in partition.index_menus)
    fibers = prod(
        len(m) for i in range(partition.k) for m in partition.class_menus(i)
    )
    return base * fibers


def enumerate_resolvable(partition: Partition, limit: int | None = None) -> list[ResolvableChoice]:
    """Complete, duplicate-free enumeration in lexicographic order.

    The order is lexicographic over the concatenated (base, fiber)
    choice tuples with menus in canonical order, so serialized
    populations are stable across runs.
    """
    count = resolvable_count(partition)
    bound = effective_bound(MAX_POPULATION, limit)
    if count > bound:
        raise SizeBoundError("resolvable choice family", count, bound)
    base_options = [m for m in partition.index_menus]
    fiber_options = [partition.class_menus(i) for i in range(partition.k)]
    result: list[ResolvableChoice] = []
    for base in product(*base_options):
        for combo in product(*(product(*menus) for menus in fiber_options)):
            result.append(ResolvableChoice(partition, base, combo))
    return result


@dataclass(frozen=True)
class PopulationDistribution:
    """Nonnegative weights over resolvable choices, summing to one."""

    partition: Partition
    weights: dict[ResolvableChoice, Fraction]

    def validate(self) -> None:
        total = ZERO
        for rc, weight in self.weights.items():
            if rc.partition != self.partition:
                raise PartitionError("population mixes partitions")
            if weight < 0:
                raise ValueError("negative population weight")
            total += weight
        if total != 1:
            raise ValueError(f"population weights sum to {total}, expected 1")

    def support(self) -> list[ResolvableChoice]:
        return [rc for rc, w in sorted(
            self.weights.items(), key=lambda kv: (kv[0].base, kv[0].fibers)
        ) if w > 0]

    def to_json_dict(self) -> dict[str, Any]:
        entries = []
        for rc in self.support():
            doc = rc.to_json_dict()
            doc["weight"] = str(self.weights[rc])
            entries.append(doc)
        return {"partition": self.partition.to_json(), "choices": entries}


def induce_choice(q: PopulationDistribution) -> StochasticChoice:
    """Aggregate a population menu-wise into a stochastic choice.

    The result is full-domain but not necessarily positive; positivity
    is recomputed and reported on the result.
    """
    q.validate()
    universe = q.partition.universe
    table: dict[Menu, dict[str, Fraction]] = {
        menu: {item: ZERO for item in menu} for menu in all_menus(universe)
    }
    support = [(rc, w) for rc, w in q.weights.items() if w > 0]
    for menu, row in table.items():
        for rc, weight in support:
            row[rc.choose(menu)] += weight
    return StochasticChoice.from_table(universe, table)


def _product_population(d: Decomposition) -> PopulationDistribution:
    """Independent-coordinates population from a two-stage decomposition."""
    partition = d.partition
    weights: dict[ResolvableChoice, Fraction] = {}
    for rc in enumerate_resolvable(partition):
        w = ONE
        for k, index_menu in enumerate(partition.index_menus):
            w *= d.omega.prob(rc.base[k], index_menu)
        for i, label in enumerate(partition.labels):
            sigma = d.sigmas[label]
            for k, menu in enumerate(partition.class_menus(i)):
                w *= sigma.prob(rc.fibers[i][k], menu)
        weights[rc] = w
    return PopulationDistribution(partition, weights)


def population_from_decomposition(d: Decomposition) -> PopulationDistribution:
    """The canonical generating population of a two-stage choice.

    Base and fiber coordinates are drawn independently with the
    decomposition's own probabilities, and the induced choice of the
    result reproduces the composed choice exactly.
    """
    if not d.non_degenerate:
        raise DegeneratePartitionError()
    population = _product_population(d)
    population.validate()
    return population


def check_mass_invariance(
    p: StochasticChoice, partition: Partition, epsilon: Fraction = ZERO
) -> AxiomVerdict:
    """Class masses agree across menus with the same class image.

    This is what aggregation over resolvable choices forces at the class
    level: the probability of landing in a class can only depend on
    which classes are offered.
    """
    if partition.universe != p.universe:
        raise PartitionError("partition does not cover the universe")
    groups: dict[Menu, list[Menu]] = {}
    for menu in all_menus(p.universe):
        groups.setdefault(partition.image(menu), []).append(menu)
    checked = 0
    for image in sorted(groups, key=lambda m: (len(m), m)):
        menus = groups[image]
        first = menus[0]
        reference = {
            label: p.event_prob(partition.class_of_label(label), first) for label in image
        }
        for other in menus[1:]:
            for label in image:
                checked += 1
                mass = p.event_prob(partition.class_of_label(label), other)
                if not eq_within(mass, reference[label], epsilon):
                    ce = Counterexample(
                        menu_a=first,
                        menu_b=other,
                        menu_s=partition.class_of_label(label),
                        class_label=label,
                        lhs=reference[label],
                        rhs=mass,
                    )
                    return AxiomVerdict("mass-invariance", p.universe, False, checked, ce)
    return AxiomVerdict("mass-invariance", p.universe, True, checked)


def solve_population(
    p: StochasticChoice,
    partition: Partition,
    epsilon: Fraction = ZERO,
    limit: int | None = None,
) -> PopulationDistribution:
    """Find a population over resolvable choices that induces `p` exactly.

    Mass invariance is a necessary condition and is checked first.  When
    the choice factors in the strict two-stage sense the independent
    product population is returned directly.  Otherwise the menu
    marginals are solved as an exact linear-feasibility problem over the
    enumerated resolvable choices; a Farkas-infeasible system means no
    generating population exists (`NotRepresentableError`), which mass
    invariance alone does not rule out.  The round trip
    induce(result) == p is verified before returning.
    """
    if not p.positive:
        raise NotPositiveError("population synthesis needs positive probabilities")
    verdict = check_mass_invariance(p, partition, epsilon)
    if not verdict.holds:
        raise MassInvarianceViolatedError(verdict.counterexample)

    try:
        d = decompose(p, partition, epsilon)
    except (OmegaIllDefinedError, RecompositionMismatchError):
        d = None
    if d is not None:
        population = _product_population(d)
        population.validate()
        if induce_choice(population) != p:
            raise NotRepresentableError("product population failed the round trip")
        return population

    count = resolvable_count(partition)
    bound = effective_bound(MAX_SOLVE_VARIABLES, limit)
    if count > bound:
        raise SizeBoundError("resolvable choice family (feasibility solve)", count, bound)
    choices = enumerate_resolvable(partition)
    flat = [rc.flat_table() for rc in choices]

    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    seen: dict[frozenset[int], tuple[Fraction, Menu, str]] = {}
    for menu in all_menus(p.universe):
        for item in menu[:-1] if len(menu) > 1 else ():
            support = frozenset(k for k, table in enumerate(flat) if table[menu] == item)
            value = p.prob(item, menu)
            prior = seen.get(support)
            if prior is not None:
                if prior[0] != value:
                    raise NotRepresentableError(
                        f"menus {list(prior[1])} and {list(menu)} force the same population "
                        f"event to {prior[0]} and {value}"
                    )
                continue
            seen[support] = (value, menu, item)
            rows.append([ONE if k in support else ZERO for k in range(len(choices))])
            rhs.append(value)
    rows.append([ONE] * len(choices))
    rhs.append(ONE)

    result = solve_equalities(rows, rhs)
    if not result.feasible:
        raise NotRepresentableError(
            "no distribution over resolvable choices matches the menu marginals"
        )
    weights = {
        choices[k]: value
        for k, value in enumerate(result.solution or [])
        if value != 0
    }
    population = PopulationDistribution(partition, weights)
    population.validate()
    if induce_choice(population) != p:
        raise NotRepresentableError("solved population failed the round trip")
    return population


def base_marginal(q: PopulationDistribution) -> dict[tuple[str, ...], Fraction]:
    """Distribution of the base coordinate vector across the population."""
    out: dict[tuple[str, ...], Fraction] = {}
    for rc, w in q.weights.items():
        if w > 0:
            out[rc.base] = out.get(rc.base, ZERO) + w
    return out


def fiber_marginal(q: PopulationDistribution, label: str) -> dict[tuple[str, ...], Fraction]:
    """Distribution of one class's fiber coordinate vector."""
    idx = q.partition.class_index(label)
    out: dict[tuple[str, ...], Fraction] = {}
    for rc, w in q.weights.items():
        if w > 0:
            key = rc.fibers[idx]
            out[key] = out.get(key, ZERO) + w
    return out
