"""Shared golden datasets and random-instance builders.

Golden probabilities are frozen here as exact fractions; the random
builders are all driven by seeded `random.Random` instances so every
run exercises the same cases.
"""

from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from revealed_categories import (
    Decomposition,
    Partition,
    PopulationDistribution,
    RumRepresentation,
    StochasticChoice,
    all_menus,
    compose,
    enumerate_resolvable,
)

# ---------------------------------------------------------------------------
# golden datasets
# ---------------------------------------------------------------------------


def _sc(universe, rows):
    return StochasticChoice.from_table(universe, rows)


@pytest.fixture(scope="session")
def falsifiability_data() -> StochasticChoice:
    """3-item dataset on which no pair forms a category."""
    return _sc(
        "abc",
        {
            ("a",): {"a": 1},
            ("b",): {"b": 1},
            ("c",): {"c": 1},
            ("a", "b"): {"a": F(1, 2), "b": F(1, 2)},
            ("b", "c"): {"b": F(1, 3), "c": F(2, 3)},
            ("a", "c"): {"a": F(3, 4), "c": F(1, 4)},
            ("a", "b", "c"): {"a": F(1, 8), "b": F(1, 6), "c": F(17, 24)},
        },
    )


@pytest.fixture(scope="session")
def independence_data_1() -> StochasticChoice:
    """Ratio independence holds for {a,b,c} while outside neutrality fails.

    The published source rows for {b,x} and {c,x} do not sum to one; the
    complement entries (5/8) here exist only to complete the mandatory
    menu domain, and no assertion in the suite reads them.
    """
    return _sc(
        "abcx",
        {
            ("a",): {"a": 1},
            ("b",): {"b": 1},
            ("c",): {"c": 1},
            ("x",): {"x": 1},
            ("a", "b"): {"a": F(2, 5), "b": F(3, 5)},
            ("a", "c"): {"a": F(3, 4), "c": F(1, 4)},
            ("b", "c"): {"b": F(1, 3), "c": F(2, 3)},
            ("a", "b", "c"): {"a": F(1, 5), "b": F(3, 5), "c": F(1, 5)},
            ("a", "x"): {"a": F(1, 3), "x": F(2, 3)},
            ("b", "x"): {"b": F(5, 8), "x": F(3, 8)},
            ("c", "x"): {"c": F(5, 8), "x": F(3, 8)},
            ("a", "b", "x"): {"a": F(1, 4), "b": F(3, 8), "x": F(3, 8)},
            ("a", "c", "x"): {"a": F(15, 32), "c": F(5, 32), "x": F(3, 8)},
            ("b", "c", "x"): {"b": F(5, 24), "c": F(10, 24), "x": F(3, 8)},
            ("a", "b", "c", "x"): {"a": F(1, 8), "b": F(3, 8), "c": F(1, 8), "x": F(3, 8)},
        },
    )


@pytest.fixture(scope="session")
def independence_data_2() -> StochasticChoice:
    """Outside neutrality holds for {a,b} while ratio independence fails."""
    return _sc(
        "abx",
        {
            ("a",): {"a": 1},
            ("b",): {"b": 1},
            ("x",): {"x": 1},
            ("a", "b"): {"a": F(2, 5), "b": F(3, 5)},
            ("b", "x"): {"b": F(1, 3), "x": F(2, 3)},
            ("a", "x"): {"a": F(1, 3), "x": F(2, 3)},
            ("a", "b", "x"): {"a": F(1, 6), "b": F(1, 6), "x": F(2, 3)},
        },
    )


@pytest.fixture(scope="session")
def population_example():
    """Four resolvable choices over {{a,b},{c}} and the printed weights."""
    partition = Partition([("a", "b"), ("c",)])
    choices = enumerate_resolvable(partition)

    def find(base_label, fiber_item):
        for c in choices:
            if (
                c.base_choice(("class:a", "class:c")) == base_label
                and c.fiber_choice("class:a", ("a", "b")) == fiber_item
            ):
                return c
        raise AssertionError("choice not found")

    weights = {
        find("class:c", "a"): F(1, 5),
        find("class:c", "b"): F(2, 5),
        find("class:a", "a"): F(1, 5),
        find("class:a", "b"): F(1, 5),
    }
    return PopulationDistribution(partition, weights)


@pytest.fixture(scope="session")
def duplicate_commute_data() -> StochasticChoice:
    """Train / blue bus / red bus duplicates: pairwise ratios drift."""
    return _sc(
        ("t", "b", "r"),
        {
            ("t",): {"t": 1},
            ("b",): {"b": 1},
            ("r",): {"r": 1},
            ("b", "t"): {"t": F(1, 2), "b": F(1, 2)},
            ("r", "t"): {"t": F(1, 2), "r": F(1, 2)},
            ("b", "r"): {"b": F(1, 2), "r": F(1, 2)},
            ("b", "r", "t"): {"t": F(1, 2), "b": F(1, 4), "r": F(1, 4)},
        },
    )


# ---------------------------------------------------------------------------
# random builders
# ---------------------------------------------------------------------------

ITEMS = "abcdefghij"


def rand_fraction(rng: random.Random, max_den: int = 9) -> F:
    den = rng.randint(2, max_den)
    num = rng.randint(1, den - 1)
    return F(num, den)


def rand_positive_weights(rng: random.Random, items, max_num: int = 9) -> dict[str, F]:
    return {x: F(rng.randint(1, max_num)) for x in items}


def rand_choice(rng: random.Random, universe) -> StochasticChoice:
    """Random positive full-domain choice; per-menu independent weights."""
    universe = tuple(universe)
    table = {}
    for menu in all_menus(universe):
        weights = [rng.randint(1, 9) for _ in menu]
        total = sum(weights)
        table[menu] = {x: F(w, total) for x, w in zip(menu, weights)}
    return StochasticChoice.from_table(universe, table)


def rand_partition(rng: random.Random, universe, non_degenerate=True) -> Partition:
    universe = list(universe)
    while True:
        rng.shuffle(universe)
        k = rng.randint(2, max(2, len(universe) - 1))
        cuts = sorted(rng.sample(range(1, len(universe)), k - 1)) if k > 1 else []
        classes, start = [], 0
        for cut in cuts + [len(universe)]:
            classes.append(universe[start:cut])
            start = cut
        part = Partition(classes)
        if not non_degenerate or part.non_degenerate:
            return part


def rand_decomposition(rng: random.Random, n: int) -> Decomposition:
    """Random positive two-stage structure over n items."""
    universe = ITEMS[:n]
    partition = rand_partition(rng, universe)
    omega = rand_choice(rng, partition.labels)
    sigmas = {
        label: rand_choice(rng, partition.class_of_label(label))
        for label in partition.labels
    }
    return Decomposition(partition, omega, sigmas)


def rand_composed(rng: random.Random, n: int):
    d = rand_decomposition(rng, n)
    return d, compose(d)


def rand_rum(rng: random.Random, universe) -> RumRepresentation:
    """Random distribution over all linear orders of `universe`."""
    from itertools import permutations

    orders = list(permutations(tuple(universe)))
    weights = [rng.randint(1, 9) for _ in orders]
    total = sum(weights)
    return RumRepresentation(tuple(sorted(universe)), {
        o: F(w, total) for o, w in zip(orders, weights)
    })


def rand_population(rng: random.Random, partition: Partition) -> PopulationDistribution:
    choices = enumerate_resolvable(partition)
    weights = [rng.randint(1, 9) for _ in choices]
    total = sum(weights)
    return PopulationDistribution(
        partition, {c: F(w, total) for c, w in zip(choices, weights)}
    )
