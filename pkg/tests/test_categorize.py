"""Category enumeration, coarsest partition, decompositions, and the poset."""

from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from revealed_categories import (
    ComponentNotPositiveError,
    Decomposition,
    OmegaIllDefinedError,
    Partition,
    PartitionError,
    RecompositionMismatchError,
    StochasticChoice,
    WeakDecomposition,
    all_partitions,
    coarsest_partition,
    compose,
    decompose,
    decompose_weak,
    enumerate_categories,
    luce_choice,
    partition_poset,
    singleton_partition,
    trivial_partition,
)
from conftest import rand_choice, rand_composed, rand_decomposition


def make_choice(universe, rows):
    return StochasticChoice.from_table(universe, rows)


def uniform_sigma(items):
    items = tuple(items)
    table = {}
    from revealed_categories import all_menus

    for menu in all_menus(items):
        table[menu] = {x: F(1, len(menu)) for x in menu}
    return make_choice(items, table)


class TestPartition:
    def test_canonical_form_and_labels(self):
        part = Partition([("c",), ("b", "a")])
        assert part.classes == (("a", "b"), ("c",))
        assert part.labels == ("class:a", "class:c")
        assert part.label_of("b") == "class:a"
        assert part.image(("b", "c")) == ("class:a", "class:c")

    def test_rejects_overlaps_and_empties(self):
        with pytest.raises(PartitionError):
            Partition([("a", "b"), ("b", "c")])
        with pytest.raises(PartitionError):
            Partition([("a",), ()])

    def test_degeneracy_flags(self):
        assert not trivial_partition("abc").non_degenerate
        assert not singleton_partition("abc").non_degenerate
        assert Partition([("a", "b"), ("c",)]).non_degenerate

    def test_coarser_than(self):
        coarse = Partition([("a", "b", "c"), ("d",)])
        fine = Partition([("a", "b"), ("c",), ("d",)])
        assert coarse.is_coarser_than(fine)
        assert not fine.is_coarser_than(coarse)

    def test_all_partitions_count(self):
        # Bell numbers for 3 and 4 items
        assert sum(1 for _ in all_partitions("abc")) == 5
        assert sum(1 for _ in all_partitions("abcd")) == 15


class TestCompose:
    def test_uniform_composition(self):
        partition = Partition([("a", "b"), ("c",)])
        omega = make_choice(
            partition.labels,
            {
                ("class:a",): {"class:a": 1},
                ("class:c",): {"class:c": 1},
                ("class:a", "class:c"): {"class:a": F(1, 2), "class:c": F(1, 2)},
            },
        )
        sigmas = {"class:a": uniform_sigma("ab"), "class:c": uniform_sigma("c")}
        p = compose(Decomposition(partition, omega, sigmas))
        assert p.prob("a", ("a", "b", "c")) == F(1, 4)
        assert p.prob("c", ("a", "b", "c")) == F(1, 2)
        assert p.positive

    def test_requires_positive_components(self):
        partition = Partition([("a", "b"), ("c",)])
        omega = make_choice(
            partition.labels,
            {
                ("class:a",): {"class:a": 1},
                ("class:c",): {"class:c": 1},
                ("class:a", "class:c"): {"class:a": F(0), "class:c": F(1)},
            },
        )
        sigmas = {"class:a": uniform_sigma("ab"), "class:c": uniform_sigma("c")}
        with pytest.raises(ComponentNotPositiveError):
            compose(Decomposition(partition, omega, sigmas))


class TestDecompose:
    def test_round_trip_exact(self):
        rng = random.Random(21)
        for _ in range(20):
            d = rand_decomposition(rng, rng.randint(3, 6))
            p = compose(d)
            back = decompose(p, d.partition)
            assert back.omega == d.omega
            assert back.sigmas == d.sigmas
            assert back.partition == d.partition

    def test_population_example_fails_with_ratio_certificate(self, population_example):
        from revealed_categories import induce_choice

        p = induce_choice(population_example)
        with pytest.raises(RecompositionMismatchError) as err:
            decompose(p, population_example.partition)
        ce = err.value.ratio_counterexample
        assert ce is not None
        assert ce.lhs == F(2, 3)
        assert ce.rhs == F(1)
        assert err.value.recomposed != err.value.observed

    def test_trivial_partition_always_succeeds(self, falsifiability_data):
        p = falsifiability_data
        d = decompose(p, trivial_partition(p.universe))
        label = d.partition.labels[0]
        assert d.omega.prob(label, (label,)) == 1
        assert d.sigmas[label] == p
        assert compose(d) == p

    def test_singleton_partition_always_succeeds(self):
        rng = random.Random(23)
        for _ in range(5):
            p = rand_choice(rng, "abcd")
            d = decompose(p, singleton_partition(p.universe))
            assert compose(d) == p

    def test_omega_ill_defined_certificate(self):
        # class mass of {a,b} differs between {a,c} and {b,c}:
        # neutrality broken while within-class ratios stay intact
        p = make_choice(
            "abc",
            {
                ("a",): {"a": 1},
                ("b",): {"b": 1},
                ("c",): {"c": 1},
                ("a", "b"): {"a": F(1, 2), "b": F(1, 2)},
                ("a", "c"): {"a": F(3, 4), "c": F(1, 4)},
                ("b", "c"): {"b": F(1, 4), "c": F(3, 4)},
                ("a", "b", "c"): {"a": F(1, 4), "b": F(1, 4), "c": F(1, 2)},
            },
        )
        with pytest.raises(OmegaIllDefinedError) as err:
            decompose(p, Partition([("a", "b"), ("c",)]))
        assert err.value.mass_a != err.value.mass_b
        # the certificate re-evaluates against the dataset
        cls = ("a", "b") if err.value.class_label == "class:a" else ("c",)
        assert p.event_prob(cls, err.value.menu_a) == err.value.mass_a
        assert p.event_prob(cls, err.value.menu_b) == err.value.mass_b

    def test_sigma_is_conditional(self):
        rng = random.Random(29)
        for _ in range(10):
            d, p = rand_composed(rng, rng.randint(3, 5))
            for menu in p.menus():
                for item in menu:
                    label = d.partition.label_of(item)
                    inner = d.partition.within_class(menu, label)
                    mass = p.event_prob(d.partition.class_of_label(label), menu)
                    assert d.sigmas[label].prob(item, inner) == p.prob(item, menu) / mass


class TestDecomposeWeak:
    def test_any_strict_structure_reinterprets_weakly(self):
        rng = random.Random(31)
        for _ in range(10):
            d, p = rand_composed(rng, rng.randint(3, 5))
            weak = decompose_weak(p, d.partition)
            for menu in p.menus():
                image = d.partition.image(menu)
                for label in image:
                    assert weak.omega_family[menu][label] == d.omega.prob(label, image)
            assert compose(weak) == p

    def test_fails_when_ratio_independence_breaks(self, independence_data_2):
        with pytest.raises(RecompositionMismatchError):
            decompose_weak(independence_data_2, Partition([("a", "b"), ("x",)]))

    def test_weight_rows_normalize(self):
        rng = random.Random(37)
        d, p = rand_composed(rng, 5)
        weak = decompose_weak(p, d.partition)
        for menu, row in weak.omega_family.items():
            assert sum(row.values()) == 1


class TestEnumerateCategories:
    def test_falsifiability_dataset_empty(self, falsifiability_data):
        assert enumerate_categories(falsifiability_data) == []

    def test_composed_classes_found(self):
        partition = Partition([("a", "b"), ("c", "d")])
        omega = make_choice(
            partition.labels,
            {
                ("class:a",): {"class:a": 1},
                ("class:c",): {"class:c": 1},
                ("class:a", "class:c"): {"class:a": F(2, 5), "class:c": F(3, 5)},
            },
        )
        sigmas = {
            "class:a": make_choice(
                "ab", {("a",): {"a": 1}, ("b",): {"b": 1}, ("a", "b"): {"a": F(1, 3), "b": F(2, 3)}}
            ),
            "class:c": make_choice(
                "cd", {("c",): {"c": 1}, ("d",): {"d": 1}, ("c", "d"): {"c": F(1, 4), "d": F(3, 4)}}
            ),
        }
        p = compose(Decomposition(partition, omega, sigmas))
        cats = enumerate_categories(p)
        assert ("a", "b") in cats and ("c", "d") in cats
        # largest-first, then lexicographic
        sizes = [len(c) for c in cats]
        assert sizes == sorted(sizes, reverse=True)

    def test_luce_weak_categories_all_pairs(self):
        p = luce_choice({"a": F(1), "b": F(2), "c": F(3)})
        weak = enumerate_categories(p, weak=True)
        assert weak == [("a", "b"), ("a", "c"), ("b", "c")]

    def test_luce_has_no_strict_category(self):
        rng = random.Random(41)
        for _ in range(10):
            n = rng.randint(3, 5)
            p = luce_choice({x: F(rng.randint(1, 9)) for x in "abcde"[:n]})
            assert enumerate_categories(p) == []
            assert coarsest_partition(p) is None


class TestCoarsestPartition:
    def test_round_trip(self):
        rng = random.Random(43)
        hits = 0
        for _ in range(20):
            d, p = rand_composed(rng, rng.randint(4, 6))
            found = coarsest_partition(p)
            assert found is not None
            # generator partition refines the coarsest one
            assert found.is_coarser_than(d.partition) or found == d.partition
            if found == d.partition:
                hits += 1
        assert hits >= 10  # generic instances have no accidental coarsening

    def test_falsifiability_none(self, falsifiability_data):
        assert coarsest_partition(falsifiability_data) is None

    def test_nested_composition_two_levels(self):
        # sigma on {a,b,c} itself splits as {{a,b},{c}}; outer partition {{a,b,c},{d}}
        inner_part = Partition([("a", "b"), ("c",)])
        inner_omega = make_choice(
            inner_part.labels,
            {
                ("class:a",): {"class:a": 1},
                ("class:c",): {"class:c": 1},
                ("class:a", "class:c"): {"class:a": F(3, 7), "class:c": F(4, 7)},
            },
        )
        inner_sigmas = {
            "class:a": make_choice(
                "ab", {("a",): {"a": 1}, ("b",): {"b": 1}, ("a", "b"): {"a": F(2, 5), "b": F(3, 5)}}
            ),
            "class:c": uniform_sigma("c"),
        }
        sigma_abc = compose(Decomposition(inner_part, inner_omega, inner_sigmas))
        outer_part = Partition([("a", "b", "c"), ("d",)])
        outer_omega = make_choice(
            outer_part.labels,
            {
                ("class:a",): {"class:a": 1},
                ("class:d",): {"class:d": 1},
                ("class:a", "class:d"): {"class:a": F(5, 8), "class:d": F(3, 8)},
            },
        )
        p = compose(
            Decomposition(outer_part, outer_omega, {"class:a": sigma_abc, "class:d": uniform_sigma("d")})
        )
        assert coarsest_partition(p) == outer_part
        poset = partition_poset(p)
        members = set(poset.members)
        assert outer_part in members
        assert Partition([("a", "b"), ("c",), ("d",)]) in members
        assert len(poset.members) >= 2
        assert poset.maximum == outer_part


class TestPartitionPoset:
    def test_empty_for_falsifiability_data(self, falsifiability_data):
        poset = partition_poset(falsifiability_data)
        assert poset.members == ()
        assert poset.maximum is None

    def test_members_match_exhaustive_decomposition(self):
        # oracle: try the strict decomposition on every partition of the universe
        rng = random.Random(47)
        for _ in range(6):
            d, p = rand_composed(rng, 4)
            expected = []
            for part in all_partitions(p.universe):
                if not part.non_degenerate:
                    continue
                try:
                    decompose(p, part)
                except (OmegaIllDefinedError, RecompositionMismatchError):
                    continue
                expected.append(part)
            poset = partition_poset(p)
            assert set(poset.members) == set(expected)

    def test_unique_maximum_is_coarsest(self):
        rng = random.Random(53)
        for _ in range(10):
            d, p = rand_composed(rng, rng.randint(4, 6))
            poset = partition_poset(p)
            assert poset.maximum == coarsest_partition(p)
            # every member refines the maximum
            for member in poset.members:
                assert poset.maximum.is_coarser_than(member) or poset.maximum == member

    def test_flat_two_by_two_poset(self):
        # generic 2+2 structure: splitting either class into singletons stays valid
        partition = Partition([("a", "b"), ("c", "d")])
        omega = make_choice(
            partition.labels,
            {
                ("class:a",): {"class:a": 1},
                ("class:c",): {"class:c": 1},
                ("class:a", "class:c"): {"class:a": F(2, 7), "class:c": F(5, 7)},
            },
        )
        sigmas = {
            "class:a": make_choice(
                "ab", {("a",): {"a": 1}, ("b",): {"b": 1}, ("a", "b"): {"a": F(1, 3), "b": F(2, 3)}}
            ),
            "class:c": make_choice(
                "cd", {("c",): {"c": 1}, ("d",): {"d": 1}, ("c", "d"): {"c": F(2, 9), "d": F(7, 9)}}
            ),
        }
        p = compose(Decomposition(partition, omega, sigmas))
        poset = partition_poset(p)
        assert set(poset.members) == {
            partition,
            Partition([("a", "b"), ("c",), ("d",)]),
            Partition([("a",), ("b",), ("c", "d")]),
        }
        assert poset.maximum == partition


class TestStructureLaws:
    def test_disjoint_or_nested(self):
        rng = random.Random(59)
        datasets = [rand_composed(rng, rng.randint(4, 6))[1] for _ in range(10)]
        datasets += [rand_choice(rng, "abcde") for _ in range(10)]
        for p in datasets:
            cats = enumerate_categories(p)
            for i, c in enumerate(cats):
                for d_ in cats[i + 1:]:
                    cs, ds = set(c), set(d_)
                    assert not (cs & ds) or cs <= ds or ds <= cs

    def test_weak_intersection_law(self):
        rng = random.Random(61)
        checked = 0
        for k in range(12):
            if k % 3 == 0:
                p = luce_choice({x: F(rng.randint(1, 9)) for x in "abcd"})
            elif k % 3 == 1:
                p = rand_composed(rng, 4)[1]
            else:
                p = rand_choice(rng, "abcd")
            weak = enumerate_categories(p, weak=True)
            for i, c in enumerate(weak):
                for d_ in weak[i + 1:]:
                    inter = tuple(sorted(set(c) & set(d_)))
                    if len(inter) >= 2:
                        checked += 1
                        from revealed_categories import is_weak_category

                        assert is_weak_category(p, inter).holds
        assert checked >= 5

    def test_theorem_equivalence_three_ways(self):
        rng = random.Random(67)
        for _ in range(12):
            if rng.random() < 0.5:
                p = rand_composed(rng, rng.randint(4, 5))[1]
            else:
                p = rand_choice(rng, "abcde"[: rng.randint(3, 5)])
            has_category = bool(enumerate_categories(p))
            coarse = coarsest_partition(p)
            poset = partition_poset(p)
            assert has_category == (coarse is not None) == bool(poset.members)


class TestSerialization:
    def test_decomposition_json_round_trip(self):
        rng = random.Random(71)
        d = rand_decomposition(rng, 4)
        doc = d.to_json_dict()
        back = Decomposition.from_json_dict(doc)
        assert back.partition == d.partition
        assert back.omega == d.omega
        assert back.sigmas == d.sigmas

    def test_weak_decomposition_json_round_trip(self):
        rng = random.Random(73)
        d, p = rand_composed(rng, 4)
        weak = decompose_weak(p, d.partition)
        back = WeakDecomposition.from_json_dict(weak.to_json_dict())
        assert back.partition == weak.partition
        assert back.omega_family == weak.omega_family
        assert compose(back) == p
