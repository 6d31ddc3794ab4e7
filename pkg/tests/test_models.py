"""Model generators, parameter recovery, and region classification."""

from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from revealed_categories import (
    BadParameterError,
    NestSpec,
    Partition,
    StochasticChoice,
    WeightFamilySpec,
    check_choice_overload,
    check_content_monotonicity,
    check_local_iia,
    classify,
    coarsest_partition,
    decompose,
    decompose_weak,
    is_luce,
    is_nested_logit,
    is_nested_stochastic,
    luce_choice,
    nested_choice,
    nested_logit_choice,
    weight_family,
    weighted_two_stage,
)
from revealed_categories.models import exact_pow, solve_rational_exponent
from conftest import rand_choice, rand_partition, rand_positive_weights

ABX_PART = Partition([("a", "b"), ("x",)])
ABX_PART_ABC = Partition([("a", "b"), ("c",)])


def uniform_sigmas(partition):
    from revealed_categories import all_menus

    out = {}
    for label in partition.labels:
        cls = partition.class_of_label(label)
        out[label] = StochasticChoice.from_table(
            cls, {m: {x: F(1, len(m)) for x in m} for m in all_menus(cls)}
        )
    return out


class TestExactArithmeticHelpers:
    def test_exact_pow_integer(self):
        assert exact_pow(F(2), F(3)) == 8
        assert exact_pow(F(2), F(-1)) == F(1, 2)

    def test_exact_pow_fractional(self):
        assert exact_pow(F(4), F(1, 2)) == 2
        assert exact_pow(F(8, 27), F(2, 3)) == F(4, 9)
        with pytest.raises(BadParameterError):
            exact_pow(F(2), F(1, 2))

    def test_solve_rational_exponent(self):
        assert solve_rational_exponent(F(2), F(8)) == 3
        assert solve_rational_exponent(F(4), F(8)) == F(3, 2)
        assert solve_rational_exponent(F(2, 3), F(9, 4)) == -2
        assert solve_rational_exponent(F(2), F(3)) is None
        assert solve_rational_exponent(F(2), F(1)) == 0


class TestLuce:
    def test_uniform_utilities(self):
        p = luce_choice({x: F(1) for x in "abc"})
        for menu in p.menus():
            for item in menu:
                assert p.prob(item, menu) == F(1, len(menu))

    def test_binary_formula(self):
        p = luce_choice({"a": F(2), "b": F(1), "c": F(1)})
        assert p.prob("a", ("a", "b")) == F(2, 3)

    def test_local_iia_everywhere(self):
        rng = random.Random(3)
        for _ in range(5):
            p = luce_choice(rand_positive_weights(rng, "abcd"))
            from revealed_categories import subsets

            for cand in subsets(p.universe, 2, 4):
                assert check_local_iia(p, cand).holds

    def test_fit_round_trip_up_to_scale(self):
        rng = random.Random(5)
        for _ in range(10):
            u = rand_positive_weights(rng, "abcd")
            p = luce_choice(u)
            fit = is_luce(p)
            assert fit.ok
            anchor = u["a"] / fit.u["a"]
            assert all(u[x] == fit.u[x] * anchor for x in u)

    def test_non_luce_reports_witness(self, independence_data_2):
        fit = is_luce(independence_data_2)
        assert not fit.ok
        assert fit.witness is not None


class TestNestedChoice:
    def test_nested_logit_golden_values(self):
        u = {x: F(1) for x in "abc"}
        p = nested_logit_choice(ABX_PART_ABC, u, {"class:a": F(2), "class:c": F(1)})
        assert p.prob("a", ("a", "b", "c")) == F(2, 5)
        assert p.prob("a", ("a", "c")) == F(1, 2)

    def test_unit_exponents_collapse_to_luce(self):
        rng = random.Random(7)
        for _ in range(8):
            u = rand_positive_weights(rng, "abcd")
            partition = rand_partition(rng, "abcd")
            exponents = {label: F(1) for label in partition.labels}
            assert nested_logit_choice(partition, u, exponents) == luce_choice(u)

    def test_generic_exponent_breaks_strict_structure(self):
        u = {x: F(1) for x in "abc"}
        p = nested_logit_choice(ABX_PART_ABC, u, {"class:a": F(2), "class:c": F(1)})
        assert coarsest_partition(p) is None
        assert p.event_prob(("a", "b"), ("a", "b", "c")) == F(4, 5)
        assert p.prob("a", ("a", "c")) == F(1, 2)  # class mass drifts 4/5 vs 1/2

    def test_content_independent_nest_utilities_give_strict_structure(self):
        u = {"a": F(2), "b": F(1), "c": F(3)}
        v = {
            ("class:a", ("a",)): F(5),
            ("class:a", ("b",)): F(5),
            ("class:a", ("a", "b")): F(5),
            ("class:c", ("c",)): F(2),
        }
        p = nested_choice(NestSpec(ABX_PART_ABC, u, v=v))
        d = decompose(p, ABX_PART_ABC)
        assert d.omega.prob("class:a", ("class:a", "class:c")) == F(5, 7)

    def test_nested_fit_round_trip(self):
        rng = random.Random(11)
        for _ in range(6):
            u = rand_positive_weights(rng, "abcd")
            partition = Partition([("a", "b"), ("c", "d")])
            exponents = {
                "class:a": F(rng.randint(1, 3)),
                "class:c": F(rng.randint(1, 3)),
            }
            p = nested_logit_choice(partition, u, exponents)
            fits = is_nested_stochastic(p)
            assert any(fit.partition == partition for fit in fits)

    def test_nested_logit_fit_recovers_exponents(self):
        u = {x: F(1) for x in "abcd"}
        partition = Partition([("a", "b"), ("c", "d")])
        exponents = {"class:a": F(3), "class:c": F(2)}
        p = nested_logit_choice(partition, u, exponents)
        fits = [f for f in is_nested_logit(p) if f.partition == partition]
        assert fits
        assert fits[0].nest_exponents == exponents

    def test_zero_nest_mass_rejected(self):
        u = {x: F(1) for x in "abc"}
        v = {
            ("class:a", ("a",)): F(0),
            ("class:a", ("b",)): F(0),
            ("class:a", ("a", "b")): F(0),
            ("class:c", ("c",)): F(1),
        }
        from revealed_categories import ZeroNestMassError

        with pytest.raises(ZeroNestMassError):
            nested_choice(NestSpec(ABX_PART_ABC, u, v=v))

    def test_irrational_exponent_rejected(self):
        u = {x: F(1) for x in "abc"}
        with pytest.raises(BadParameterError):
            nested_logit_choice(ABX_PART_ABC, u, {"class:a": F(1, 2), "class:c": F(1)})


class TestWeightFamilies:
    def test_overload_direction(self):
        p = weighted_two_stage(
            ABX_PART, uniform_sigmas(ABX_PART), WeightFamilySpec("overload", beta=F(-1))
        )
        assert p.prob("x", ("a", "b", "x")) == F(2, 3)
        assert p.prob("x", ("a", "x")) == F(1, 2)
        assert check_choice_overload(p, ("a", "b")).holds

    def test_flexibility_direction(self):
        p = weighted_two_stage(
            ABX_PART, uniform_sigmas(ABX_PART), WeightFamilySpec("flexibility", beta=F(1))
        )
        assert check_content_monotonicity(p, ("a", "b")).holds

    def test_salience_with_unit_weights_equals_flexibility(self):
        sal = weighted_two_stage(
            ABX_PART,
            uniform_sigmas(ABX_PART),
            WeightFamilySpec("salience", salience={x: F(1) for x in "abx"}),
        )
        flex = weighted_two_stage(
            ABX_PART, uniform_sigmas(ABX_PART), WeightFamilySpec("flexibility", beta=F(1))
        )
        assert sal == flex

    def test_reference_family_positive_and_weakly_structured(self):
        rng = random.Random(13)
        partition = Partition([("a", "b", "c"), ("d",)])
        spec = WeightFamilySpec(
            "reference", u=rand_positive_weights(rng, "abcd"), theta=F(1, 3)
        )
        sigmas = uniform_sigmas(partition)
        p = weighted_two_stage(partition, sigmas, spec)
        assert p.positive
        wd = decompose_weak(p, partition)
        assert wd.omega_family == weight_family(partition, spec)

    def test_family_recovered_exactly_by_weak_decomposition(self):
        rng = random.Random(17)
        specs = [
            WeightFamilySpec("overload", beta=F(-2)),
            WeightFamilySpec("flexibility", beta=F(2)),
            WeightFamilySpec("salience", salience=rand_positive_weights(rng, "abcx")),
            WeightFamilySpec("reference", u=rand_positive_weights(rng, "abcx"), theta=F(2, 5)),
        ]
        partition = Partition([("a", "b"), ("c", "x")])
        for spec in specs:
            p = weighted_two_stage(partition, uniform_sigmas(partition), spec)
            wd = decompose_weak(p, partition)
            assert wd.omega_family == weight_family(partition, spec)

    def test_parameter_validation(self):
        with pytest.raises(BadParameterError):
            weight_family(ABX_PART, WeightFamilySpec("overload", beta=F(1)))
        with pytest.raises(BadParameterError):
            weight_family(ABX_PART, WeightFamilySpec("flexibility", beta=F(-1)))
        with pytest.raises(BadParameterError):
            weight_family(
                ABX_PART, WeightFamilySpec("reference", u={"a": F(1), "b": F(1), "x": F(1)}, theta=F(1))
            )


class TestClassify:
    def test_luce_region(self):
        rng = random.Random(19)
        for _ in range(5):
            p = luce_choice(rand_positive_weights(rng, "abc"))
            report = classify(p)
            assert report.luce and report.nested_logit and report.nested_stochastic
            assert report.weakly_categorized
            assert not report.categorized

    def test_generic_nested_logit_region(self):
        rng = random.Random(23)
        for _ in range(5):
            u = rand_positive_weights(rng, "abc")
            p = nested_logit_choice(ABX_PART_ABC, u, {"class:a": F(2), "class:c": F(1)})
            report = classify(p)
            assert not report.luce
            assert report.nested_logit and report.nested_stochastic
            assert not report.categorized
            assert report.weakly_categorized

    def test_content_independent_nest_region(self):
        u = {"a": F(1), "b": F(2), "c": F(1)}
        v = {
            ("class:a", ("a",)): F(3),
            ("class:a", ("b",)): F(3),
            ("class:a", ("a", "b")): F(3),
            ("class:c", ("c",)): F(4),
        }
        p = nested_choice(NestSpec(ABX_PART_ABC, u, v=v))
        report = classify(p)
        assert report.nested_stochastic and report.categorized
        assert not report.luce

    def test_generic_random_data_usually_nowhere(self):
        rng = random.Random(29)
        outside = 0
        for _ in range(5):
            p = rand_choice(rng, "abc")
            report = classify(p)
            if not (report.luce or report.nested_stochastic or report.categorized):
                outside += 1
        assert outside >= 3

    def test_report_serializes(self):
        p = luce_choice({x: F(1) for x in "abc"})
        doc = classify(p).to_json_dict()
        assert doc["luce"] is True
        assert doc["non_degenerate_two_stage"] is False
        assert doc["luce_fit"]["u"] == {"a": "1", "b": "1", "c": "1"}

