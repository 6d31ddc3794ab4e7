"""Generators and membership tests for the named choice models.

Generators produce exact full-domain datasets for the Luce rule, nested
stochastic choice (including Nested Logit through nest exponents), and
the menu-weighted two-stage families (overload, flexibility, salience,
reference-dependent).  Membership tests fit parameters back from data
and verify the defining formula exactly; `classify` combines them and
asserts the known inclusion diagram between the regions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .axioms import check_local_iia
from .categorize import (
    Partition,
    WeakDecomposition,
    all_partitions,
    compose,
    coarsest_partition,
    decompose,
    has_nontrivial_weak_category,
)
from .core import Menu, StochasticChoice, ZERO, all_menus, canon_menu
from .errors import (
    BadParameterError,
    InternalConsistencyError,
    NotPositiveError,
    OmegaIllDefinedError,
    RecompositionMismatchError,
    SizeBoundError,
    ZeroNestMassError,
)
from .limits import MAX_PARTITION_SEARCH, effective_bound

ONE = Fraction(1)

UtilityMap = dict[str, Fraction]


def _check_positive_utilities(u: UtilityMap) -> None:
    for item, value in u.items():
        if value <= 0:
            raise BadParameterError(f"utility of {item!r} must be strictly positive")


def _nth_root(value: int, degree: int) -> int | None:
    """Exact integer degree-th root, or None."""
    if value < 0:
        return None
    if value in (0, 1) or degree == 1:
        return value
    guess = round(value ** (1.0 / degree))
    for candidate in (guess - 1, guess, guess + 1):
        if candidate >= 0 and candidate**degree == value:
            return candidate
    return None


def exact_pow(base: Fraction, exponent: Fraction) -> Fraction:
    """base ** exponent when the result is rational; BadParameterError otherwise.

    Integer exponents always work; a fractional exponent s/t needs both
    numerator and denominator of the base to be perfect t-th powers.
    """
    if base <= 0:
        raise BadParameterError("exact powers need a positive base")
    if exponent.denominator == 1:
        return base ** int(exponent)
    num = _nth_root(base.numerator, exponent.denominator)
    den = _nth_root(base.denominator, exponent.denominator)
    if num is None or den is None:
        raise BadParameterError(
            f"{base} ** {exponent} is irrational; use an integer exponent or a "
            f"base that is a perfect power"
        )
    return Fraction(num, den) ** exponent.numerator


def _factorize(value: int) -> dict[int, int]:
    out: dict[int, int] = {}
    v = value
    d = 2
    while d * d <= v:
        while v % d == 0:
            out[d] = out.get(d, 0) + 1
            v //= d
        d += 1 if d == 2 else 2
    if v > 1:
        out[v] = out.get(v, 0) + 1
    return out


def solve_rational_exponent(base: Fraction, target: Fraction) -> Fraction | None:
    """The rational L with base ** L == target, if one exists.

    Compares prime-exponent vectors: target's vector must be a single
    rational multiple of base's.  `base` must differ from 1.
    """
    if base <= 0 or target <= 0 or base == 1:
        raise ValueError("need positive base != 1 and positive target")
    if target == 1:
        return Fraction(0)
    exps: dict[int, tuple[int, int]] = {}
    for prime, e in _factorize(base.numerator).items():
        exps[prime] = (e, 0)
    for prime, e in _factorize(base.denominator).items():
        b, t = exps.get(prime, (0, 0))
        exps[prime] = (b - e, t)
    for prime, e in _factorize(target.numerator).items():
        b, t = exps.get(prime, (0, 0))
        exps[prime] = (b, t + e)
    for prime, e in _factorize(target.denominator).items():
        b, t = exps.get(prime, (0, 0))
        exps[prime] = (b, t - e)
    ratio: Fraction | None = None
    for b, t in exps.values():
        if b == 0:
            if t != 0:
                return None
            continue
        candidate = Fraction(t, b)
        if ratio is None:
            ratio = candidate
        elif ratio != candidate:
            return None
    return ratio


# -- generators -------------------------------------------------------------


def luce_choice(u: UtilityMap) -> StochasticChoice:
    """p(a, A) = u(a) / sum of u over A; positive and IIA everywhere."""
    _check_positive_utilities(u)
    universe = canon_menu(u)
    table: dict[Menu, dict[str, Fraction]] = {}
    for menu in all_menus(universe):
        total = sum((u[x] for x in menu), ZERO)
        table[menu] = {x: u[x] / total for x in menu}
    return StochasticChoice.from_table(universe, table)


@dataclass(frozen=True)
class NestSpec:
    """Nest-utility specification for nested stochastic choice.

    `v` maps (class label, menu within the class) to a nonnegative nest
    utility.  When `nest_exponents` is given instead, v(S) is computed
    as (sum of u over S) ** exponent, which is the Nested Logit form;
    exponents must keep the arithmetic rational.
    """

    partition: Partition
    u: UtilityMap
    v: dict[tuple[str, Menu], Fraction] | None = None
    nest_exponents: dict[str, Fraction] | None = None

    def nest_utility(self, label: str, menu: Menu) -> Fraction:
        if not menu:
            return ZERO
        if self.v is not None:
            return self.v[(label, menu)]
        assert self.nest_exponents is not None
        exponent = self.nest_exponents[label]
        if exponent <= 0:
            raise BadParameterError("nest exponents must be strictly positive")
        total = sum((self.u[x] for x in menu), ZERO)
        return exact_pow(total, exponent)


def nested_choice(spec: NestSpec) -> StochasticChoice:
    """Two-stage choice with content-dependent nest weights.

    p(a, A) = v(A within a's class) / sum of v over represented classes
    times u(a) / sum of u over A within the class.
    """
    _check_positive_utilities(spec.u)
    if spec.v is None and spec.nest_exponents is None:
        raise BadParameterError("NestSpec needs either explicit v or nest exponents")
    partition = spec.partition
    universe = partition.universe
    if canon_menu(spec.u) != universe:
        raise BadParameterError("utility map must cover exactly the partition universe")
    table: dict[Menu, dict[str, Fraction]] = {}
    for menu in all_menus(universe):
        image = partition.image(menu)
        nest_values = {
            label: spec.nest_utility(label, partition.within_class(menu, label))
            for label in image
        }
        denom = sum(nest_values.values(), ZERO)
        if denom == 0:
            raise ZeroNestMassError(menu)
        row: dict[str, Fraction] = {}
        for item in menu:
            label = partition.label_of(item)
            inner = partition.within_class(menu, label)
            inner_total = sum((spec.u[x] for x in inner), ZERO)
            row[item] = (nest_values[label] / denom) * (spec.u[item] / inner_total)
        table[menu] = row
    return StochasticChoice.from_table(universe, table)


def nested_logit_choice(
    partition: Partition, u: UtilityMap, nest_exponents: dict[str, Fraction]
) -> StochasticChoice:
    """Nested Logit: nest utility is the powered sum of item utilities."""
    return nested_choice(NestSpec(partition, u, nest_exponents=nest_exponents))


@dataclass(frozen=True)
class WeightFamilySpec:
    """Menu-dependent class-weight family.

    kind "overload" (beta < 0) and "flexibility" (beta > 0) weigh a
    class by the size of its offered content raised to beta; "salience"
    sums per-item salience over the offered content; "reference" scores
    a class by max utility minus theta times min utility.
    """

    kind: str
    beta: Fraction | None = None
    salience: UtilityMap | None = None
    u: UtilityMap | None = None
    theta: Fraction | None = None


def _class_weight(spec: WeightFamilySpec, inner: Menu) -> Fraction:
    if spec.kind in ("overload", "flexibility"):
        assert spec.beta is not None
        return exact_pow(Fraction(len(inner)), spec.beta)
    if spec.kind == "salience":
        assert spec.salience is not None
        return sum((spec.salience[x] for x in inner), ZERO)
    if spec.kind == "reference":
        assert spec.u is not None and spec.theta is not None
        values = [spec.u[x] for x in inner]
        return max(values) - spec.theta * min(values)
    raise BadParameterError(f"unknown weight family kind {spec.kind!r}")


def _validate_family_spec(spec: WeightFamilySpec) -> None:
    if spec.kind == "overload":
        if spec.beta is None or spec.beta >= 0:
            raise BadParameterError("overload needs beta < 0")
    elif spec.kind == "flexibility":
        if spec.beta is None or spec.beta <= 0:
            raise BadParameterError("flexibility needs beta > 0")
    elif spec.kind == "salience":
        if spec.salience is None:
            raise BadParameterError("salience needs a salience map")
        _check_positive_utilities(spec.salience)
    elif spec.kind == "reference":
        if spec.u is None or spec.theta is None:
            raise BadParameterError("reference needs utilities and theta")
        _check_positive_utilities(spec.u)
        if not (0 < spec.theta < 1):
            raise BadParameterError("reference needs theta strictly between 0 and 1")
    else:
        raise BadParameterError(f"unknown weight family kind {spec.kind!r}")


def weight_family(
    partition: Partition, spec: WeightFamilySpec
) -> dict[Menu, dict[str, Fraction]]:
    """Normalized class weights per menu for the given family."""
    _validate_family_spec(spec)
    family: dict[Menu, dict[str, Fraction]] = {}
    for menu in all_menus(partition.universe):
        image = partition.image(menu)
        raw = {
            label: _class_weight(spec, partition.within_class(menu, label))
            for label in image
        }
        total = sum(raw.values(), ZERO)
        family[menu] = {label: raw[label] / total for label in image}
    return family


def weighted_two_stage(
    partition: Partition,
    sigmas: dict[str, StochasticChoice],
    spec: WeightFamilySpec,
) -> StochasticChoice:
    """Compose within-class choices under a menu-dependent weight family."""
    family = weight_family(partition, spec)
    return compose(WeakDecomposition(partition, family, sigmas))


# -- membership tests --------------------------------------------------------


@dataclass(frozen=True)
class LuceFit:
    ok: bool
    u: UtilityMap | None = None
    witness: dict[str, Any] | None = None

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"ok": self.ok}
        if self.u is not None:
            doc["u"] = {k: str(v) for k, v in sorted(self.u.items())}
        if self.witness is not None:
            doc["witness"] = self.witness
        return doc


def is_luce(p: StochasticChoice) -> LuceFit:
    """Fit u from the full menu and verify the ratio rule on every menu."""
    if not p.positive:
        return LuceFit(False, witness={"reason": "not positive"})
    full = p.row(p.universe)
    anchor = full[p.universe[0]]
    u = {x: full[x] / anchor for x in p.universe}
    for menu in all_menus(p.universe):
        total = sum((u[x] for x in menu), ZERO)
        for item in menu:
            expected = u[item] / total
            observed = p.prob(item, menu)
            if expected != observed:
                witness = {
                    "menu": list(menu),
                    "item": item,
                    "expected": str(expected),
                    "observed": str(observed),
                }
                return LuceFit(False, witness=witness)
    return LuceFit(True, u=u)


@dataclass(frozen=True)
class NestFit:
    """One partition under which the nested form regenerates the data."""

    partition: Partition
    u: UtilityMap
    v: dict[tuple[str, Menu], Fraction]
    nest_exponents: dict[str, Fraction] | None = None

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "partition": self.partition.to_json(),
            "u": {k: str(v) for k, v in sorted(self.u.items())},
            "v": [
                {"class": label, "menu": list(menu), "value": str(value)}
                for (label, menu), value in sorted(self.v.items())
            ],
        }
        if self.nest_exponents is not None:
            doc["nest_exponents"] = {
                k: str(v) for k, v in sorted(self.nest_exponents.items())
            }
        return doc


def _fit_class_utilities(p: StochasticChoice, partition: Partition) -> UtilityMap:
    """Within-class utilities from binary menus, anchored per class.

    Cross-class scale is immaterial: the nested formula only ever uses
    utility ratios within one class.
    """
    u: UtilityMap = {}
    for cls in partition.classes:
        anchor = cls[0]
        u[anchor] = ONE
        for item in cls[1:]:
            u[item] = p.prob(item, (anchor, item)) / p.prob(anchor, (anchor, item))
    return u


def _fit_nest_utilities(
    p: StochasticChoice, partition: Partition
) -> dict[tuple[str, Menu], Fraction] | None:
    """Nest utilities from class-mass ratios, anchored at one singleton.

    v is determined up to one global scale; the fit anchors the first
    class's smallest singleton at 1 and reads every other value off a
    two-class menu.  Returns None when a needed mass vanishes.
    """
    labels = partition.labels
    v: dict[tuple[str, Menu], Fraction] = {}
    anchor_label = labels[0]
    anchor_menu: Menu = (partition.class_of_label(anchor_label)[0],)
    v[(anchor_label, anchor_menu)] = ONE
    # second anchor so the first class's own sets can be measured
    other_label = labels[1]
    other_menu: Menu = (partition.class_of_label(other_label)[0],)
    joint = canon_menu(anchor_menu + other_menu)
    mass_a = p.event_prob(anchor_menu, joint)
    mass_b = p.event_prob(other_menu, joint)
    if mass_a == 0 or mass_b == 0:
        return None
    v[(other_label, other_menu)] = mass_b / mass_a
    for i, label in enumerate(labels):
        ref_label, ref_menu = (other_label, other_menu) if label == anchor_label else (
            anchor_label,
            anchor_menu,
        )
        ref_value = v[(ref_label, ref_menu)]
        for menu in partition.class_menus(i):
            key = (label, menu)
            if key in v:
                continue
            joint = canon_menu(menu + ref_menu)
            mass_here = p.event_prob(menu, joint)
            mass_ref = p.event_prob(ref_menu, joint)
            if mass_ref == 0:
                return None
            v[key] = ref_value * mass_here / mass_ref
    return v


def _verify_nested(
    p: StochasticChoice,
    partition: Partition,
    u: UtilityMap,
    v: dict[tuple[str, Menu], Fraction] | None,
) -> bool:
    """Exact check of the nested formula on every menu and item."""
    for menu in all_menus(p.universe):
        image = partition.image(menu)
        if v is None:
            # single class: only the utility stage constrains the data
            total = sum((u[x] for x in menu), ZERO)
            for item in menu:
                if p.prob(item, menu) != u[item] / total:
                    return False
            continue
        nest_values = {
            label: v[(label, partition.within_class(menu, label))] for label in image
        }
        denom = sum(nest_values.values(), ZERO)
        if denom == 0:
            return False
        for item in menu:
            label = partition.label_of(item)
            inner = partition.within_class(menu, label)
            inner_total = sum((u[x] for x in inner), ZERO)
            expected = (nest_values[label] / denom) * (u[item] / inner_total)
            if p.prob(item, menu) != expected:
                return False
    return True


def is_nested_stochastic(
    p: StochasticChoice, limit: int | None = None
) -> list[NestFit]:
    """All partitions under which a nested fit regenerates `p` exactly.

    Candidate partitions are screened by within-class local IIA before
    fitting; utilities come from binary ratios and nest utilities from
    class-mass ratios, then the formula is verified menu by menu.
    """
    if not p.positive:
        raise NotPositiveError()
    bound = effective_bound(MAX_PARTITION_SEARCH, limit)
    if p.n > bound:
        raise SizeBoundError("universe (partition search)", p.n, bound)
    fits: list[NestFit] = []
    for partition in all_partitions(p.universe):
        screened = True
        for cls in partition.classes:
            if len(cls) >= 2 and not check_local_iia(p, cls).holds:
                screened = False
                break
        if not screened:
            continue
        u = _fit_class_utilities(p, partition)
        if partition.k == 1:
            if _verify_nested(p, partition, u, None):
                v_trivial = {
                    (partition.labels[0], menu): sum((u[x] for x in menu), ZERO)
                    for menu in partition.class_menus(0)
                }
                fits.append(NestFit(partition, u, v_trivial))
            continue
        v = _fit_nest_utilities(p, partition)
        if v is None:
            continue
        if _verify_nested(p, partition, u, v):
            fits.append(NestFit(partition, u, v))
    return fits


def _fit_nest_exponents(fit: NestFit) -> dict[str, Fraction] | None:
    """Per-class exponents tying nest utilities to powered utility sums.

    Within one class, v(S) must equal K * (sum of u over S) ** L for a
    single rational L > 0; the class's own scale constant K absorbs the
    rest.  Classes with no informative pair (every compared sum equal)
    leave the exponent free, reported as 1.
    """
    partition = fit.partition
    exponents: dict[str, Fraction] = {}
    for i, label in enumerate(partition.labels):
        menus = partition.class_menus(i)
        base_menu = menus[0]
        base_sum = sum((fit.u[x] for x in base_menu), ZERO)
        base_v = fit.v[(label, base_menu)]
        if base_v <= 0:
            return None
        exponent: Fraction | None = None
        for menu in menus[1:]:
            here_sum = sum((fit.u[x] for x in menu), ZERO)
            here_v = fit.v[(label, menu)]
            if here_v <= 0:
                return None
            sum_ratio = here_sum / base_sum
            v_ratio = here_v / base_v
            if sum_ratio == 1:
                if v_ratio != 1:
                    return None
                continue
            candidate = solve_rational_exponent(sum_ratio, v_ratio)
            if candidate is None:
                return None
            if exponent is None:
                exponent = candidate
            elif exponent != candidate:
                return None
        if exponent is None:
            exponent = ONE
        if exponent <= 0:
            return None
        exponents[label] = exponent
    return exponents


def is_nested_logit(p: StochasticChoice, limit: int | None = None) -> list[NestFit]:
    """Nested fits whose nest utilities are powered utility sums.

    Exponents are recovered exactly over the rationals; memberships that
    would need an irrational exponent are not claimed.
    """
    fits = []
    for fit in is_nested_stochastic(p, limit):
        if fit.partition.k == 1:
            # the nest stage never binds; any positive exponent works
            fits.append(
                NestFit(fit.partition, fit.u, fit.v, {fit.partition.labels[0]: ONE})
            )
            continue
        exponents = _fit_nest_exponents(fit)
        if exponents is not None:
            fits.append(NestFit(fit.partition, fit.u, fit.v, exponents))
    return fits


@dataclass(frozen=True)
class ClassifyReport:
    """Membership flags plus the fitted structures behind them.

    The flags satisfy the inclusion diagram (Luce inside Nested Logit
    inside nested stochastic inside weak two-stage; strict two-stage
    inside weak and disjoint from Luce); `classify` raises on any
    violation since the inclusions are theorems.
    """

    luce: bool
    nested_logit: bool
    nested_stochastic: bool
    categorized: bool
    weakly_categorized: bool
    luce_fit: LuceFit | None = None
    nested_fits: tuple[NestFit, ...] = field(default_factory=tuple)
    nested_logit_fits: tuple[NestFit, ...] = field(default_factory=tuple)
    coarsest: Partition | None = None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "luce": self.luce,
            "nested_logit": self.nested_logit,
            "nested_stochastic": self.nested_stochastic,
            "non_degenerate_two_stage": self.categorized,
            "non_degenerate_weak_two_stage": self.weakly_categorized,
            "luce_fit": None if self.luce_fit is None else self.luce_fit.to_json_dict(),
            "nested_fits": [f.to_json_dict() for f in self.nested_fits],
            "nested_logit_fits": [f.to_json_dict() for f in self.nested_logit_fits],
            "coarsest_partition": None if self.coarsest is None else self.coarsest.to_json(),
        }


def classify(p: StochasticChoice, limit: int | None = None) -> ClassifyReport:
    """Evaluate every region membership and assert the inclusion diagram."""
    if not p.positive:
        raise NotPositiveError()
    luce_fit = is_luce(p)
    nested_fits = tuple(is_nested_stochastic(p, limit))
    logit_fits = tuple(is_nested_logit(p, limit))
    coarsest = coarsest_partition(p, limit=limit)
    weakly = has_nontrivial_weak_category(p, limit=limit)
    report = ClassifyReport(
        luce=luce_fit.ok,
        nested_logit=bool(logit_fits),
        nested_stochastic=bool(nested_fits),
        categorized=coarsest is not None,
        weakly_categorized=weakly,
        luce_fit=luce_fit if luce_fit.ok else None,
        nested_fits=nested_fits,
        nested_logit_fits=logit_fits,
        coarsest=coarsest,
    )
    _assert_inclusions(report)
    return report


def _assert_inclusions(report: ClassifyReport) -> None:
    checks = [
        (report.luce and not report.nested_logit, "luce outside nested logit"),
        (report.nested_logit and not report.nested_stochastic,
         "nested logit outside nested stochastic"),
        (report.nested_stochastic and not report.weakly_categorized,
         "nested stochastic without a weak two-stage structure"),
        (report.categorized and not report.weakly_categorized,
         "strict two-stage structure without a weak one"),
        (report.categorized and report.luce,
         "strict two-stage structure on a Luce choice"),
    ]
    for violated, message in checks:
        if violated:
            raise InternalConsistencyError(f"inclusion diagram violated: {message}")
