"""Category enumeration and two-stage decomposition.

A choice has a (strict) two-stage structure with respect to a partition
when it factors as p(a, A) = w(class of a, classes in A) * s(a, A within
class), with the class weight w depending only on which classes are
represented in the menu.  The weak variant lets the class weight depend
on the full menu.  Detection reduces to finding categories: every
non-singleton class of a valid partition is one.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator

from .axioms import check_ratio_independence, is_category, is_weak_category
from .core import Menu, StochasticChoice, ZERO, all_menus, canon_menu, eq_within, subsets
from .errors import (
    ComponentNotPositiveError,
    DatasetFormatError,
    InternalConsistencyError,
    NotPositiveError,
    OmegaIllDefinedError,
    PartitionError,
    RecompositionMismatchError,
    SizeBoundError,
)
from .limits import MAX_UNIVERSE, effective_bound


class Partition:
    """An indexed disjoint cover of a universe.

    Classes are canonically sorted tuples ordered by smallest member,
    labelled "class:<smallest-member-id>" for stable serialization.
    Equality and hashing use the classes alone; lookup tables are
    precomputed and never mutated.
    """

    __slots__ = ("classes", "universe", "labels", "_label_of", "_class_of_label",
                 "_index_of_class", "index_menus", "_index_menu_pos", "_class_menu_pos")

    def __init__(self, classes: Iterable[Iterable[str]]):
        cleaned = tuple(sorted(canon_menu(c) for c in classes))
        if any(not c for c in cleaned):
            raise PartitionError("classes must be nonempty")
        flat = [x for c in cleaned for x in c]
        if len(flat) != len(set(flat)):
            raise PartitionError("classes overlap")
        self.classes: tuple[Menu, ...] = cleaned
        self.universe: Menu = tuple(sorted(flat))
        self.labels: tuple[str, ...] = tuple(f"class:{c[0]}" for c in cleaned)
        self._label_of = {x: self.labels[i] for i, c in enumerate(cleaned) for x in c}
        self._class_of_label = dict(zip(self.labels, cleaned))
        self._index_of_class = {label: i for i, label in enumerate(self.labels)}
        self.index_menus: list[Menu] = all_menus(self.labels)
        self._index_menu_pos = {m: i for i, m in enumerate(self.index_menus)}
        self._class_menu_pos = [
            {m: i for i, m in enumerate(all_menus(c))} for c in cleaned
        ]

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def non_degenerate(self) -> bool:
        return 1 < self.k < len(self.universe)

    def label_of(self, item: str) -> str:
        return self._label_of[item]

    def class_of_label(self, label: str) -> Menu:
        return self._class_of_label[label]

    def class_index(self, label: str) -> int:
        return self._index_of_class[label]

    def image(self, menu: Iterable[str]) -> Menu:
        """The index menu: labels of the classes represented in `menu`."""
        return tuple(sorted({self._label_of[x] for x in menu}))

    def within_class(self, menu: Iterable[str], label: str) -> Menu:
        cls = self._class_of_label[label]
        return tuple(x for x in canon_menu(menu) if x in cls)

    def index_menu_position(self, index_menu: Menu) -> int:
        return self._index_menu_pos[index_menu]

    def class_menu_position(self, class_idx: int, menu: Menu) -> int:
        return self._class_menu_pos[class_idx][menu]

    def class_menus(self, class_idx: int) -> list[Menu]:
        return all_menus(self.classes[class_idx])

    def is_coarser_than(self, other: "Partition") -> bool:
        """Every class of `other` sits inside some class of this partition."""
        if self.universe != other.universe:
            return False
        for small in other.classes:
            if not any(set(small) <= set(big) for big in self.classes):
                return False
        return True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.classes == other.classes

    def __hash__(self) -> int:
        return hash(self.classes)

    def __repr__(self) -> str:
        inner = ", ".join("{" + ",".join(c) + "}" for c in self.classes)
        return f"Partition({inner})"

    def to_json(self) -> list[list[str]]:
        return [list(c) for c in self.classes]

    @classmethod
    def from_json(cls, doc: Any) -> "Partition":
        if not isinstance(doc, list) or not all(isinstance(c, list) for c in doc):
            raise DatasetFormatError("partition must be a list of lists of item ids")
        return cls(doc)


def trivial_partition(universe: Iterable[str]) -> Partition:
    return Partition([canon_menu(universe)])


def singleton_partition(universe: Iterable[str]) -> Partition:
    return Partition([(x,) for x in canon_menu(universe)])


def all_partitions(universe: Iterable[str]) -> Iterator[Partition]:
    """Every partition of the universe, in a deterministic order."""
    items = canon_menu(universe)

    def rec(rest: tuple[str, ...]) -> Iterator[list[list[str]]]:
        if not rest:
            yield []
            return
        head, tail = rest[0], rest[1:]
        for smaller in rec(tail):
            for i in range(len(smaller)):
                yield smaller[:i] + [smaller[i] + [head]] + smaller[i + 1:]
            yield smaller + [[head]]

    for classes in rec(items):
        yield Partition(classes)


@dataclass(frozen=True)
class Decomposition:
    """Strict two-stage form: class weights plus within-class choices.

    `omega` is a stochastic choice over the class labels; `sigmas` maps
    each label to the conditional choice on its class.  The recomposition
    identity p(a, A) = omega(label, image(A)) * sigma(a, A within class)
    is verified exactly before an instance is handed out.
    """

    partition: Partition
    omega: StochasticChoice
    sigmas: dict[str, StochasticChoice]

    @property
    def non_degenerate(self) -> bool:
        return self.partition.non_degenerate

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "partition": self.partition.to_json(),
            "omega": self.omega.to_json_dict(),
            "sigmas": {label: self.sigmas[label].to_json_dict() for label in sorted(self.sigmas)},
        }

    @classmethod
    def from_json_dict(cls, doc: dict[str, Any]) -> "Decomposition":
        partition = Partition.from_json(doc["partition"])
        omega_doc = doc["omega"]
        omega = StochasticChoice.from_table(
            omega_doc["universe"],
            {tuple(e["items"]): e["probs"] for e in omega_doc["menus"]},
        )
        sigmas = {}
        for label, sub in doc["sigmas"].items():
            sigmas[label] = StochasticChoice.from_table(
                sub["universe"], {tuple(e["items"]): e["probs"] for e in sub["menus"]}
            )
        return cls(partition, omega, sigmas)


@dataclass(frozen=True)
class WeakDecomposition:
    """Weak two-stage form: per-menu class weights plus within-class choices."""

    partition: Partition
    omega_family: dict[Menu, dict[str, Fraction]]
    sigmas: dict[str, StochasticChoice]

    @property
    def non_degenerate(self) -> bool:
        return self.partition.non_degenerate

    def to_json_dict(self) -> dict[str, Any]:
        family = []
        for menu in sorted(self.omega_family, key=lambda m: (len(m), m)):
            weights = self.omega_family[menu]
            family.append(
                {
                    "items": list(menu),
                    "weights": {label: str(weights[label]) for label in sorted(weights)},
                }
            )
        return {
            "partition": self.partition.to_json(),
            "omega_family": family,
            "sigmas": {label: self.sigmas[label].to_json_dict() for label in sorted(self.sigmas)},
        }

    @classmethod
    def from_json_dict(cls, doc: dict[str, Any]) -> "WeakDecomposition":
        from .core import parse_probability

        partition = Partition.from_json(doc["partition"])
        family: dict[Menu, dict[str, Fraction]] = {}
        for entry in doc["omega_family"]:
            menu = canon_menu(entry["items"])
            family[menu] = {lab: parse_probability(v) for lab, v in entry["weights"].items()}
        sigmas = {}
        for label, sub in doc["sigmas"].items():
            sigmas[label] = StochasticChoice.from_table(
                sub["universe"], {tuple(e["items"]): e["probs"] for e in sub["menus"]}
            )
        return cls(partition, family, sigmas)


def compose(d: Decomposition | WeakDecomposition) -> StochasticChoice:
    """Rebuild the full choice from a (weak) decomposition.

    Components must be positive; the result then is positive and
    full-domain by construction.
    """
    partition = d.partition
    for label, sigma in d.sigmas.items():
        if not sigma.positive:
            raise ComponentNotPositiveError(f"sigma[{label}]")
    weak = isinstance(d, WeakDecomposition)
    if not weak and not d.omega.positive:
        raise ComponentNotPositiveError("omega")
    table: dict[Menu, dict[str, Fraction]] = {}
    for menu in all_menus(partition.universe):
        image = partition.image(menu)
        if weak:
            weights = d.omega_family[menu]
            if any(weights[label] <= 0 for label in image):
                raise ComponentNotPositiveError(f"omega_family[{menu}]")
        row: dict[str, Fraction] = {}
        for item in menu:
            label = partition.label_of(item)
            w = weights[label] if weak else d.omega.prob(label, image)
            inner = partition.within_class(menu, label)
            row[item] = w * d.sigmas[label].prob(item, inner)
        table[menu] = row
    return StochasticChoice.from_table(partition.universe, table)


def _sigmas_from_restriction(p: StochasticChoice, partition: Partition) -> dict[str, StochasticChoice]:
    return {
        label: p.restrict(partition.class_of_label(label)) for label in partition.labels
    }


def _verify_recomposition(
    p: StochasticChoice,
    partition: Partition,
    sigmas: dict[str, StochasticChoice],
    weight_for: Any,
    epsilon: Fraction,
) -> None:
    """Raise RecompositionMismatchError at the first menu/item drift."""
    for menu in all_menus(partition.universe):
        image = partition.image(menu)
        for item in menu:
            label = partition.label_of(item)
            inner = partition.within_class(menu, label)
            expected = weight_for(menu, image, label) * sigmas[label].prob(item, inner)
            observed = p.prob(item, menu)
            if not eq_within(expected, observed, epsilon):
                ratio_ce = None
                cls = partition.class_of_label(label)
                if len(cls) >= 2:
                    ratio = check_ratio_independence(p, cls, epsilon)
                    if not ratio.holds:
                        ratio_ce = ratio.counterexample
                raise RecompositionMismatchError(menu, item, expected, observed, ratio_ce)


def decompose(p: StochasticChoice, partition: Partition, epsilon: Fraction = ZERO) -> Decomposition:
    """Strict decomposition with respect to a given partition.

    Within-class choices are the restrictions of `p`; the class weight
    for label i on an index menu J is the class mass of any menu whose
    image is J, checked to be the same for all of them
    (`OmegaIllDefinedError` otherwise).  The recomposition identity is
    then verified exactly (`RecompositionMismatchError` on drift, with
    the within-class ratio counterexample attached when one exists).
    """
    if partition.universe != p.universe:
        raise PartitionError("partition does not cover the universe")
    if not p.positive:
        raise NotPositiveError("two-stage decomposition needs positive probabilities")
    sigmas = _sigmas_from_restriction(p, partition)

    groups: dict[Menu, list[Menu]] = {}
    for menu in all_menus(p.universe):
        groups.setdefault(partition.image(menu), []).append(menu)

    omega_table: dict[Menu, dict[str, Fraction]] = {}
    for image, menus in groups.items():
        first = menus[0]
        masses = {
            label: p.event_prob(partition.class_of_label(label), first) for label in image
        }
        for other in menus[1:]:
            for label in image:
                mass = p.event_prob(partition.class_of_label(label), other)
                if not eq_within(mass, masses[label], epsilon):
                    raise OmegaIllDefinedError(label, image, first, other, masses[label], mass)
        omega_table[image] = masses
    omega = StochasticChoice.from_table(partition.labels, omega_table)

    _verify_recomposition(
        p, partition, sigmas, lambda menu, image, label: omega.prob(label, image), epsilon
    )
    return Decomposition(partition, omega, sigmas)


def decompose_weak(
    p: StochasticChoice, partition: Partition, epsilon: Fraction = ZERO
) -> WeakDecomposition:
    """Weak decomposition: per-menu class weights, no cross-menu constraint.

    Always well-defined at the weight stage; fails only when ratio
    independence breaks inside a class, surfacing as
    `RecompositionMismatchError`.
    """
    if partition.universe != p.universe:
        raise PartitionError("partition does not cover the universe")
    if not p.positive:
        raise NotPositiveError("two-stage decomposition needs positive probabilities")
    sigmas = _sigmas_from_restriction(p, partition)
    family: dict[Menu, dict[str, Fraction]] = {}
    for menu in all_menus(p.universe):
        image = partition.image(menu)
        family[menu] = {
            label: p.event_prob(partition.class_of_label(label), menu) for label in image
        }
    _verify_recomposition(
        p, partition, sigmas, lambda menu, image, label: family[menu][label], epsilon
    )
    return WeakDecomposition(partition, family, sigmas)


def enumerate_categories(
    p: StochasticChoice,
    weak: bool = False,
    epsilon: Fraction = ZERO,
    limit: int | None = None,
) -> list[Menu]:
    """All non-trivial (weak) categories, largest first then lexicographic.

    An empty result means no non-degenerate two-stage structure exists,
    in the strict or weak sense respectively.  For the strict variant,
    candidates that properly overlap an already-found category are
    skipped: two distinct non-trivial categories are always disjoint or
    nested, so such candidates cannot qualify.
    """
    bound = effective_bound(MAX_UNIVERSE, limit)
    if p.n > bound:
        raise SizeBoundError("universe", p.n, bound)
    if not p.positive:
        raise NotPositiveError()
    found: list[Menu] = []
    found_sets: list[set[str]] = []
    for size in range(p.n - 1, 1, -1):
        for candidate in subsets(p.universe, size, size):
            if not weak:
                cand_set = set(candidate)
                skip = False
                for known in found_sets:
                    inter = cand_set & known
                    if inter and inter != cand_set and inter != known:
                        skip = True
                        break
                if skip:
                    continue
            verdict = (
                is_weak_category(p, candidate, epsilon)
                if weak
                else is_category(p, candidate, epsilon)
            )
            if verdict.holds:
                found.append(candidate)
                if not weak:
                    found_sets.append(set(candidate))
    return found


def has_nontrivial_weak_category(
    p: StochasticChoice, epsilon: Fraction = ZERO, limit: int | None = None
) -> bool:
    """Early-exit existence test used by the classifier."""
    bound = effective_bound(MAX_UNIVERSE, limit)
    if p.n > bound:
        raise SizeBoundError("universe", p.n, bound)
    for size in range(p.n - 1, 1, -1):
        for candidate in subsets(p.universe, size, size):
            if is_weak_category(p, candidate, epsilon).holds:
                return True
    return False


def coarsest_partition(
    p: StochasticChoice, epsilon: Fraction = ZERO, limit: int | None = None
) -> Partition | None:
    """The unique coarsest partition giving a non-degenerate structure.

    Greedy and deterministic: take the largest category (lexicographic
    tie-break), then recurse on the remaining items; leftovers become
    singletons.  Non-singleton classes of the result are exactly the
    maximal non-trivial categories.  Returns None when no non-trivial
    category exists, in which case the choice has no non-degenerate
    strict two-stage structure at all.
    """
    bound = effective_bound(MAX_UNIVERSE, limit)
    if p.n > bound:
        raise SizeBoundError("universe", p.n, bound)
    if not p.positive:
        raise NotPositiveError()
    classes: list[Menu] = []
    remaining = p.universe
    while len(remaining) >= 2:
        picked = None
        for size in range(min(len(remaining), p.n - 1), 1, -1):
            for candidate in subsets(remaining, size, size):
                if is_category(p, candidate, epsilon).holds:
                    picked = candidate
                    break
            if picked is not None:
                break
        if picked is None:
            break
        classes.append(picked)
        remaining = tuple(x for x in remaining if x not in picked)
    if not classes:
        return None
    classes.extend((x,) for x in remaining)
    return Partition(classes)


@dataclass(frozen=True)
class PartitionPoset:
    """All partitions under which the choice has non-degenerate structure.

    `coarser_pairs` holds index pairs (i, j) meaning members[i] is
    coarser than members[j].  When the poset is nonempty its maximum is
    unique and equals the coarsest partition.
    """

    members: tuple[Partition, ...]
    coarser_pairs: frozenset[tuple[int, int]]
    maximum: Partition | None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "members": [m.to_json() for m in self.members],
            "coarser_pairs": sorted(list(pair) for pair in self.coarser_pairs),
            "maximum": None if self.maximum is None else self.maximum.to_json(),
        }


def _disjoint_families(categories: list[Menu]) -> Iterator[tuple[Menu, ...]]:
    """Nonempty families of pairwise disjoint sets, in enumeration order."""
    n = len(categories)

    def rec(start: int, chosen: list[Menu], used: set[str]) -> Iterator[tuple[Menu, ...]]:
        for i in range(start, n):
            cand = categories[i]
            if used & set(cand):
                continue
            picked = chosen + [cand]
            yield tuple(picked)
            yield from rec(i + 1, picked, used | set(cand))

    yield from rec(0, [], set())


def partition_poset(
    p: StochasticChoice, epsilon: Fraction = ZERO, limit: int | None = None
) -> PartitionPoset:
    """Build the refinement poset of valid non-degenerate partitions.

    Candidate partitions combine pairwise disjoint non-trivial
    categories with singletons for the rest (non-singleton classes of a
    valid partition must be categories, so nothing is missed); each
    candidate is then confirmed by running the strict decomposition.
    The unique maximum is cross-checked against `coarsest_partition`.
    """
    categories = enumerate_categories(p, weak=False, epsilon=epsilon, limit=limit)
    members: list[Partition] = []
    for family in _disjoint_families(categories):
        covered = {x for c in family for x in c}
        classes = list(family) + [(x,) for x in p.universe if x not in covered]
        candidate = Partition(classes)
        if not candidate.non_degenerate:
            continue
        try:
            decompose(p, candidate, epsilon)
        except (OmegaIllDefinedError, RecompositionMismatchError):
            continue
        members.append(candidate)
    members.sort(key=lambda part: (part.k, part.classes))
    pairs = set()
    for i, coarse in enumerate(members):
        for j, fine in enumerate(members):
            if i != j and coarse != fine and coarse.is_coarser_than(fine):
                pairs.add((i, j))
    maximum: Partition | None = None
    if members:
        dominated = {j for (_, j) in pairs}
        maxima = [m for i, m in enumerate(members) if i not in dominated]
        if len(maxima) != 1:
            raise InternalConsistencyError(
                f"expected a unique maximal partition, found {len(maxima)}"
            )
        maximum = maxima[0]
        expected = coarsest_partition(p, epsilon, limit)
        if expected != maximum:
            raise InternalConsistencyError("poset maximum disagrees with the coarsest partition")
    return PartitionPoset(tuple(members), frozenset(pairs), maximum)
