"""Exact stochastic choice data over a finite universe.

A stochastic choice assigns every nonempty menu a probability
distribution over its items.  Probabilities are `fractions.Fraction`
throughout: the properties this library decides are equalities of
rationals, and deciding them in floating point would be meaningless.
An optional tolerance ``epsilon`` is threaded through the checking
modules for empirical data; it defaults to exact comparison.

Menus are canonically represented as sorted tuples of item ids and
enumerated by size, then lexicographically.  `StochasticChoice` is
immutable after construction; every operation here is pure.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Any, Iterable, Iterator

from .errors import (
    BadSumError,
    DatasetFormatError,
    EmptyRestrictionError,
    ForeignItemError,
    MissingMenuError,
    OutOfRangeError,
    SizeBoundError,
)
from .limits import MAX_UNIVERSE, effective_bound

Menu = tuple[str, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


def canon_menu(items: Iterable[str]) -> Menu:
    """Canonical menu form: sorted tuple of distinct item ids."""
    return tuple(sorted(set(items)))


def menu_key(menu: Menu) -> tuple[int, Menu]:
    return (len(menu), menu)


def subsets(pool: Iterable[str], min_size: int = 1, max_size: int | None = None) -> Iterator[Menu]:
    """All subsets of `pool` in canonical order (size, then lexicographic)."""
    base = tuple(sorted(pool))
    top = len(base) if max_size is None else min(max_size, len(base))
    for k in range(min_size, top + 1):
        yield from combinations(base, k)


def all_menus(universe: Iterable[str]) -> list[Menu]:
    """Every nonempty menu over `universe`, canonically ordered."""
    return list(subsets(universe, 1))


def parse_probability(raw: Any) -> Fraction:
    """Parse an exact probability from "p/q", a decimal string, or a number.

    Decimal strings convert exactly ("0.5" -> 1/2).  Floats are rejected:
    they carry representation error the library refuses to launder.
    """
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, bool):
        raise DatasetFormatError(f"bad probability value {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, str):
        try:
            return Fraction(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise DatasetFormatError(f"bad probability string {raw!r}") from exc
    raise DatasetFormatError(f"bad probability value {raw!r} of type {type(raw).__name__}")


def eq_within(lhs: Fraction, rhs: Fraction, epsilon: Fraction = ZERO) -> bool:
    """Equality test with optional tolerance; exact when epsilon is 0."""
    if epsilon == 0:
        return lhs == rhs
    return abs(lhs - rhs) <= epsilon


def strictly_less(lhs: Fraction, rhs: Fraction, epsilon: Fraction = ZERO) -> bool:
    """Strict inequality with margin: lhs < rhs by more than epsilon."""
    return rhs - lhs > epsilon


class StochasticChoice:
    """A full-domain map (menu, item) -> exact probability.

    Invariants, enforced at construction:
      * an entry exists for every nonempty menu over the universe;
      * within each menu the probabilities sum to exactly 1 (or within
        the construction epsilon, for tolerance-mode validation);
      * every probability lies in [0, 1].

    `positive` records whether every available item has strictly
    positive probability in every menu.  Instances are immutable and
    safe to share.
    """

    __slots__ = ("_universe", "_table", "_positive")

    def __init__(self, universe: Menu, table: dict[Menu, dict[str, Fraction]], positive: bool):
        self._universe = universe
        self._table = table
        self._positive = positive

    @classmethod
    def from_table(
        cls,
        universe: Iterable[str],
        table: dict[Menu, dict[str, Fraction]] | dict[Any, dict[str, Any]],
        epsilon: Fraction = ZERO,
    ) -> "StochasticChoice":
        """Build and check a choice from a menu -> (item -> probability) map.

        This is the unrestricted constructor used for internal objects
        (class weights over index labels, within-class choices); dataset
        entry points go through `validate_dataset`, which additionally
        enforces the minimum universe size and the practical bound.
        """
        uni = canon_menu(universe)
        if not uni:
            raise DatasetFormatError("universe is empty")
        normalized: dict[Menu, dict[str, Fraction]] = {}
        for raw_menu, row in table.items():
            menu = canon_menu(raw_menu)
            if menu in normalized:
                raise DatasetFormatError(f"duplicate menu {list(menu)}")
            for item in menu:
                if item not in uni:
                    raise ForeignItemError(item, "is not in the universe")
            clean: dict[str, Fraction] = {}
            for item, value in row.items():
                if item not in menu:
                    raise ForeignItemError(item, f"is not in menu {list(menu)}")
                clean[item] = parse_probability(value)
            for item in menu:
                if item not in clean:
                    raise DatasetFormatError(
                        f"menu {list(menu)} has no probability for item {item!r}"
                    )
            normalized[menu] = clean
        positive = True
        for menu in subsets(uni, 1):
            if menu not in normalized:
                raise MissingMenuError(menu)
            row = normalized[menu]
            total = ZERO
            for item in menu:
                value = row[item]
                if value < -epsilon or value > ONE + epsilon:
                    raise OutOfRangeError(menu, item, value)
                if value <= 0:
                    positive = False
                total += value
            if not eq_within(total, ONE, epsilon):
                raise BadSumError(menu, total)
        return cls(uni, normalized, positive)

    # -- observation ---------------------------------------------------

    @property
    def universe(self) -> Menu:
        return self._universe

    @property
    def n(self) -> int:
        return len(self._universe)

    @property
    def positive(self) -> bool:
        return self._positive

    def menus(self) -> list[Menu]:
        return all_menus(self._universe)

    def prob(self, item: str, menu: Iterable[str]) -> Fraction:
        """p(item, menu); 0 when the item is not offered."""
        key = canon_menu(menu)
        row = self._table.get(key)
        if row is None:
            raise MissingMenuError(key)
        return row.get(item, ZERO)

    def row(self, menu: Iterable[str]) -> dict[str, Fraction]:
        key = canon_menu(menu)
        row = self._table.get(key)
        if row is None:
            raise MissingMenuError(key)
        return dict(row)

    def event_prob(self, event: Iterable[str], menu: Iterable[str]) -> Fraction:
        """Probability that the chosen item falls in `event`: sum over the overlap."""
        key = canon_menu(menu)
        row = self._table.get(key)
        if row is None:
            raise MissingMenuError(key)
        total = ZERO
        for item in set(event):
            total += row.get(item, ZERO)
        return total

    # -- algebra ---------------------------------------------------------

    def restrict(self, items: Iterable[str]) -> "StochasticChoice":
        """The choice over a sub-universe: the table on menus within `items`."""
        sub = canon_menu(items)
        if not sub:
            raise EmptyRestrictionError()
        for item in sub:
            if item not in self._universe:
                raise ForeignItemError(item, "is not in the universe")
        table = {menu: dict(self._table[menu]) for menu in subsets(sub, 1)}
        positive = all(v > 0 for row in table.values() for v in row.values())
        return StochasticChoice(sub, table, positive)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, StochasticChoice):
            return NotImplemented
        return self._universe == other._universe and self._table == other._table

    def __ne__(self, other: object) -> bool:
        result = self.__eq__(other)
        return NotImplemented if result is NotImplemented else not result

    def __repr__(self) -> str:
        kind = "positive" if self._positive else "non-negative"
        return f"StochasticChoice(n={self.n}, {kind})"

    # -- serialization ---------------------------------------------------

    def to_json_dict(self) -> dict[str, Any]:
        """Canonical JSON form: sorted universe, menus by size then lexicographic."""
        menus = []
        for menu in self.menus():
            row = self._table[menu]
            menus.append(
                {
                    "items": list(menu),
                    "probs": {item: str(row[item]) for item in menu},
                }
            )
        return {"universe": list(self._universe), "menus": menus}


def validate_dataset(
    doc: dict[str, Any],
    epsilon: Fraction = ZERO,
    limit: int | None = None,
) -> StochasticChoice:
    """Validate a raw dataset document into a `StochasticChoice`.

    The document shape is ``{"universe": [...], "menus": [{"items": [...],
    "probs": {...}}, ...]}``.  Datasets need at least three alternatives;
    smaller universes admit no meaningful two-stage structure.  Exactly
    one typed error is raised for the first defect found.
    """
    if not isinstance(doc, dict):
        raise DatasetFormatError("dataset document must be a JSON object")
    universe = doc.get("universe")
    if not isinstance(universe, list) or not all(isinstance(x, str) and x for x in universe):
        raise DatasetFormatError('"universe" must be a list of nonempty strings')
    if len(set(universe)) != len(universe):
        raise DatasetFormatError("universe contains duplicate ids")
    n = len(universe)
    if n < 3:
        raise DatasetFormatError("universe needs at least 3 alternatives")
    bound = effective_bound(MAX_UNIVERSE, limit)
    if n > bound:
        raise SizeBoundError("universe", n, bound)
    menus = doc.get("menus")
    if not isinstance(menus, list):
        raise DatasetFormatError('"menus" must be a list')
    table: dict[Menu, dict[str, Any]] = {}
    for entry in menus:
        if not isinstance(entry, dict) or "items" not in entry or "probs" not in entry:
            raise DatasetFormatError('each menu entry needs "items" and "probs"')
        items = entry["items"]
        if not isinstance(items, list) or not items:
            raise DatasetFormatError('"items" must be a nonempty list')
        menu = canon_menu(items)
        if menu in table:
            raise DatasetFormatError(f"duplicate menu {list(menu)}")
        probs = entry["probs"]
        if not isinstance(probs, dict):
            raise DatasetFormatError('"probs" must be an object')
        table[menu] = probs
    return StochasticChoice.from_table(universe, table, epsilon)


def dataset_from_json(doc: dict[str, Any], epsilon: Fraction = ZERO,
                      limit: int | None = None) -> StochasticChoice:
    """Alias of `validate_dataset` for symmetry with `to_json_dict`."""
    return validate_dataset(doc, epsilon, limit)
