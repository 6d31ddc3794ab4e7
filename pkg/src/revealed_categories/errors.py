"""Typed exception hierarchy.

Every failure the library can diagnose maps to exactly one exception
class, and exceptions that act as certificates (a pair of menus with
unequal masses, a recomposition mismatch, an infeasibility witness)
carry the offending values so callers can re-verify them against the
data.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any


class ChoiceError(Exception):
    """Base class for all library errors."""

    def to_json_dict(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class DatasetFormatError(ChoiceError):
    """Structurally malformed input (bad JSON shape, duplicate menus, bad fraction syntax)."""


class MissingMenuError(ChoiceError):
    def __init__(self, menu: tuple[str, ...]):
        self.menu = menu
        super().__init__(f"menu {list(menu)} is absent from the table")


class BadSumError(ChoiceError):
    def __init__(self, menu: tuple[str, ...], total: Fraction):
        self.menu = menu
        self.total = total
        super().__init__(f"menu {list(menu)} probabilities sum to {total}, expected 1")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "error": "BadSumError",
            "menu": list(self.menu),
            "total": str(self.total),
        }


class OutOfRangeError(ChoiceError):
    def __init__(self, menu: tuple[str, ...], item: str, value: Fraction):
        self.menu = menu
        self.item = item
        self.value = value
        super().__init__(f"p({item}, {list(menu)}) = {value} lies outside [0, 1]")


class ForeignItemError(ChoiceError):
    def __init__(self, item: str, where: str):
        self.item = item
        super().__init__(f"item {item!r} {where}")


class EmptyRestrictionError(ChoiceError):
    def __init__(self) -> None:
        super().__init__("cannot restrict a choice to an empty item set")


class NotPositiveError(ChoiceError):
    """Operation needs strictly positive choice probabilities."""

    def __init__(self, detail: str = "") -> None:
        super().__init__(detail or "choice is not positive; ratio checks are undefined")


class SizeBoundError(ChoiceError):
    def __init__(self, what: str, actual: int, limit: int):
        self.what = what
        self.actual = actual
        self.limit = limit
        super().__init__(
            f"{what} size {actual} exceeds the bound {limit}; raise it with the "
            f"REVEALED_CATEGORIES_MAX_N environment variable or an explicit limit argument"
        )


class PartitionError(ChoiceError):
    """Classes do not form a partition of the universe."""


class DegeneratePartitionError(ChoiceError):
    def __init__(self) -> None:
        super().__init__("operation requires a non-degenerate partition (1 < classes < items)")


class OmegaIllDefinedError(ChoiceError):
    """Two menus with the same class image carry different class masses.

    Certificate for decomposition failure at the class-weight stage.
    """

    def __init__(
        self,
        class_label: str,
        index_menu: tuple[str, ...],
        menu_a: tuple[str, ...],
        menu_b: tuple[str, ...],
        mass_a: Fraction,
        mass_b: Fraction,
    ):
        self.class_label = class_label
        self.index_menu = index_menu
        self.menu_a = menu_a
        self.menu_b = menu_b
        self.mass_a = mass_a
        self.mass_b = mass_b
        super().__init__(
            f"class weight for {class_label} is ill-defined: mass {mass_a} on "
            f"{list(menu_a)} vs {mass_b} on {list(menu_b)}"
        )

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "error": "OmegaIllDefinedError",
            "class": self.class_label,
            "index_menu": list(self.index_menu),
            "menu_a": list(self.menu_a),
            "menu_b": list(self.menu_b),
            "mass_a": str(self.mass_a),
            "mass_b": str(self.mass_b),
        }


class RecompositionMismatchError(ChoiceError):
    """The two-stage product fails to reproduce an observed probability.

    `ratio_counterexample` (when present) is the within-class ratio drift
    that explains the mismatch.
    """

    def __init__(
        self,
        menu: tuple[str, ...],
        item: str,
        recomposed: Fraction,
        observed: Fraction,
        ratio_counterexample: Any | None = None,
    ):
        self.menu = menu
        self.item = item
        self.recomposed = recomposed
        self.observed = observed
        self.ratio_counterexample = ratio_counterexample
        super().__init__(
            f"recomposition gives p({item}, {list(menu)}) = {recomposed}, observed {observed}"
        )

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "error": "RecompositionMismatchError",
            "menu": list(self.menu),
            "item": self.item,
            "recomposed": str(self.recomposed),
            "observed": str(self.observed),
        }
        if self.ratio_counterexample is not None:
            doc["ratio_counterexample"] = self.ratio_counterexample.to_json_dict()
        return doc


class ComponentNotPositiveError(ChoiceError):
    def __init__(self, which: str) -> None:
        super().__init__(f"composition requires positive components; {which} has a zero entry")


class MassInvarianceViolatedError(ChoiceError):
    """Class masses vary across menus with the same class image."""

    def __init__(self, counterexample: Any):
        self.counterexample = counterexample
        super().__init__(f"class-mass invariance fails: {counterexample}")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "error": "MassInvarianceViolatedError",
            "counterexample": self.counterexample.to_json_dict(),
        }


class NotRepresentableError(ChoiceError):
    """No population over resolvable choices reproduces the observed data.

    Can occur even when class masses are invariant: representability also
    needs every menu probability to be expressible through base and fiber
    coordinates alone.
    """

    def __init__(self, detail: str):
        super().__init__(detail)


class NonBlockSupportError(ChoiceError):
    """No block-ordered witness exists for the composed choice."""

    def __init__(self, offending_order: tuple[str, ...] | None):
        self.offending_order = offending_order
        detail = "no block-supported random-utility witness exists"
        if offending_order is not None:
            detail += f"; input weight on non-block order {list(offending_order)}"
        super().__init__(detail)

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"error": "NonBlockSupportError"}
        if self.offending_order is not None:
            doc["offending_order"] = list(self.offending_order)
        return doc


class ZeroNestMassError(ChoiceError):
    def __init__(self, menu: tuple[str, ...]):
        self.menu = menu
        super().__init__(f"all nest utilities vanish on menu {list(menu)}")


class BadParameterError(ChoiceError):
    """Model parameter outside its admissible range or not exactly computable."""


class InternalConsistencyError(ChoiceError):
    """A relation the theory guarantees failed to hold; indicates a bug."""
