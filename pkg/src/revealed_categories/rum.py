"""Random-utility rationalizability.

A choice is random-utility rationalizable (RUM) when some probability
distribution over linear orders of the universe reproduces every
p(a, A) as the probability that a is the order-maximal item of A.  On a
full menu domain the signed superset sums

    bm(a, A) = sum over B >= A of (-1)^{|B \\ A|} p(a, B)

are nonnegative exactly for RUM choices, and when they are, chaining
them top-down yields an explicit witness.  Every witness produced here
is re-verified against its marginal equalities before being returned;
an exact linear-feasibility solve stands behind the construction as a
fallback and as the refutation cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from typing import Any, Iterable

from .categorize import Decomposition, Partition, compose
from .core import Menu, StochasticChoice, ZERO, all_menus, canon_menu, subsets
from .errors import (
    InternalConsistencyError,
    NonBlockSupportError,
    SizeBoundError,
)
from .exactlp import solve_equalities
from .limits import MAX_RUM_UNIVERSE, effective_bound

Order = tuple[str, ...]

ONE = Fraction(1)


@dataclass(frozen=True)
class RumRepresentation:
    """A probability distribution over linear orders, best item first.

    Only strictly positive weights are stored.  `validate` checks the
    simplex constraints; `rationalizes` checks the marginal equalities
    against a choice, exactly.
    """

    universe: Menu
    weights: dict[Order, Fraction]

    def validate(self) -> None:
        total = ZERO
        base = set(self.universe)
        for order, weight in self.weights.items():
            if set(order) != base or len(order) != len(self.universe):
                raise ValueError(f"order {order} is not a permutation of the universe")
            if weight < 0:
                raise ValueError(f"negative weight on {order}")
            total += weight
        if total != 1:
            raise ValueError(f"weights sum to {total}, expected 1")

    def support(self) -> list[Order]:
        return sorted(order for order, w in self.weights.items() if w > 0)

    def choice(self) -> StochasticChoice:
        """The stochastic choice induced by best-of-menu selection."""
        table: dict[Menu, dict[str, Fraction]] = {
            menu: {item: ZERO for item in menu} for menu in all_menus(self.universe)
        }
        for order, weight in self.weights.items():
            if weight == 0:
                continue
            for menu, row in table.items():
                present = set(menu)
                for item in order:
                    if item in present:
                        row[item] += weight
                        break
        return StochasticChoice.from_table(self.universe, table)

    def rationalizes(self, p: StochasticChoice) -> bool:
        return self.universe == p.universe and self.choice() == p

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "universe": list(self.universe),
            "weights": [
                {"order": list(order), "weight": str(self.weights[order])}
                for order in self.support()
            ],
        }


@dataclass(frozen=True)
class Refutation:
    """Why no witness exists: a negative signed sum, or an infeasible system."""

    kind: str
    item: str | None = None
    menu: Menu | None = None
    value: Fraction | None = None
    farkas: list[Fraction] | None = None

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind}
        if self.item is not None:
            doc["item"] = self.item
        if self.menu is not None:
            doc["menu"] = list(self.menu)
        if self.value is not None:
            doc["value"] = str(self.value)
        if self.farkas is not None:
            doc["certificate"] = [str(v) for v in self.farkas]
        return doc


@dataclass(frozen=True)
class RumResult:
    is_rum: bool
    witness: RumRepresentation | None = None
    refutation: Refutation | None = None

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"is_rum": self.is_rum}
        if self.witness is not None:
            doc["witness"] = self.witness.to_json_dict()
        if self.refutation is not None:
            doc["refutation"] = self.refutation.to_json_dict()
        return doc


def signed_superset_sums(p: StochasticChoice) -> dict[tuple[str, Menu], Fraction]:
    """All values bm(a, A), computed top-down from the full menu.

    Uses the recursion bm(a, A) = p(a, A) - sum of bm(a, B) over strict
    supersets B, which is the inclusion-exclusion sum rearranged.
    """
    values: dict[tuple[str, Menu], Fraction] = {}
    menus = sorted(all_menus(p.universe), key=len, reverse=True)
    for menu in menus:
        rest = tuple(x for x in p.universe if x not in menu)
        row = p.row(menu)
        for item in menu:
            acc = row[item]
            for extra in subsets(rest, 1):
                acc -= values[(item, canon_menu(menu + extra))]
            values[(item, menu)] = acc
    return values


def _chain_witness(
    p: StochasticChoice, bm: dict[tuple[str, Menu], Fraction]
) -> dict[Order, Fraction] | None:
    """Witness built by ranking items one at a time.

    The weight of an order is the product over positions of
    bm(item, remaining) / (sum of bm over the remaining set).  Returns
    None when a zero normalizer blocks a branch that still carries mass;
    the caller then falls back to the feasibility solver.
    """
    totals: dict[Menu, Fraction] = {}
    for menu in all_menus(p.universe):
        totals[menu] = sum((bm[(x, menu)] for x in menu), ZERO)
    weights: dict[Order, Fraction] = {}

    def descend(remaining: Menu, prefix: tuple[str, ...], mass: Fraction) -> bool:
        if mass == 0:
            return True
        if not remaining:
            weights[prefix] = mass
            return True
        denom = totals[remaining]
        if denom == 0:
            return False
        for item in remaining:
            numer = bm[(item, remaining)]
            if numer == 0:
                continue
            rest = tuple(x for x in remaining if x != item)
            if not descend(rest, prefix + (item,), mass * numer / denom):
                return False
        return True

    if not descend(p.universe, (), ONE):
        return None
    return weights


def _orders(universe: Menu) -> list[Order]:
    return list(permutations(universe))


def _feasibility_rows(
    p: StochasticChoice, orders: list[Order]
) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Marginal equalities as a linear system over order weights.

    One row per (menu, item) with the last item of each menu dropped
    (rows of a menu sum to the total-mass row), plus a single
    normalization row.
    """
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for menu in all_menus(p.universe):
        present = set(menu)
        winners = []
        for order in orders:
            for item in order:
                if item in present:
                    winners.append(item)
                    break
        row_items = menu[:-1] if len(menu) > 1 else menu[:0]
        for item in row_items:
            rows.append([ONE if winners[k] == item else ZERO for k in range(len(orders))])
            rhs.append(p.prob(item, menu))
    rows.append([ONE] * len(orders))
    rhs.append(ONE)
    return rows, rhs


def check_rum(p: StochasticChoice, limit: int | None = None) -> RumResult:
    """Decide rationalizability; produce an exact witness or a refutation.

    A negative signed superset sum refutes immediately (and is certified
    by the value itself).  Otherwise the chained construction gives a
    witness, verified exactly; degenerate zero patterns fall back to the
    feasibility solver over all |X|! order weights.
    """
    bound = effective_bound(MAX_RUM_UNIVERSE, limit)
    if p.n > bound:
        raise SizeBoundError("universe (order enumeration)", p.n, bound)
    bm = signed_superset_sums(p)
    for menu in all_menus(p.universe):
        for item in menu:
            value = bm[(item, menu)]
            if value < 0:
                refutation = Refutation(
                    kind="negative-signed-sum", item=item, menu=menu, value=value
                )
                return RumResult(False, refutation=refutation)
    weights = _chain_witness(p, bm)
    if weights is not None:
        witness = RumRepresentation(p.universe, weights)
        witness.validate()
        if witness.rationalizes(p):
            return RumResult(True, witness=witness)
    return solve_rum_feasibility(p)


def solve_rum_feasibility(p: StochasticChoice, orders: list[Order] | None = None) -> RumResult:
    """Exact pivoting over explicit order weights; complete but heavier."""
    if orders is None:
        orders = _orders(p.universe)
    rows, rhs = _feasibility_rows(p, orders)
    result = solve_equalities(rows, rhs)
    if not result.feasible:
        return RumResult(
            False, refutation=Refutation(kind="infeasible-system", farkas=result.farkas)
        )
    weights = {
        orders[k]: value for k, value in enumerate(result.solution or []) if value != 0
    }
    witness = RumRepresentation(p.universe, weights)
    witness.validate()
    if not witness.rationalizes(p):
        raise InternalConsistencyError("feasibility solution fails the marginal equalities")
    return RumResult(True, witness=witness)


# -- composition with a partition ----------------------------------------


def is_block_order(order: Order, partition: Partition) -> bool:
    """True when the order lists each class as one contiguous block."""
    seen: list[str] = []
    for item in order:
        label = partition.label_of(item)
        if seen and seen[-1] == label:
            continue
        if label in seen:
            return False
        seen.append(label)
    return True


def block_orders(partition: Partition) -> list[Order]:
    """All orders ranking classes as contiguous blocks, canonical order."""
    result: list[Order] = []
    class_orders = [
        _orders(cls) for cls in partition.classes
    ]
    for label_order in permutations(partition.labels):
        idxs = [partition.class_index(lab) for lab in label_order]
        for combo in product(*(class_orders[i] for i in idxs)):
            flat: tuple[str, ...] = ()
            for segment in combo:
                flat += segment
            result.append(flat)
    return sorted(result)


def compose_rum(
    partition: Partition,
    v: RumRepresentation,
    s: dict[str, RumRepresentation],
) -> RumRepresentation:
    """Product representation over block orders.

    Draw an order of class labels from `v` and an order within each
    class from `s`; concatenating them ranks the whole universe.  The
    result rationalizes the composition of the choices that `v` and `s`
    rationalize.
    """
    v.validate()
    for label in partition.labels:
        s[label].validate()
    weights: dict[Order, Fraction] = {}
    label_orders = [(order, w) for order, w in v.weights.items() if w > 0]
    per_class = {
        label: [(o, w) for o, w in s[label].weights.items() if w > 0]
        for label in partition.labels
    }
    for label_order, vw in label_orders:
        for combo in product(*(per_class[label] for label in label_order)):
            flat: tuple[str, ...] = ()
            weight = vw
            for segment, sw in combo:
                flat += segment
                weight *= sw
            weights[flat] = weights.get(flat, ZERO) + weight
    rep = RumRepresentation(partition.universe, weights)
    rep.validate()
    return rep


def decompose_rum(
    p_rum: RumRepresentation, d: Decomposition
) -> tuple[RumRepresentation, dict[str, RumRepresentation]]:
    """Split a witness of a composed choice into stage witnesses.

    For a block-supported witness the class-order marginal rationalizes
    the class-weight stage, and each within-class marginal rationalizes
    that class's conditional choice; both are verified before returning.
    A witness with weight outside the block orders is not trusted:
    the block-restricted system is re-solved for the composed choice,
    and only if that fails is `NonBlockSupportError` raised.
    """
    partition = d.partition
    composed = compose(d)
    offending = None
    for order, weight in p_rum.weights.items():
        if weight > 0 and not is_block_order(order, partition):
            offending = order
            break
    witness = p_rum
    if offending is not None:
        candidates = block_orders(partition)
        resolved = solve_rum_feasibility(composed, candidates)
        if not resolved.is_rum or resolved.witness is None:
            raise NonBlockSupportError(offending)
        witness = resolved.witness
    else:
        if not witness.rationalizes(composed):
            raise ValueError("representation does not rationalize the composed choice")

    v_weights: dict[Order, Fraction] = {}
    s_weights: dict[str, dict[Order, Fraction]] = {label: {} for label in partition.labels}
    for order, weight in witness.weights.items():
        if weight == 0:
            continue
        label_seq: list[str] = []
        for item in order:
            label = partition.label_of(item)
            if not label_seq or label_seq[-1] != label:
                label_seq.append(label)
        key = tuple(label_seq)
        v_weights[key] = v_weights.get(key, ZERO) + weight
        for label in partition.labels:
            cls = set(partition.class_of_label(label))
            restricted = tuple(x for x in order if x in cls)
            table = s_weights[label]
            table[restricted] = table.get(restricted, ZERO) + weight
    v = RumRepresentation(partition.labels, v_weights)
    v.validate()
    if not v.rationalizes(d.omega):
        raise InternalConsistencyError("class-order marginal fails to rationalize the weights")
    s: dict[str, RumRepresentation] = {}
    for label in partition.labels:
        rep = RumRepresentation(partition.class_of_label(label), s_weights[label])
        rep.validate()
        if not rep.rationalizes(d.sigmas[label]):
            raise InternalConsistencyError(
                f"within-class marginal fails to rationalize sigma[{label}]"
            )
        s[label] = rep
    return v, s


# -- local rationalizability ----------------------------------------------


@dataclass(frozen=True)
class LocalRationalizabilityResult:
    """Feasibility of rationalizing the choice conditioned on one subset."""

    feasible: bool
    subject: Menu
    distribution: RumRepresentation | None = None
    refutation: Refutation | None = None
    conflict: dict[str, Any] | None = None

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"feasible": self.feasible, "subject": list(self.subject)}
        if self.distribution is not None:
            doc["distribution"] = self.distribution.to_json_dict()
        if self.refutation is not None:
            doc["refutation"] = self.refutation.to_json_dict()
        if self.conflict is not None:
            doc["conflict"] = self.conflict
        return doc


def check_local_rationalizability(
    p: StochasticChoice, subset: Iterable[str], limit: int | None = None
) -> LocalRationalizabilityResult:
    """Can choices within `subset` be driven by orders over it alone?

    Requires p(x, A) = p(overlap, A) * q(x best in the overlap) for all
    menus.  The conditional probabilities must therefore agree across
    menus with the same overlap; when they do, the question reduces to
    rationalizability of the conditional choice over the subset.
    """
    g = canon_menu(subset)
    bound = effective_bound(MAX_RUM_UNIVERSE, limit)
    if len(g) > bound:
        raise SizeBoundError("subset (order enumeration)", len(g), bound)
    for item in g:
        if item not in p.universe:
            raise ValueError(f"item {item!r} is not in the universe")
    conditional: dict[Menu, dict[str, Fraction]] = {}
    witness_menu: dict[Menu, Menu] = {}
    for menu in all_menus(p.universe):
        overlap = tuple(x for x in g if x in menu)
        if not overlap:
            continue
        mass = p.event_prob(overlap, menu)
        if mass == 0:
            continue  # constraints degenerate to 0 = 0
        row = {x: p.prob(x, menu) / mass for x in overlap}
        if overlap in conditional:
            if conditional[overlap] != row:
                prior = witness_menu[overlap]
                bad = next(x for x in overlap if conditional[overlap][x] != row[x])
                conflict = {
                    "item": bad,
                    "menu_a": list(prior),
                    "menu_b": list(menu),
                    "value_a": str(conditional[overlap][bad]),
                    "value_b": str(row[bad]),
                }
                return LocalRationalizabilityResult(False, g, conflict=conflict)
        else:
            conditional[overlap] = row
            witness_menu[overlap] = menu
    # every nonempty S inside the subset is its own menu, so the
    # conditional table is complete whenever no conflict was found
    reduced = StochasticChoice.from_table(g, conditional)
    result = check_rum(reduced, limit=limit)
    if result.is_rum:
        return LocalRationalizabilityResult(True, g, distribution=result.witness)
    return LocalRationalizabilityResult(False, g, refutation=result.refutation)
