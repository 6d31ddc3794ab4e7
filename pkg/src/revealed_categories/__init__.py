"""Exact analysis of categorized stochastic choice data.

The library takes complete stochastic choice data over a finite set of
alternatives (exact rational probabilities for every item in every
nonempty menu) and answers, with proofs rather than scores:

* which sets of alternatives behave as categories, and what the
  coarsest class structure is;
* whether the choice factors into a class-stage and a within-class
  stage, strictly or with menu-dependent class weights;
* which populations of deterministic two-stage choosers generate it;
* whether it, and its stages, are random-utility rationalizable;
* where it sits relative to the Luce rule, Nested Logit, and nested
  stochastic choice.

Everything is computed over `fractions.Fraction`; verdicts carry
re-checkable counterexamples or witnesses.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .axioms import (
    AxiomVerdict,
    Counterexample,
    check_choice_overload,
    check_content_monotonicity,
    check_local_iia,
    check_outside_neutrality,
    check_ratio_independence,
    is_category,
    is_weak_category,
    reevaluate,
)
from .categorize import (
    Decomposition,
    Partition,
    PartitionPoset,
    WeakDecomposition,
    all_partitions,
    coarsest_partition,
    compose,
    decompose,
    decompose_weak,
    enumerate_categories,
    has_nontrivial_weak_category,
    partition_poset,
    singleton_partition,
    trivial_partition,
)
from .core import (
    StochasticChoice,
    all_menus,
    canon_menu,
    parse_probability,
    subsets,
    validate_dataset,
)
from .errors import (
    BadParameterError,
    BadSumError,
    ChoiceError,
    ComponentNotPositiveError,
    DatasetFormatError,
    DegeneratePartitionError,
    EmptyRestrictionError,
    ForeignItemError,
    InternalConsistencyError,
    MassInvarianceViolatedError,
    MissingMenuError,
    NonBlockSupportError,
    NotPositiveError,
    NotRepresentableError,
    OmegaIllDefinedError,
    OutOfRangeError,
    PartitionError,
    RecompositionMismatchError,
    SizeBoundError,
    ZeroNestMassError,
)
from .models import (
    ClassifyReport,
    LuceFit,
    NestFit,
    NestSpec,
    WeightFamilySpec,
    classify,
    is_luce,
    is_nested_logit,
    is_nested_stochastic,
    luce_choice,
    nested_choice,
    nested_logit_choice,
    weight_family,
    weighted_two_stage,
)
from .population import (
    PopulationDistribution,
    ResolvableChoice,
    base_marginal,
    check_mass_invariance,
    enumerate_resolvable,
    fiber_marginal,
    induce_choice,
    population_from_decomposition,
    resolvable_count,
    solve_population,
)
from .rum import (
    LocalRationalizabilityResult,
    RumRepresentation,
    RumResult,
    block_orders,
    check_local_rationalizability,
    check_rum,
    compose_rum,
    decompose_rum,
    is_block_order,
    signed_superset_sums,
    solve_rum_feasibility,
)

__all__ = [name for name in dir() if not name.startswith("_")]
