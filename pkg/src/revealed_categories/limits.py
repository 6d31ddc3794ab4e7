"""Practical size bounds for the exponential-cost operations.

Subset enumeration is exponential and linear-order enumeration is
factorial, so each entry point guards its input size.  The defaults are
desk scale; an explicit ``limit`` argument or the environment variable
``REVEALED_CATEGORIES_MAX_N`` raises them.
"""

from __future__ import annotations

import os

ENV_MAX_N = "REVEALED_CATEGORIES_MAX_N"

MAX_UNIVERSE = 10          # subset-enumeration operations
MAX_RUM_UNIVERSE = 7       # linear-order operations (7! = 5040 variables)
MAX_PARTITION_SEARCH = 8   # whole-partition-space searches
MAX_POPULATION = 1_000_000  # enumerated resolvable choices
MAX_SOLVE_VARIABLES = 5_000  # dense exact linear solves


def effective_bound(default: int, override: int | None = None) -> int:
    """Resolve a bound: explicit override, then environment, then default."""
    if override is not None:
        return override
    env = os.environ.get(ENV_MAX_N)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            return default
    return default
