"""Exact computations with Burnside rings, Dress idempotents and their norms."""

__version__ = "0.1.0"

from .groups import (  # noqa: E402
    FiniteGroup,
    GroupOrderError,
    GroupSpecError,
    PrimeSet,
    Subgroup,
    build_group,
    double_cosets,
    enumerate_subgroups,
    p_residual,
    subgroup_classes,
)
from .burnside import (  # noqa: E402
    BurnsideElement,
    BurnsideRing,
    GSet,
    coinduce,
    dress_idempotent,
    norm,
    restrict,
    table_of_marks,
    transfer,
)
from .tambara import (  # noqa: E402
    IndexingSystem,
    NormPair,
    indexing_system,
    localized_green_ring,
    shared_indexing_system,
    splitting_report,
    verify_theorem_a,
)

__all__ = [
    "BurnsideElement", "BurnsideRing", "FiniteGroup", "GSet", "GroupOrderError", "GroupSpecError",
    "IndexingSystem", "NormPair", "PrimeSet", "Subgroup", "build_group", "coinduce", "double_cosets",
    "dress_idempotent", "enumerate_subgroups", "indexing_system", "localized_green_ring", "norm",
    "p_residual", "restrict", "shared_indexing_system", "splitting_report", "subgroup_classes",
    "table_of_marks", "transfer", "verify_theorem_a",
]
