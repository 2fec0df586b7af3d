"""Exact computational engine for graded modules over GF(p) polynomial rings,
sheaf cohomology on projective space, and the Buchsbaum-type classification
of bundles with one-dimensional intermediate cohomology."""

from .algebra import HomogPoly, PolyRing, parse_poly, poly_str
from .bundles import (
    example_f1,
    example_f2,
    example_rank5,
    line_sum_module,
    monomial_curve_modules,
    null_correlation_module,
    obfuscated_line_sum,
    omega_module,
)
from .classify import (
    BuchsbaumVerdict,
    ClassificationResult,
    classify,
    is_acm,
    is_buchsbaum,
    is_quasi_buchsbaum,
    is_standard_sop,
    pfaffian4,
    rank2_witnesses,
    skew_form,
    snake_pairing,
    snake_pairing_is_zero,
)
from .cohomology import (
    a_invariant,
    bott_oracle,
    ext_modules,
    local_cohomology_dims,
    regularity,
    serre_duality_check,
    sheaf_cohomology_table,
)
from .modules import (
    FreeResolution,
    GradedFreeModule,
    GradedMap,
    PresentedModule,
    betti_table,
    direct_sum,
    hilbert_polynomial,
    hom_dual_module,
    koszul_complex,
    koszul_syzygy_module,
    lift_chain_map,
    mapping_cone,
    minimal_free_resolution,
    module_dumps,
    module_loads,
    quotient_by_linear,
    sheaf_rank,
    syzygy,
    twist_module,
)
from .multiproj import (
    check_splitting_conditions,
    is_zero_regular_linesum,
    kunneth_line_cohomology,
)

__version__ = "0.1.0"
