"""Exact computation with countable distance monoids and their completions.

Carriers are finite operation tables or rational interval unions; the
completion machinery, generalized metric spaces, amalgamation, generic
space growth, extension-axiom model checking, and the quantifier
elimination criterion are all computed symbolically over the rationals.
"""

from .carrier import IntervalUnionCarrier, as_fraction, from_points
from .cuts import (
    ExtendedValue,
    compare_cuts,
    embed,
    find_qe_witness,
    format_value,
    is_triangle,
    normalize_cut,
    parse_value,
    star_add,
    star_diff,
    triangle_interval,
)
from .errors import (
    AmalgamationFailure,
    CarrierViolation,
    FormulaSyntaxError,
    PreconditionError,
    UnsupportedOperation,
)
from .monoid import (
    DistanceMonoidSpec,
    builtin,
    builtin_names,
    check_associativity,
    check_magma_axioms,
    check_sum_complete,
    classify_monoid,
    finite_rational_spec,
    op_add,
)
from .spaces import (
    Approximation,
    FiniteMetricSpace,
    KatetovMap,
    approximately_metric_check,
    canonical_approximation,
    check_katetov,
    disjoint_amalgam,
    four_values_check,
    four_values_search,
    free_amalgam,
    interval,
    katetov_map,
    make_space,
    metric_refinement,
    one_point_amalgam,
    validate_metric,
)
from .urysohn import (
    ExtensionScheme,
    canonical_scheme,
    check_extension_axiom,
    enumerate_katetov,
    generate_axioms,
    grow_generic,
    qe_decision,
    realize_witness,
)
from .formulas import (
    eval_formula,
    format_formula,
    instantiate_ms_axioms,
    parse_formula,
    type_formulas,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
