"""Symplectic normal forms and invariants of A_{k-1} singularities.

Exact truncated-series machinery for the pair (H = xi^2 +/- x^k, omega):
the cohomological equation {H, u} = g - c(x) and its unique reduced
residual, the three normal-form presentations with their certificates,
Moser-type flow round trips, and numerical cross checks through action
integrals and Abel-type inversion.
"""

from .analysis import (
    NonConvergentError,
    QuadratureConfig,
    SampledFunction,
    abel_forward,
    abel_invert,
    action_compact,
    action_noncompact,
    channel_action,
    cross_check_invariants,
    generalized_actions,
    growth_bound_check,
)
from .cohomology import (
    CohomologySolution,
    ElimTable,
    eliminate_odd,
    eliminate_xi,
    elim_coefficient,
    ham_bracket,
    reduce_residual,
    solve_cohomological,
)
from .moser import (
    LinearPart,
    NotAkShapeError,
    NotHPreservingError,
    ValuationTooLowError,
    canonical_vf,
    compose_maps,
    flow_map,
    inv_map,
    invariants_of,
    linear_part,
    preserves_h,
    pullback_form,
    roundtrip_invariants,
    two_form_of_f_dxi,
)
from .normalform import (
    CH_FORM,
    F_FORM,
    FIBRATION_FORM,
    ConversionTable,
    DegenerateError,
    FibrationChange,
    FormMismatchError,
    NormalForm,
    b_constant,
    canonicalize_sign,
    ch_expand,
    ch_form,
    f_form,
    f_recompose,
    fibration_form,
    fibration_transport,
    invariants_equal,
    potential_form,
)
from .series import (
    AkHamiltonian,
    CompositionError,
    NotInvertibleError,
    NotReducedError,
    OrderUnderflowError,
    Ring,
    RingMismatchError,
    SeriesMap,
    TruncatedSeries1,
    TruncatedSeries2,
    c_decompose,
    c_recompose,
    compose,
    invert_series,
    poisson_bracket,
    unit_series_power,
    xi_parity_recombine,
    xi_parity_split,
)

__version__ = "0.1.0"
