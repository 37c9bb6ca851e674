"""Executable laboratory for the Vinogradov mean value theorem and its consequences."""

__version__ = "0.1.0"

from .counting import (
    GrowthSeries,
    PowerSumKey,
    VinogradovInstance,
    asymptotic_threshold,
    classical_exponent_bound,
    conjectured_exponent,
    count_hua_moment,
    count_near_solutions,
    count_vinogradov,
    count_vinogradov_bruteforce,
    count_waring_representations,
    fit_growth_exponent,
)
from .exceptions import (
    InstanceTooLarge,
    InsufficientPoints,
    PreconditionError,
    ResolutionError,
    VinolabError,
)
from .expsum import (
    FrequencyPoint,
    classify_arc,
    eval_power_sum,
    eval_weyl_sum,
    kernel_coeff,
    kernel_l1_norm,
    minor_arc_moment,
    rational_approx,
    vinogradov_envelope,
    weyl_envelope,
)
from .waring import (
    complete_exp_sum,
    eta_interpolation,
    gtilde_classical,
    gtilde_improved,
    gtilde_log,
    min_admissible_s0,
    singular_series,
    waring_main_term,
    wooley_reference_bound,
)
