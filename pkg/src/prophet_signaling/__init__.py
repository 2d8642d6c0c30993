"""Threshold stopping policies under strategic reward signaling."""

from .dist import Dist, discrete, linear, mixture, point_mass, two_point, uniform
from .prophet import (
    Instance,
    ThresholdSpectrum,
    dp_values,
    expected_max,
    median_of_max,
    nonstrategic_dp_payoff,
    nonstrategic_payoff,
    spectrum,
)
from .signaling import (
    PoolingStrategy,
    best_response,
    binary_reduction,
    induce_threshold_by_product,
    is_mpc,
)
from .strategic import (
    RobustnessReport,
    TabulatedDensity,
    check_iid_deviation_guarantee,
    check_iid_robustness,
    check_kw_robustness,
    logconcave_robustness_check,
    make_general_tightness_instance,
    make_iid_tightness_instance,
    make_percentage_instance,
    opt_upper_bound_cutoffs,
    robustness_report,
    strategic_payoff,
)
from .stackelberg import (
    EquilibriumOutcome,
    Policy,
    Profile,
    b_m,
    best_response_to_fixed,
    binary_pooling,
    eval_profile,
    hem_threshold,
    reproduce_counterexample,
    solve_dp_two_box,
    solve_hem_two_box,
    solve_median_two_box,
    v1,
)
from .mc import SimConfig, sample, simulate

__version__ = "0.1.0"
