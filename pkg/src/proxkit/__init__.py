"""Numerical tools for prox-regular and para-prox-regular functions."""
from .calculus import (
    AmenableConstants,
    PRParams,
    amenable_params,
    estimate_amenable_constants,
    para_max_params,
    para_sum_params,
    scalar_mult_para_params,
    scalar_mult_params,
    sum_params,
    weighted_sum_params,
)
from .certify import (
    CheckReport,
    NotFound,
    ParaProxCertificate,
    ProxCertificate,
    SampleTuple,
    SamplerConfig,
    ViolationWitness,
    check_monotone_localization,
    check_para_prox_regular,
    check_prox_regular,
    check_proximal_subgradient,
    collect_localization,
    cross_validate_equivalence,
    replay_witness,
    search_certificate,
)
from .envelopes import (
    EnvelopeResult,
    Grid,
    NCProximalAverage,
    NotProxBoundedBelow,
    fenchel_conjugate,
    lipschitz_mix_prox,
    moreau_envelope,
    nc_pa,
    pa_convex,
    pa_convex_env,
    prox_bound_threshold,
    prox_map,
)
from .model import (
    Box,
    FunctionOracle,
    ParametrizedOracle,
    Subdifferential,
    build_arg_scale,
    build_arg_shift,
    build_tilt_shift,
    build_weighted_max,
    build_weighted_sum,
    eval_subdifferential,
    eval_subdifferential_x,
    recenter,
)
from .piecewise import load_function_spec, parse_function_spec

__version__ = "0.1.0"
