"""Friedman-Ramanujan functions and the geometry of filling geodesics on pairs of pants."""
from __future__ import annotations

from .densities import (
    DensityCurve,
    FillingType,
    Realisation,
    enumerate_realisations,
    fig8_density_order1,
    leading_density_pants,
    levelset_integral,
    levelset_tor_integral,
    phi_simple,
    rank,
)
from .fr_core import (
    FRFunction,
    FRReport,
    Polynomial,
    certify,
    combine,
    convolve,
    evaluate,
    fr_fit,
    seminorm,
)
from .kernels import (
    apply_D_power,
    cancellation_integral,
    eval_hL_derivative,
    fourier,
    growth_bound_check,
    make_kernel,
)
from .pants_geom import (
    BoundaryLengths,
    ConvCoords,
    boundary_to_coords,
    coords_to_boundary,
    domain_params,
    fig8_length,
    in_domain_E,
    iterated_length,
    jacobian,
)
from .sl2_words import (
    build_eight_rep,
    build_pants_rep,
    enumerate_geodesics,
    filling_count_decay,
    local_type,
)
from .wp_volumes import (
    VolumePolynomial,
    VolumeTable,
    bound_checks,
    load_table,
    second_order_expansion,
    table_values_schedule,
    volume,
)

__version__ = "0.1.0"
