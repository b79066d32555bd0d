"""Quasiparticle-cooling engine for the Floquet transverse-field Ising chain."""

__version__ = "0.1.0"

from .spectrum import (
    ModelParams,
    FloquetSpectrum,
    GapInfo,
    quasienergy,
    gap,
    build_k_matrix,
    diagonalize,
    edge_overlap_profile,
)
from .pulses import (
    Pulse,
    FilterProfile,
    make_scp,
    make_mcp,
    filter_value,
    filter_abs2,
    scp_filter_closed_form,
    mcp_filter_asymptotic,
    suppression_ratio,
    ringing_bound,
    filter_profile,
)
from .wick import (
    ElementTable,
    element_table,
    wick_modulus_squared,
    z_elements,
    sigma_single,
    sigma_pair,
    sigma_scatter,
)
from .kinetics import (
    OccupationState,
    RateTable,
    NoiseParams,
    ScalingModel,
    edge_rates,
    edge_steady_state,
    edge_evolve,
    bulk_rates,
    bulk_step,
    noisy_rates,
    steady_state,
    hermitian_z_rates,
    fidelity,
    density,
    gibbs_target,
    scaling_prediction,
    fit_scaling_model,
    evolve,
)

__all__ = [
    "ModelParams",
    "FloquetSpectrum",
    "GapInfo",
    "quasienergy",
    "gap",
    "build_k_matrix",
    "diagonalize",
    "edge_overlap_profile",
    "Pulse",
    "FilterProfile",
    "make_scp",
    "make_mcp",
    "filter_value",
    "filter_abs2",
    "scp_filter_closed_form",
    "mcp_filter_asymptotic",
    "suppression_ratio",
    "ringing_bound",
    "filter_profile",
    "ElementTable",
    "element_table",
    "wick_modulus_squared",
    "z_elements",
    "sigma_single",
    "sigma_pair",
    "sigma_scatter",
    "OccupationState",
    "RateTable",
    "NoiseParams",
    "ScalingModel",
    "edge_rates",
    "edge_steady_state",
    "edge_evolve",
    "bulk_rates",
    "bulk_step",
    "noisy_rates",
    "steady_state",
    "hermitian_z_rates",
    "fidelity",
    "density",
    "gibbs_target",
    "scaling_prediction",
    "fit_scaling_model",
    "evolve",
]
