"""Capacity and LMMSE-SIC rate analysis for uniform linear arrays with
densely spaced antennas: deterministic physical channel construction,
Gaussian constrained capacity, the QPSK achievable-rate lower bound, and
diagnostics that check the finite-size behavior of the supporting bounds.
"""

__version__ = "0.1.0"

from .arraykit import (
    ArrayGeometry,
    array_kernel,
    basis_expand,
    beam_pattern,
    dft_basis,
    main_lobe_indices,
    periodic_sinc,
    signature,
)
from .capacity import (
    CapacityResult,
    CovarianceKind,
    CovarianceSpec,
    SpacingGapResult,
    constrained_capacity,
    preset_covariance,
    spacing_gap,
    truncation_gap,
    water_filling,
)
from .channel import (
    AngularChannel,
    DomainRestriction,
    PathSet,
    angular_gains,
    extend_matrix,
    normalized_snr,
    rayleigh_instance,
    shrink,
    spatial_channel,
    spatial_from_paths,
    truncate,
)
from .sic import (
    EffectiveChannel,
    MonteCarloEstimate,
    SicTrace,
    SinrDiagnostics,
    bpsk_awgn_mi,
    brute_force_qpsk_mi,
    effective_matrix,
    gaussian_sic_rate,
    qpsk_awgn_mi,
    qpsk_sic_lower_bound,
    run_sic,
    sic_sinrs,
    sic_sinrs_direct,
    sinr_diagnostics,
)

__all__ = [name for name in dir() if not name.startswith("_")]
