"""Exact quantum simulation of a three-mode nonlinear interferometer.

Two cascaded parametric amplifiers with a fully quantum pump: sector-wise
tridiagonal diagonalization, interference patterns, dark-fringe phase
uncertainty, classical Fisher information, and Heisenberg-scaling fits.
"""

from .fock import (
    FockSector,
    StateVector,
    CouplingSpec,
    SpectralDecomposition,
    SpectralStore,
    basis_state,
    build_coupling,
    coupling_matrix,
    diagonalize,
    ode_oracle,
    propagate,
    spectral,
)
from .pumps import PumpSpec, SectorEnsemble, SectorEntry, expand, fock_pump, coherent_pump
from .engine import (
    InternalState,
    NLIResult,
    interference_pattern,
    run_amplifier_a,
    run_amplifier_b,
    run_nli,
)
from .metrology import (
    MinimaReport,
    ScalingFit,
    UncertaintyPoint,
    DEFAULT_DELTA,
    default_tau_range,
    fisher_information,
    fisher_uncertainty,
    fit_heisenberg,
    fit_power_law,
    pa_internal_photons,
    pa_uncertainty,
    phase_uncertainty_ep,
    scan_minima,
    shot_noise,
    uncertainty_sweep,
)

__version__ = "0.1.0"
