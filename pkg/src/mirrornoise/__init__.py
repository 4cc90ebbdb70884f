"""Noise budgets for optical phase readout of a harmonically suspended cavity mirror.

The package evaluates the analytic noise power spectrum of the demodulated
phase signal term by term (detector floor, radiation-pressure back-action,
internal losses, classical laser noise, thermal motion), converts it into
position-measurement error budgets, and cross-validates the analytics
against an exact-discretisation time-domain Langevin simulation.
"""

__version__ = "1.0.0"

from .errors import (
    AmbiguityError,
    ConfigError,
    MirrorNoiseError,
    RuntimeCapError,
    SimulationError,
    ValidationError,
)
from .params import (
    C_LIGHT,
    HBAR,
    K_B,
    DerivedParams,
    PhysicalParams,
    derive,
    load_params,
    omega_from_wavelength,
    validate,
)
from .dynamics import (
    STATE_LABELS,
    TransferMatrix,
    drift_matrix,
    transfer_closed_form,
    transfer_numeric,
)
from .spectrum import (
    Homodyne,
    LorentzianNoise,
    NoiseModel,
    OneOverFNoise,
    PhaseModulation,
    SpectrumBreakdown,
    TabulatedNoise,
    WhiteNoise,
    ZeroNoise,
    diosi_crossover_temperature,
    evaluate,
    load_noise_table,
    raw_scale,
    semiclassical_shot_floor,
    shot_floor,
)
from .measurement import (
    ErrorBudget,
    closed_form_budget,
    error_from_spectrum,
    figure2_sweep,
    normalized_position_factor,
    position_scaling,
    shot_backaction_crossing_power,
    thermal_budget_min_temperature,
    with_power,
)
from .stochastic import (
    DemodConfig,
    DemodFloorResult,
    NoiseSwitches,
    PsdEstimate,
    SimConfig,
    SimTrace,
    StateMoments,
    demodulation_floor_sim,
    integrate,
    output_psd,
    simulate_signal_psd,
    simulate_state_moments,
    stationary_covariance,
    synthesize_noise,
    welch_psd,
)
from .compare import compare_analytic_vs_simulated
