"""Measured-signal noise power spectral density, term by term.

The demodulated phase signal of the driven cavity/mirror system has a
stationary two-sided spectrum built from:

* a frequency-independent detector floor (shot noise, scheme dependent),
* three terms sharing one mechanical response kernel: radiation-pressure
  back-action, internal-loss noise, and classical laser amplitude noise,
* a classical laser phase-noise term with its own cavity filter,
* two thermal terms: one proportional to the scaled temperature and a
  small correction from the position-noise channel of the Lindblad-form
  Brownian damping model ("cbmme").  Selecting the non-Lindblad model
  ("sbmme") replaces that correction with a term odd in omega, kept only
  for spectral comparison.

Spectra are reported in normalized units: the raw signal spectrum divided
by the detection scale returned by :func:`raw_scale` ((eps*beta)^2 for
phase modulation, (kappa*beta_lo)^2 for homodyne).  Classical laser noise
densities G_x, G_y are dimensionless two-sided spectra, even in omega.

Model assumption (documented, not a runtime parameter): the modulation
carrier is far enough above the band of interest that classical laser
noise at the carrier and its second harmonic is negligible.  The CLI warns
when a requested grid approaches a user-supplied carrier.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .dynamics import abs2_denominator
from .errors import ValidationError
from .params import HBAR, K_B, DerivedParams

__all__ = [
    "ZeroNoise",
    "WhiteNoise",
    "LorentzianNoise",
    "OneOverFNoise",
    "TabulatedNoise",
    "NoiseModel",
    "PhaseModulation",
    "Homodyne",
    "SpectrumBreakdown",
    "shot_floor",
    "semiclassical_shot_floor",
    "raw_scale",
    "evaluate",
    "diosi_crossover_temperature",
    "load_noise_table",
]


# ---------------------------------------------------------------------------
# classical laser noise shapes (two-sided symmetric spectral densities)

@dataclass(frozen=True)
class ZeroNoise:
    def density(self, omega):
        return np.zeros_like(np.asarray(omega, dtype=float))


@dataclass(frozen=True)
class WhiteNoise:
    level: float

    def __post_init__(self):
        if self.level < 0:
            raise ValidationError(["noise level must be nonnegative"])

    def density(self, omega):
        return np.full_like(np.asarray(omega, dtype=float), self.level)


@dataclass(frozen=True)
class LorentzianNoise:
    """Flat at ``level`` below the corner, rolling off as 1/omega^2 above it."""

    level: float
    corner: float

    def __post_init__(self):
        if self.level < 0 or self.corner <= 0:
            raise ValidationError(["lorentzian noise needs level >= 0 and corner > 0"])

    def density(self, omega):
        w = np.asarray(omega, dtype=float)
        return self.level / (1.0 + (w / self.corner) ** 2)


@dataclass(frozen=True)
class OneOverFNoise:
    """floor + level*corner/(|omega| + corner): ~1/|omega| falloff onto a floor."""

    level: float
    corner: float
    floor: float

    def __post_init__(self):
        if self.level < 0 or self.corner <= 0 or self.floor < 0:
            raise ValidationError(["one_over_f noise needs level, floor >= 0 and corner > 0"])

    def density(self, omega):
        w = np.abs(np.asarray(omega, dtype=float))
        return self.floor + self.level * self.corner / (w + self.corner)


@dataclass(frozen=True)
class TabulatedNoise:
    """Tabulated density, interpolated linearly in log-omega, clamped at the ends."""

    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or values.shape != grid.shape:
            raise ValidationError(["tabulated noise needs matching 1-d grids, >= 2 points"])
        if not np.all(np.diff(grid) > 0) or grid[0] <= 0:
            raise ValidationError(["tabulated noise grid must be positive ascending"])
        if np.any(values < 0):
            raise ValidationError(["tabulated noise values must be nonnegative"])
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def density(self, omega):
        w = np.abs(np.asarray(omega, dtype=float))
        logw = np.log(np.clip(w, self.grid[0], self.grid[-1]))
        return np.interp(logw, np.log(self.grid), self.values)


NoiseShape = Union[ZeroNoise, WhiteNoise, LorentzianNoise, OneOverFNoise, TabulatedNoise]


@dataclass(frozen=True)
class NoiseModel:
    """Classical laser amplitude and phase noise spectra."""

    amplitude: NoiseShape = ZeroNoise()
    phase: NoiseShape = ZeroNoise()

    @staticmethod
    def quiet() -> "NoiseModel":
        return NoiseModel()


def load_noise_table(path) -> NoiseModel:
    """Read a whitespace-separated table: omega [rad/s, ascending], G_x, optionally G_y."""
    data = np.loadtxt(path, ndmin=2)
    if data.shape[1] not in (2, 3):
        raise ValidationError([f"{path}: expected 2 or 3 columns, got {data.shape[1]}"])
    amp = TabulatedNoise(data[:, 0], data[:, 1])
    phase = TabulatedNoise(data[:, 0], data[:, 2]) if data.shape[1] == 3 else ZeroNoise()
    return NoiseModel(amplitude=amp, phase=phase)


# ---------------------------------------------------------------------------
# detection schemes

@dataclass(frozen=True)
class PhaseModulation:
    """Sideband demodulation readout; mod_index None means use the parameter set's."""

    mod_index: float | None = None

    def resolve_index(self, d: DerivedParams) -> float:
        eps = self.mod_index if self.mod_index is not None else d.mod_index
        if not (0.0 < eps <= 0.5):
            raise ValidationError([f"mod_index outside small-signal regime (0, 0.5], got {eps}"])
        return eps


@dataclass(frozen=True)
class Homodyne:
    """Local-oscillator readout through a beamsplitter."""

    lo_amplitude: float = 1.0
    reflectivity: float = 0.5

    def __post_init__(self):
        if not self.lo_amplitude > 0:
            raise ValidationError(["homodyne lo_amplitude must be positive"])
        if not (0.0 < self.reflectivity < 1.0):
            raise ValidationError(["homodyne reflectivity must lie in (0, 1)"])


DetectionScheme = Union[PhaseModulation, Homodyne]


def raw_scale(d: DerivedParams, scheme: DetectionScheme) -> float:
    """Factor converting the normalized spectrum back to raw signal units [1/s]."""
    if isinstance(scheme, PhaseModulation):
        eps = scheme.resolve_index(d)
        return (eps * d.input_amplitude) ** 2
    return (scheme.reflectivity * scheme.lo_amplitude) ** 2


def shot_floor(d: DerivedParams, scheme: DetectionScheme) -> float:
    """Frequency-independent detector noise floor in normalized units.

    Phase modulation pays for demodulating against a carrier: the broadband
    vacuum at the carrier and at twice the carrier leaks into the signal,
    raising the floor above the homodyne value of 1.
    """
    if isinstance(scheme, Homodyne):
        return 1.0
    eps = scheme.resolve_index(d)
    gamma, mu = d.coupler_decay, d.internal_decay
    return 0.5 * (3.0 + ((gamma - mu) / (eps * (gamma + mu))) ** 2)


def semiclassical_shot_floor(d: DerivedParams) -> float:
    """Phase-modulation floor with the second-harmonic vacuum pickup neglected.

    This is the floor a semiclassical treatment of the demodulation predicts;
    it sits exactly 1/2 below :func:`shot_floor` in normalized units.
    """
    eps = PhaseModulation().resolve_index(d)
    gamma, mu = d.coupler_decay, d.internal_decay
    return 0.5 * (2.0 + ((gamma - mu) / (eps * (gamma + mu))) ** 2)


# ---------------------------------------------------------------------------
# the spectrum itself

@dataclass(frozen=True)
class SpectrumBreakdown:
    """Per-term values of the normalized signal spectrum on a frequency grid.

    ``total`` is the sum of the seven parts.  Every part except the sbmme
    thermal correction is nonnegative.
    """

    omega: np.ndarray
    shot: np.ndarray
    back_action: np.ndarray
    internal_loss: np.ndarray
    amplitude_noise: np.ndarray
    phase_noise: np.ndarray
    thermal_T: np.ndarray
    thermal_correction: np.ndarray
    total: np.ndarray
    thermal_model: str = "cbmme"

    PART_NAMES = (
        "shot",
        "back_action",
        "internal_loss",
        "amplitude_noise",
        "phase_noise",
        "thermal_T",
        "thermal_correction",
    )

    def part(self, name: str) -> np.ndarray:
        if name == "total":
            return self.total
        if name not in self.PART_NAMES:
            raise KeyError(name)
        return getattr(self, name)


def evaluate(
    d: DerivedParams,
    omega,
    noise: NoiseModel = NoiseModel(),
    scheme: DetectionScheme = PhaseModulation(),
    thermal: str = "cbmme",
) -> SpectrumBreakdown:
    """Evaluate the normalized signal spectrum term by term at omega [rad/s].

    ``omega`` may be a scalar or an array; fields of the result broadcast
    accordingly.  ``thermal`` selects the Brownian damping model used for
    the thermal correction term: "cbmme" (Lindblad-form, even 1/T_s term)
    or "sbmme" (odd-in-omega replacement term, spectral evaluation only).
    """
    if thermal not in ("cbmme", "sbmme"):
        raise ValidationError([f"thermal model must be 'cbmme' or 'sbmme', got {thermal!r}"])
    scalar = np.isscalar(omega)
    w = np.atleast_1d(np.asarray(omega, dtype=float))

    gamma, mu = d.coupler_decay, d.internal_decay
    nu = d.omega_mirror
    gamma_m = d.damping
    kappa2 = d.half_linewidth ** 2
    ca2 = (d.scaled_coupling * d.cavity_amplitude) ** 2
    t_s = d.scaled_temperature
    if t_s < 10.0:
        warnings.warn(
            "thermal terms assume k_B T >> hbar nu; scaled temperature is "
            f"{t_s:.3g} < 10, evaluation proceeds anyway",
            stacklevel=2,
        )

    w2 = w * w
    abs_d2 = abs2_denominator(d, w)
    response = (ca2 * nu) ** 2 / abs_d2          # shared mechanical response kernel
    thermal_kernel = (kappa2 + w2) / abs_d2

    shot = np.full_like(w, shot_floor(d, scheme))
    back_action = gamma * gamma * response
    internal_loss = gamma * mu * response
    amplitude_noise = 4.0 * gamma * gamma * noise.amplitude.density(w) * response

    g_y = noise.phase.density(w)
    if isinstance(scheme, PhaseModulation):
        phase_noise = 4.0 * g_y * (4.0 * gamma * gamma / (gamma + mu) ** 2) * w2 / (kappa2 + w2)
    else:
        phase_noise = 4.0 * g_y * ((0.5 * (gamma - mu)) ** 2 + w2) / (kappa2 + w2)

    thermal_t = gamma * ca2 * gamma_m * 4.0 * nu * nu * t_s * thermal_kernel
    if thermal == "cbmme":
        thermal_corr = gamma * ca2 * gamma_m * (gamma_m ** 2 + w2) / (3.0 * t_s) * thermal_kernel
    else:
        thermal_corr = 2.0 * w * gamma * gamma_m * ca2 * nu * thermal_kernel

    total = (
        shot + back_action + internal_loss + amplitude_noise
        + phase_noise + thermal_t + thermal_corr
    )

    def out(a):
        return float(a[0]) if scalar else a

    return SpectrumBreakdown(
        omega=out(w),
        shot=out(shot),
        back_action=out(back_action),
        internal_loss=out(internal_loss),
        amplitude_noise=out(amplitude_noise),
        phase_noise=out(phase_noise),
        thermal_T=out(thermal_t),
        thermal_correction=out(thermal_corr),
        total=out(total),
        thermal_model=thermal,
    )


def diosi_crossover_temperature(damping: float, omega: float) -> float:
    """Temperature below which the 1/T_s thermal correction exceeds the T_s term.

    Equating the two thermal terms gives T* = (hbar/k_B) sqrt((Gamma^2 +
    omega^2)/12); below T* the position-noise correction dominates at that
    frequency.  Degenerate input Gamma = omega = 0 returns 0.
    """
    if damping < 0:
        raise ValidationError(["damping must be nonnegative"])
    return HBAR * math.sqrt((damping * damping + omega * omega) / 12.0) / K_B
