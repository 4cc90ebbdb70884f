"""Position-measurement error budgets from the phase-quadrature spectrum.

The normalized signal spectrum converts to a position-fluctuation spectral
density (m^2 s) through a frequency-dependent factor; dividing the
position spectrum at a chosen frequency by the measurement time gives the
squared error of a measurement of an oscillation amplitude at that
frequency (omega = 0 is a constant displacement).  Impedance-matched
closed forms in terms of laser power, finesse and mechanical quality are
provided alongside the spectrum-scaled route as a consistency pair.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .params import C_LIGHT, HBAR, K_B, DerivedParams
from .spectrum import (
    DetectionScheme,
    NoiseModel,
    PhaseModulation,
    evaluate,
)

__all__ = [
    "ErrorBudget",
    "position_scaling",
    "normalized_position_factor",
    "error_from_spectrum",
    "closed_form_budget",
    "figure2_sweep",
    "with_power",
    "shot_backaction_crossing_power",
    "thermal_budget_min_temperature",
    "budget_csv_rows",
    "BUDGET_CSV_HEADER",
]


def with_power(d: DerivedParams, laser_power: float) -> DerivedParams:
    """Same cavity and mirror, different drive power; recomputes the steady state."""
    if not laser_power > 0:
        raise ValidationError(["laser_power must be positive"])
    drive = math.sqrt(laser_power * d.coupler_decay / (HBAR * d.omega_laser))
    beta = drive / math.sqrt(d.coupler_decay)
    alpha = 2.0 * drive / (d.coupler_decay + d.internal_decay)
    q_ss = HBAR * d.coupling / (d.mirror_mass * d.omega_mirror ** 2) * alpha ** 2
    return replace(
        d,
        laser_power=laser_power,
        drive=drive,
        input_amplitude=beta,
        cavity_amplitude=alpha,
        steady_position=q_ss,
        detuning_shift=d.coupling * q_ss,
    )


def position_scaling(d: DerivedParams, omega) -> np.ndarray:
    """Factor turning the raw signal spectrum into a position spectrum [m^2 s^2].

    Multiplying the raw (unnormalized) signal spectrum by this yields the
    position-fluctuation spectral density in m^2 s.  For the normalized
    spectrum use :func:`normalized_position_factor`, which differs by the
    detection scale (eps*beta)^2.
    """
    transduction = (d.scaled_coupling * d.cavity_amplitude) ** 2
    if transduction == 0.0:
        raise ValidationError(["no optomechanical transduction: coupling*amplitude is zero"])
    eps_beta2 = (d.mod_index * d.input_amplitude) ** 2
    w2 = np.asarray(omega, dtype=float) ** 2
    bracket = d.half_linewidth ** 2 + w2
    return (
        HBAR
        / (2.0 * d.mirror_mass * eps_beta2 * d.coupler_decay * d.omega_mirror * transduction)
        * bracket
    )


def normalized_position_factor(d: DerivedParams, omega) -> np.ndarray:
    """Factor turning the *normalized* signal spectrum into a position spectrum [m^2 s].

    Scheme independent: the detection scale cancels between the normalized
    spectrum and the raw-spectrum factor.
    """
    eps_beta2 = (d.mod_index * d.input_amplitude) ** 2
    return position_scaling(d, omega) * eps_beta2


@dataclass(frozen=True)
class ErrorBudget:
    """Squared position-measurement errors by noise source, all in m^2."""

    shot: float
    back_action: float
    internal_loss: float
    thermal: float
    classical_amplitude: float
    classical_phase: float
    omega: float
    measurement_time: float
    method: str
    laser_power: float

    @property
    def photon_total(self) -> float:
        """Combined random photon-impact error: back-action plus internal loss."""
        return self.back_action + self.internal_loss

    @property
    def total(self) -> float:
        return (
            self.shot + self.back_action + self.internal_loss
            + self.thermal + self.classical_amplitude + self.classical_phase
        )


def error_from_spectrum(
    d: DerivedParams,
    omega: float,
    measurement_time: float | None = None,
    noise: NoiseModel = NoiseModel(),
    scheme: DetectionScheme = PhaseModulation(),
    thermal: str = "cbmme",
) -> ErrorBudget:
    """Error budget by scaling the evaluated spectrum to position units.

    Each component is (normalized spectrum term) x (position factor) / tau_m.
    Warns when the measurement time is not long against the mirror's
    correlation time 1/Gamma.
    """
    tau = d.measurement_time if measurement_time is None else measurement_time
    if not tau > 0:
        raise ValidationError(["measurement_time must be positive"])
    if tau * d.damping < 10.0:
        warnings.warn(
            f"measurement time {tau:.3g} s is not >> the mirror correlation time "
            f"{1.0 / d.damping:.3g} s; the S(omega)/tau error formula degrades",
            stacklevel=2,
        )
    bd = evaluate(d, omega, noise=noise, scheme=scheme, thermal=thermal)
    factor = float(normalized_position_factor(d, omega)) / tau
    return ErrorBudget(
        shot=bd.shot * factor,
        back_action=bd.back_action * factor,
        internal_loss=bd.internal_loss * factor,
        thermal=(bd.thermal_T + bd.thermal_correction) * factor,
        classical_amplitude=bd.amplitude_noise * factor,
        classical_phase=bd.phase_noise * factor,
        omega=float(omega),
        measurement_time=tau,
        method="spectrum_scaled",
        laser_power=d.laser_power,
    )


def _require_dc_or_resonance(d: DerivedParams, omega: float) -> bool:
    """True for resonance, False for dc, error otherwise."""
    if omega == 0.0:
        return False
    if math.isclose(omega, d.omega_mirror, rel_tol=1e-9):
        return True
    raise ValidationError(
        [f"closed forms are available at omega = 0 or {d.omega_mirror} rad/s, got {omega}"]
    )


def closed_form_budget(
    d: DerivedParams,
    omega: float,
    measurement_time: float | None = None,
) -> ErrorBudget:
    """Impedance-matched closed-form budget at dc or at the mechanical resonance.

    Valid when the input coupler and internal losses are matched and the
    cavity linewidth is far above the mechanical band; classical-noise
    components are only available through :func:`error_from_spectrum`.
    """
    at_resonance = _require_dc_or_resonance(d, omega)
    gamma, mu = d.coupler_decay, d.internal_decay
    if not math.isclose(gamma, mu, rel_tol=1e-12):
        raise ValidationError(["closed forms assume impedance matching (internal_decay == coupler_decay)"])
    if gamma / d.omega_mirror < 100.0:
        warnings.warn(
            f"cavity linewidth / mirror frequency = {gamma / d.omega_mirror:.3g} < 100; "
            "the closed-form approximation degrades",
            stacklevel=2,
        )
    tau = d.measurement_time if measurement_time is None else measurement_time
    if not tau > 0:
        raise ValidationError(["measurement_time must be positive"])

    fin = d.finesse
    power = d.laser_power
    mass = d.mirror_mass
    nu = d.omega_mirror
    quality = d.quality
    temp = d.temperature
    omega0 = d.omega_laser

    shot = (3.0 * math.pi ** 2 / 32.0) * (HBAR * C_LIGHT ** 2 / omega0) / (fin ** 2 * power * tau)
    ba_dc = (
        (4.0 / math.pi ** 2)
        * (HBAR * omega0 / C_LIGHT ** 2)
        * fin ** 2 * power
        / (mass ** 2 * nu ** 4 * tau)
    )
    if at_resonance:
        back_action = quality ** 2 * ba_dc
        thermal = (
            2.0 * K_B * quality * temp / (mass * nu ** 3 * tau)
            + HBAR ** 2 * quality / (6.0 * mass * nu * K_B * temp * tau)
        )
    else:
        back_action = ba_dc
        thermal = (
            2.0 * K_B * temp / (mass * nu ** 3 * quality * tau)
            + HBAR ** 2 / (6.0 * mass * nu * K_B * temp * quality ** 3 * tau)
        )
    return ErrorBudget(
        shot=shot,
        back_action=back_action,
        internal_loss=back_action,  # matched: internal losses mirror the back-action
        thermal=thermal,
        classical_amplitude=0.0,
        classical_phase=0.0,
        omega=float(omega),
        measurement_time=tau,
        method="closed_form",
        laser_power=power,
    )


def figure2_sweep(
    d: DerivedParams,
    powers,
    measurement_time: float | None = None,
    method: str = "closed_form",
    noise: NoiseModel = NoiseModel(),
    scheme: DetectionScheme = PhaseModulation(),
    thermal: str = "cbmme",
) -> list[ErrorBudget]:
    """Error budgets over a laser-power grid, at dc and at resonance per power."""
    if method not in ("closed_form", "spectrum_scaled"):
        raise ValidationError([f"method must be 'closed_form' or 'spectrum_scaled', got {method!r}"])
    budgets: list[ErrorBudget] = []
    for power in np.asarray(powers, dtype=float):
        dp = with_power(d, float(power))
        for omega in (0.0, d.omega_mirror):
            if method == "closed_form":
                budgets.append(closed_form_budget(dp, omega, measurement_time))
            else:
                budgets.append(
                    error_from_spectrum(
                        dp, omega, measurement_time,
                        noise=noise, scheme=scheme, thermal=thermal,
                    )
                )
    return budgets


def shot_backaction_crossing_power(
    d: DerivedParams, omega: float, measurement_time: float | None = None
) -> float:
    """Laser power where the shot and back-action errors cross at ``omega``.

    Shot scales as 1/P and back-action as P, so their product is
    power-independent and the crossing is unique.
    """
    ref = closed_form_budget(with_power(d, 1.0), omega, measurement_time)
    return math.sqrt(ref.shot / ref.back_action)


def thermal_budget_min_temperature(d: DerivedParams, omega: float) -> float:
    """Bath temperature minimizing the closed-form thermal budget at dc or resonance.

    The budget is A*T + B/T; the stationary point sits where the two terms
    are equal, at T = sqrt(B/A).
    """
    at_resonance = _require_dc_or_resonance(d, omega)
    t_min = HBAR * d.omega_mirror / (math.sqrt(12.0) * K_B)
    return t_min if at_resonance else t_min / d.quality


BUDGET_CSV_HEADER = (
    "P_W,dx2_shot,dx2_ba,dx2_loss,dx2_pn,dx2_thermal,dx2_amp,dx2_phase,"
    "dx2_total,omega_rad_s,method"
)


def budget_csv_rows(budgets) -> list[str]:
    """CSV rows (without header) in round-trip double precision."""

    def fmt(x: float) -> str:
        return format(x, ".16e")

    rows = []
    for b in budgets:
        rows.append(
            ",".join(
                [
                    fmt(b.laser_power),
                    fmt(b.shot),
                    fmt(b.back_action),
                    fmt(b.internal_loss),
                    fmt(b.photon_total),
                    fmt(b.thermal),
                    fmt(b.classical_amplitude),
                    fmt(b.classical_phase),
                    fmt(b.total),
                    fmt(b.omega),
                    b.method,
                ]
            )
        )
    return rows
