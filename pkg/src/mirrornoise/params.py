"""Physical parameter model, unit conventions and derived steady-state quantities.

Unit conventions are strict SI with every frequency and rate in angular
units (rad/s or 1/s).  A laser wavelength is converted on input via
omega = 2*pi*c/lambda and never stored.

Physical constants are pinned so regression tests are bit-stable:

* ``HBAR``  1.054571817e-34 J s   (CODATA 2018)
* ``K_B``   1.380649e-23 J/K     (exact, SI definition)
* ``C_LIGHT`` 299792458.0 m/s    (exact, SI definition)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import AmbiguityError, ValidationError

HBAR = 1.054571817e-34
K_B = 1.380649e-23
C_LIGHT = 299792458.0


def omega_from_wavelength(wavelength: float) -> float:
    """Angular laser frequency in rad/s from a vacuum wavelength in meters."""
    return 2.0 * math.pi * C_LIGHT / wavelength


@dataclass(frozen=True)
class PhysicalParams:
    """Lab-facing inputs, SI units throughout.

    Attributes:
        laser_power: drive power hitting the input coupler [W]; must be > 0
            (zero drive makes the linearisation degenerate).
        omega_laser: laser angular frequency [rad/s].
        cavity_length: cavity length [m].
        mirror_mass: suspended mirror mass [kg].
        omega_mirror: mechanical resonance angular frequency [rad/s].
        quality / damping: mechanical quality factor [-] or energy damping
            rate [1/s]; exactly one must be supplied, the other is derived.
        temperature: bath temperature [K], strictly positive (the low
            temperature thermal correction diverges as T -> 0).
        coupler_decay / finesse: input-coupler field decay rate [1/s] or the
            cavity finesse [-]; exactly one must be supplied.
        internal_decay: decay rate from all internal losses [1/s].
        mod_index: phase-modulation depth, in (0, 0.5] so the single-sideband
            expansion of the modulator holds.
        measurement_time: integration time for error budgets [s].
    """

    laser_power: Optional[float] = None
    omega_laser: Optional[float] = None
    cavity_length: Optional[float] = None
    mirror_mass: Optional[float] = None
    omega_mirror: Optional[float] = None
    quality: Optional[float] = None
    damping: Optional[float] = None
    temperature: Optional[float] = None
    coupler_decay: Optional[float] = None
    finesse: Optional[float] = None
    internal_decay: Optional[float] = None
    mod_index: Optional[float] = None
    measurement_time: Optional[float] = None


@dataclass(frozen=True)
class DerivedParams:
    """Derived quantities for one resolved parameter set.

    All the alternative inputs are resolved (both quality and damping, both
    coupler_decay and finesse are populated) and the steady state of the
    driven cavity/mirror system is solved.  Angular frequencies in rad/s.
    """

    # resolved inputs
    laser_power: float
    omega_laser: float
    cavity_length: float
    mirror_mass: float
    omega_mirror: float
    quality: float
    damping: float
    temperature: float
    coupler_decay: float
    finesse: float
    internal_decay: float
    mod_index: float
    measurement_time: float
    # derived
    coupling: float = field(default=0.0)            # g = omega_laser / L [rad/(s m)]
    scaled_coupling: float = field(default=0.0)     # g * sqrt(2 hbar / (m nu)) [1/s]
    drive: float = field(default=0.0)               # sqrt(P gamma / (hbar omega0)) [1/s]
    input_amplitude: float = field(default=0.0)     # drive / sqrt(gamma) [(1/s)^(1/2)]
    cavity_amplitude: float = field(default=0.0)    # 2 drive / (gamma + mu) [-]
    steady_position: float = field(default=0.0)     # radiation-pressure offset [m]
    detuning_shift: float = field(default=0.0)      # g * steady_position, compensated [rad/s]
    scaled_temperature: float = field(default=0.0)  # k_B T / (hbar nu) [-]
    half_linewidth: float = field(default=0.0)      # (gamma + mu) / 2 [1/s]


_POSITIVE_FIELDS = (
    "laser_power",
    "omega_laser",
    "cavity_length",
    "mirror_mass",
    "omega_mirror",
    "internal_decay",
    "measurement_time",
)


def validate(p: PhysicalParams) -> list[str]:
    """Return the list of rule violations; empty iff :func:`derive` would succeed.

    Total function: never raises, each entry names the offending field.
    """
    violations: list[str] = []
    for name in _POSITIVE_FIELDS:
        value = getattr(p, name)
        if value is None:
            violations.append(f"{name} is missing")
        elif not (value > 0.0) or not math.isfinite(value):
            violations.append(f"{name} must be positive and finite, got {value}")

    if p.temperature is None:
        violations.append("temperature is missing")
    elif not (p.temperature > 0.0) or not math.isfinite(p.temperature):
        violations.append("temperature must be positive")

    if (p.quality is None) == (p.damping is None):
        violations.append(
            "exactly one of (quality, damping) must be supplied"
        )
    else:
        name = "quality" if p.quality is not None else "damping"
        value = p.quality if p.quality is not None else p.damping
        if not (value > 0.0) or not math.isfinite(value):
            violations.append(f"{name} must be positive and finite, got {value}")

    if (p.coupler_decay is None) == (p.finesse is None):
        violations.append(
            "exactly one of (coupler_decay, finesse) must be supplied"
        )
    else:
        name = "coupler_decay" if p.coupler_decay is not None else "finesse"
        value = p.coupler_decay if p.coupler_decay is not None else p.finesse
        if not (value > 0.0) or not math.isfinite(value):
            violations.append(f"{name} must be positive and finite, got {value}")

    if p.mod_index is None:
        violations.append("mod_index is missing")
    elif not (0.0 < p.mod_index <= 0.5):
        violations.append(
            f"mod_index outside small-signal regime (0, 0.5], got {p.mod_index}"
        )
    return violations


def derive(p: PhysicalParams) -> DerivedParams:
    """Resolve alternatives and compute all derived quantities.

    Deterministic and pure: identical inputs give bit-identical outputs.

    Raises:
        AmbiguityError: both or neither of an alternative pair supplied.
        ValidationError: any other invariant violated.
    """
    violations = validate(p)
    if violations:
        if any("exactly one of" in v for v in violations):
            raise AmbiguityError(violations)
        raise ValidationError(violations)

    omega0 = p.omega_laser
    length = p.cavity_length
    mass = p.mirror_mass
    nu = p.omega_mirror

    if p.quality is not None:
        quality = p.quality
        damping = nu / quality
    else:
        damping = p.damping
        quality = nu / damping

    if p.coupler_decay is not None:
        gamma = p.coupler_decay
        finesse = math.pi * C_LIGHT / (2.0 * length * gamma)
    else:
        finesse = p.finesse
        gamma = math.pi * C_LIGHT / (2.0 * length * finesse)

    mu = p.internal_decay
    g = omega0 / length
    chi = g * math.sqrt(2.0 * HBAR / (mass * nu))
    drive = math.sqrt(p.laser_power * gamma / (HBAR * omega0))
    beta = drive / math.sqrt(gamma)
    alpha = 2.0 * drive / (gamma + mu)
    q_ss = HBAR * g / (mass * nu * nu) * alpha * alpha

    return DerivedParams(
        laser_power=p.laser_power,
        omega_laser=omega0,
        cavity_length=length,
        mirror_mass=mass,
        omega_mirror=nu,
        quality=quality,
        damping=damping,
        temperature=p.temperature,
        coupler_decay=gamma,
        finesse=finesse,
        internal_decay=mu,
        mod_index=p.mod_index,
        measurement_time=p.measurement_time,
        coupling=g,
        scaled_coupling=chi,
        drive=drive,
        input_amplitude=beta,
        cavity_amplitude=alpha,
        steady_position=q_ss,
        detuning_shift=g * q_ss,
        scaled_temperature=K_B * p.temperature / (HBAR * nu),
        half_linewidth=0.5 * (gamma + mu),
    )


# Parameter file: flat "key = value" text, UTF-8, '#' comments, SI units.
_FILE_KEYS = {
    "laser_power_W": "laser_power",
    "omega0_rad_s": "omega_laser",
    "cavity_length_m": "cavity_length",
    "mirror_mass_kg": "mirror_mass",
    "mirror_freq_rad_s": "omega_mirror",
    "mirror_Q": "quality",
    "mirror_gamma_s": "damping",
    "temperature_K": "temperature",
    "gamma_s": "coupler_decay",
    "finesse": "finesse",
    "mu_s": "internal_decay",
    "mod_index": "mod_index",
    "measurement_time_s": "measurement_time",
}


def load_params(path) -> PhysicalParams:
    """Read a flat key = value parameter file.

    Recognised keys: laser_power_W, wavelength_m or omega0_rad_s,
    cavity_length_m, mirror_mass_kg, mirror_freq_rad_s, mirror_Q or
    mirror_gamma_s, temperature_K, gamma_s or finesse, mu_s, mod_index,
    measurement_time_s.  Either-or pairs are enforced by :func:`validate`.
    """
    values: dict[str, float] = {}
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(
                    [f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}"]
                )
            key, _, text = line.partition("=")
            key = key.strip()
            text = text.strip()
            if key in seen:
                raise ValidationError([f"{path}:{lineno}: duplicate key {key!r}"])
            seen.add(key)
            try:
                value = float(text)
            except ValueError:
                raise ValidationError(
                    [f"{path}:{lineno}: cannot parse value {text!r} for {key!r}"]
                ) from None
            if key == "wavelength_m":
                if "omega0_rad_s" in seen:
                    raise ValidationError(
                        [f"{path}:{lineno}: give wavelength_m or omega0_rad_s, not both"]
                    )
                values["omega_laser"] = omega_from_wavelength(value)
                continue
            if key == "omega0_rad_s" and "omega_laser" in values:
                raise ValidationError(
                    [f"{path}:{lineno}: give wavelength_m or omega0_rad_s, not both"]
                )
            if key not in _FILE_KEYS:
                raise ValidationError([f"{path}:{lineno}: unknown key {key!r}"])
            values[_FILE_KEYS[key]] = value
    return PhysicalParams(**values)
