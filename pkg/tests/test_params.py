import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirrornoise import (
    AmbiguityError,
    PhysicalParams,
    ValidationError,
    derive,
    load_params,
    omega_from_wavelength,
    validate,
)

from conftest import reference_physical

# frozen regression constants, computed once by direct evaluation of the
# defining formulas at the reference parameter set
GAMMA_REGRESSION = 0.031415926535897934
TS_REGRESSION = 4375690.01857986
CHI_REGRESSION = 2.29549907925431
FINESSE_REGRESSION = 100194.2323036624


def test_reference_regressions(reference):
    assert reference.damping == pytest.approx(GAMMA_REGRESSION, rel=1e-14)
    assert reference.scaled_temperature == pytest.approx(TS_REGRESSION, rel=1e-14)
    assert reference.scaled_coupling == pytest.approx(CHI_REGRESSION, rel=1e-14)
    assert reference.finesse == pytest.approx(FINESSE_REGRESSION, rel=1e-14)


def test_reference_values_near_quoted(reference):
    # the quoted rounded values from the reference configuration
    assert abs(reference.damping - 3e-2) / 3e-2 < 0.05
    assert abs(reference.scaled_temperature - 4.37e6) / 4.37e6 < 0.01


def test_finesse_direct_formula(reference):
    from mirrornoise import C_LIGHT

    assert reference.finesse == pytest.approx(
        math.pi * C_LIGHT / (2 * 0.01 * 4.7e5), rel=1e-15
    )


def test_steady_state_identities(reference):
    from mirrornoise import HBAR, K_B

    assert reference.coupling == reference.omega_laser / reference.cavity_length
    assert reference.scaled_coupling == pytest.approx(
        reference.coupling * math.sqrt(2 * HBAR / (reference.mirror_mass * reference.omega_mirror)),
        rel=1e-15,
    )
    assert reference.drive == pytest.approx(
        math.sqrt(reference.laser_power * reference.coupler_decay / (HBAR * reference.omega_laser)),
        rel=1e-15,
    )
    assert reference.drive == pytest.approx(
        math.sqrt(reference.coupler_decay) * reference.input_amplitude, rel=1e-15
    )
    assert reference.cavity_amplitude == pytest.approx(
        2 * reference.drive / (reference.coupler_decay + reference.internal_decay), rel=1e-15
    )
    assert reference.scaled_temperature == pytest.approx(
        K_B * reference.temperature / (HBAR * reference.omega_mirror), rel=1e-15
    )
    assert reference.detuning_shift == reference.coupling * reference.steady_position
    assert reference.half_linewidth == 0.5 * (reference.coupler_decay + reference.internal_decay)


def test_zero_power_rejected():
    with pytest.raises(ValidationError) as err:
        derive(reference_physical(laser_power=0.0))
    assert any("laser_power" in v for v in err.value.violations)


def test_validate_is_total_and_matches_derive():
    good = reference_physical()
    assert validate(good) == []

    bad = reference_physical(temperature=0.0)
    violations = validate(bad)
    assert any("temperature must be positive" in v for v in violations)

    bad = reference_physical(mod_index=0.9)
    violations = validate(bad)
    assert any("mod_index outside small-signal regime" in v for v in violations)


def test_ambiguous_quality_damping():
    with pytest.raises(AmbiguityError):
        derive(reference_physical(damping=0.03))  # quality also set
    with pytest.raises(AmbiguityError):
        derive(reference_physical(quality=None))  # neither set


def test_ambiguous_coupler_finesse():
    with pytest.raises(AmbiguityError):
        derive(reference_physical(finesse=1e5))
    with pytest.raises(AmbiguityError):
        derive(reference_physical(coupler_decay=None))


def test_quality_damping_roundtrip(reference):
    again = derive(reference_physical(quality=None, damping=reference.damping))
    assert abs(again.quality - 4e6) / 4e6 < 1e-15


def test_coupler_finesse_roundtrip(reference):
    again = derive(reference_physical(coupler_decay=None, finesse=reference.finesse))
    assert abs(again.coupler_decay - 4.7e5) / 4.7e5 < 1e-15


def test_power_scale_laws(reference):
    hot = derive(reference_physical(laser_power=4e-3))
    assert hot.cavity_amplitude == pytest.approx(2 * reference.cavity_amplitude, rel=1e-14)
    assert hot.scaled_coupling == reference.scaled_coupling
    assert hot.steady_position == pytest.approx(4 * reference.steady_position, rel=1e-14)


def test_derive_is_pure_and_bit_stable():
    a = derive(reference_physical())
    b = derive(reference_physical())
    assert dataclasses.asdict(a) == dataclasses.asdict(b)


@settings(max_examples=40, deadline=None)
@given(
    quality=st.floats(min_value=1.0, max_value=1e8),
    nu=st.floats(min_value=1e-2, max_value=1e7),
)
def test_quality_roundtrip_property(quality, nu):
    damping = nu / quality
    assert abs(nu / damping - quality) / quality < 1e-15


def _write(tmp_path, text):
    path = tmp_path / "run.params"
    path.write_text(text, encoding="utf-8")
    return path


PAPER_FILE = """
# reference configuration
laser_power_W = 1e-3
omega0_rad_s = 1.7718582566246432e15
cavity_length_m = 0.01            # 1 cm cavity
mirror_mass_kg = 1e-5
mirror_freq_rad_s = 1.2566370614359172e5
mirror_Q = 4e6
temperature_K = 4.2
gamma_s = 4.7e5
mu_s = 4.7e5
mod_index = 0.1
measurement_time_s = 300
"""


def test_load_params_file(tmp_path):
    p = load_params(_write(tmp_path, PAPER_FILE))
    d = derive(p)
    assert d.quality == 4e6
    assert d.finesse == pytest.approx(FINESSE_REGRESSION, rel=1e-12)


def test_load_params_wavelength(tmp_path):
    text = PAPER_FILE.replace(
        "omega0_rad_s = 1.7718582566246432e15", "wavelength_m = 1.064e-6"
    )
    p = load_params(_write(tmp_path, text))
    assert p.omega_laser == pytest.approx(omega_from_wavelength(1.064e-6), rel=0)


def test_load_params_errors(tmp_path):
    with pytest.raises(ValidationError, match="unknown key"):
        load_params(_write(tmp_path, PAPER_FILE + "\nbogus_key = 1\n"))
    with pytest.raises(ValidationError, match="duplicate"):
        load_params(_write(tmp_path, PAPER_FILE + "\nmod_index = 0.2\n"))
    with pytest.raises(ValidationError, match="not both"):
        load_params(_write(tmp_path, PAPER_FILE + "\nwavelength_m = 1e-6\n"))
    with pytest.raises(ValidationError, match="cannot parse"):
        load_params(_write(tmp_path, "laser_power_W = banana\n"))
    with pytest.raises(ValidationError, match="expected"):
        load_params(_write(tmp_path, "laser_power_W 1e-3\n"))


def test_load_params_missing_required(tmp_path):
    text = "\n".join(
        line for line in PAPER_FILE.splitlines() if not line.startswith("mirror_mass_kg")
    )
    p = load_params(_write(tmp_path, text))
    assert any("mirror_mass is missing" in v for v in validate(p))
