import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mirrornoise import (
    HBAR,
    K_B,
    Homodyne,
    LorentzianNoise,
    NoiseModel,
    OneOverFNoise,
    PhaseModulation,
    TabulatedNoise,
    ValidationError,
    WhiteNoise,
    ZeroNoise,
    derive,
    diosi_crossover_temperature,
    evaluate,
    load_noise_table,
    raw_scale,
    semiclassical_shot_floor,
    shot_floor,
)

from conftest import desk_physical, reference_physical

# frozen by direct evaluation of the crossover formula at 2*pi*5e9 rad/s
TSTAR_5GHZ = 0.0692711069654171


def test_shot_floor_matched_is_three_halves(reference):
    assert shot_floor(reference, PhaseModulation()) == 1.5


def test_shot_floor_homodyne_is_unity(reference):
    assert shot_floor(reference, Homodyne()) == 1.0


def test_shot_floor_no_internal_loss(reference):
    lossless = dataclasses.replace(reference, internal_decay=0.0)
    assert shot_floor(lossless, PhaseModulation()) == pytest.approx(51.5, rel=1e-14)


def test_semiclassical_floor_underestimates_by_half(reference):
    assert shot_floor(reference, PhaseModulation()) - semiclassical_shot_floor(reference) == 0.5
    lossless = dataclasses.replace(reference, internal_decay=0.0)
    assert shot_floor(lossless, PhaseModulation()) - semiclassical_shot_floor(lossless) == 0.5


def test_raw_scale(reference):
    assert raw_scale(reference, PhaseModulation()) == (0.1 * reference.input_amplitude) ** 2
    assert raw_scale(reference, Homodyne(lo_amplitude=2.0, reflectivity=0.25)) == 0.25


def test_homodyne_validation():
    with pytest.raises(ValidationError):
        Homodyne(lo_amplitude=0.0)
    with pytest.raises(ValidationError):
        Homodyne(reflectivity=1.0)


def test_phase_noise_vanishes_at_dc(reference):
    noisy = NoiseModel(phase=WhiteNoise(1e-2))
    bd = evaluate(reference, 0.0, noise=noisy)
    assert bd.phase_noise == 0.0
    bd = evaluate(reference, 0.0, noise=noisy, scheme=Homodyne())
    assert bd.phase_noise == 0.0  # matched cavity: homodyne phase filter also ~ omega^2


def test_sbmme_correction_is_odd(reference):
    for omega in (0.0, 0.3 * reference.omega_mirror, reference.omega_mirror, 5 * reference.omega_mirror):
        plus = evaluate(reference, omega, thermal="sbmme")
        minus = evaluate(reference, -omega, thermal="sbmme")
        assert minus.thermal_correction == -plus.thermal_correction
    assert evaluate(reference, 0.0, thermal="sbmme").thermal_correction == 0.0


def test_sbmme_total_asymmetry_equals_twice_correction(reference):
    omega = np.geomspace(0.1 * reference.damping, 10 * reference.coupler_decay, 64)
    plus = evaluate(reference, omega, thermal="sbmme")
    minus = evaluate(reference, -omega, thermal="sbmme")
    # the even parts cancel bitwise; only the final rounding of the two
    # grand totals limits the identity
    rounding = 4 * np.finfo(float).eps * plus.total
    np.testing.assert_allclose(
        plus.total - minus.total,
        2.0 * plus.thermal_correction,
        rtol=1e-12,
        atol=float(np.max(rounding)),
    )


def test_cbmme_total_is_even_bitwise(reference):
    noisy = NoiseModel(amplitude=WhiteNoise(1e-3), phase=LorentzianNoise(1e-2, 1e3))
    omega = np.geomspace(1e-3, 1e7, 200)
    plus = evaluate(reference, omega, noise=noisy, thermal="cbmme")
    minus = evaluate(reference, -omega, noise=noisy, thermal="cbmme")
    assert np.array_equal(plus.total, minus.total)


def test_decoupled_total_is_shot_floor(reference):
    dead = dataclasses.replace(reference, cavity_amplitude=0.0)
    omega = np.geomspace(1e-2, 1e7, 50)
    bd = evaluate(dead, omega)
    np.testing.assert_array_equal(bd.total, np.full_like(omega, 1.5))


def test_kernel_sharing(reference):
    noisy = NoiseModel(amplitude=WhiteNoise(3e-3))
    omega = np.geomspace(1e-2, 1e7, 40)
    bd = evaluate(reference, omega, noise=noisy)
    gamma, mu = reference.coupler_decay, reference.internal_decay
    np.testing.assert_allclose(
        bd.back_action / gamma ** 2, bd.internal_loss / (gamma * mu), rtol=1e-12
    )
    np.testing.assert_allclose(
        bd.back_action / gamma ** 2,
        bd.amplitude_noise / (4 * gamma ** 2 * 3e-3),
        rtol=1e-12,
    )


def test_scheme_consistency(reference):
    noisy = NoiseModel(amplitude=WhiteNoise(1e-3), phase=WhiteNoise(1e-3))
    omega = np.geomspace(1e-2, 1e7, 40)
    pm = evaluate(reference, omega, noise=noisy, scheme=PhaseModulation())
    hd = evaluate(reference, omega, noise=noisy, scheme=Homodyne())
    np.testing.assert_array_equal(pm.back_action, hd.back_action)
    np.testing.assert_array_equal(pm.internal_loss, hd.internal_loss)
    np.testing.assert_array_equal(pm.thermal_T, hd.thermal_T)
    np.testing.assert_array_equal(pm.thermal_correction, hd.thermal_correction)
    np.testing.assert_array_equal(pm.amplitude_noise, hd.amplitude_noise)
    assert np.all(pm.shot != hd.shot)


def test_homodyne_phase_noise_bracket():
    unmatched = derive(desk_physical())
    unmatched = dataclasses.replace(unmatched, internal_decay=3 * unmatched.coupler_decay,
                                    half_linewidth=2 * unmatched.coupler_decay)
    gamma, mu = unmatched.coupler_decay, unmatched.internal_decay
    omega = 0.7 * unmatched.omega_mirror
    bd = evaluate(unmatched, omega, noise=NoiseModel(phase=WhiteNoise(1.0)), scheme=Homodyne())
    expected = 4.0 * (((gamma - mu) / 2) ** 2 + omega ** 2) / (((gamma + mu) / 2) ** 2 + omega ** 2)
    assert bd.phase_noise == pytest.approx(expected, rel=1e-13)


def test_high_frequency_floor(reference):
    noisy = NoiseModel(amplitude=WhiteNoise(1e-3), phase=WhiteNoise(1e-3))
    far = 1e4 * reference.coupler_decay
    bd = evaluate(reference, far, noise=noisy)
    # every non-shot term has rolled off; phase noise saturates at its own
    # omega-independent ceiling 4*G_y*(2 gamma/(gamma+mu))^2 = 4e-3 here
    assert bd.back_action < 1e-12
    assert bd.thermal_T < 1e-6
    assert abs(bd.total - bd.shot - bd.phase_noise) < 1e-6
    lower = evaluate(reference, 10 * reference.coupler_decay)
    assert abs(lower.total - lower.shot) < 1e-4 * lower.shot


def test_total_is_sum_of_parts(reference):
    noisy = NoiseModel(amplitude=WhiteNoise(1e-4), phase=WhiteNoise(2e-4))
    omega = np.geomspace(1e-2, 1e7, 60)
    bd = evaluate(reference, omega, noise=noisy)
    parts = (
        bd.shot + bd.back_action + bd.internal_loss + bd.amplitude_noise
        + bd.phase_noise + bd.thermal_T + bd.thermal_correction
    )
    np.testing.assert_allclose(bd.total, parts, rtol=0, atol=0)


def test_mechanical_line_shape(desk):
    grid = np.linspace(desk.omega_mirror - 3 * desk.damping,
                       desk.omega_mirror + 3 * desk.damping, 1201)
    bd = evaluate(desk, grid)
    line = bd.total - bd.shot
    peak_idx = int(np.argmax(line))
    step = grid[1] - grid[0]
    assert abs(grid[peak_idx] - desk.omega_mirror) <= step
    half = evaluate(desk, desk.omega_mirror + desk.damping / 2)
    peak = evaluate(desk, desk.omega_mirror)
    ratio = (half.total - half.shot) / (peak.total - peak.shot)
    assert ratio == pytest.approx(0.5, abs=0.03)  # FWHM equals the damping rate


def test_thermal_to_correction_ratio_at_resonance(reference):
    bd = evaluate(reference, reference.omega_mirror)
    ratio = bd.thermal_T / bd.thermal_correction
    expected = 12 * reference.omega_mirror ** 2 * reference.scaled_temperature ** 2 / (
        reference.damping ** 2 + reference.omega_mirror ** 2
    )
    assert ratio == pytest.approx(expected, rel=1e-12)
    assert 1e14 < ratio < 1e15  # utterly negligible correction in the lab regime


def test_crossover_temperature_formula():
    gamma_m, omega = 0.03, 2 * math.pi * 5e9
    tstar = diosi_crossover_temperature(gamma_m, omega)
    assert tstar == pytest.approx(
        HBAR * math.sqrt((gamma_m ** 2 + omega ** 2) / 12.0) / K_B, rel=0
    )
    assert tstar == pytest.approx(TSTAR_5GHZ, rel=1e-14)
    assert diosi_crossover_temperature(0.0, 0.0) == 0.0
    # damping-dominated limit reduces to hbar*omega/(sqrt(12) k_B)
    assert diosi_crossover_temperature(0.0, omega) == pytest.approx(
        HBAR * omega / (math.sqrt(12) * K_B), rel=1e-14
    )


def test_crossover_straddle(reference):
    omega = 200.0 * reference.omega_mirror  # far above the damping rate
    tstar = diosi_crossover_temperature(reference.damping, omega)
    for factor, correction_wins in ((0.9, True), (1.1, False)):
        d = derive(reference_physical(temperature=factor * tstar))
        bd = evaluate(d, omega)
        assert (bd.thermal_correction > bd.thermal_T) == correction_wins


def test_low_temperature_warning(reference):
    cold = derive(reference_physical(temperature=1e-8))
    with pytest.warns(UserWarning, match="scaled temperature"):
        evaluate(cold, reference.omega_mirror)


def test_noise_shapes_even_and_nonnegative():
    shapes = [
        WhiteNoise(0.5),
        LorentzianNoise(2.0, 100.0),
        OneOverFNoise(1.0, 10.0, 0.1),
        TabulatedNoise(np.array([1.0, 10.0, 100.0]), np.array([3.0, 1.0, 0.5])),
        ZeroNoise(),
    ]
    omega = np.linspace(-500, 500, 101)
    for shape in shapes:
        vals = shape.density(omega)
        assert np.all(vals >= 0)
        np.testing.assert_array_equal(vals, shape.density(-omega))


def test_lorentzian_shape_values():
    shape = LorentzianNoise(2.0, 100.0)
    assert shape.density(0.0) == 2.0
    assert shape.density(100.0) == 1.0


def test_one_over_f_shape_values():
    shape = OneOverFNoise(1.0, 10.0, 0.25)
    assert shape.density(0.0) == 1.25
    assert shape.density(1e6) == pytest.approx(0.25, rel=1e-4)


def test_tabulated_log_interpolation():
    grid = np.array([1.0, 100.0])
    vals = np.array([1.0, 3.0])
    shape = TabulatedNoise(grid, vals)
    assert shape.density(10.0) == pytest.approx(2.0, rel=1e-12)  # geometric midpoint
    assert shape.density(0.1) == 1.0 and shape.density(1e5) == 3.0  # clamped


def test_noise_table_file(tmp_path, reference):
    path = tmp_path / "noise.txt"
    path.write_text("1.0 2.0 0.5\n10.0 1.0 0.25\n100.0 0.5 0.125\n")
    model = load_noise_table(path)
    assert model.amplitude.density(10.0) == 1.0
    assert model.phase.density(100.0) == 0.125
    path2 = tmp_path / "noise2.txt"
    path2.write_text("1.0 2.0\n10.0 1.0\n")
    model2 = load_noise_table(path2)
    assert isinstance(model2.phase, ZeroNoise)


@settings(max_examples=30, deadline=None)
@given(
    linewidth_ratio=st.floats(min_value=2.0, max_value=200.0),
    quality=st.floats(min_value=10.0, max_value=1e5),
    coupling_target=st.floats(min_value=0.1, max_value=100.0),
    log_omega=st.floats(min_value=-2.0, max_value=3.0),
)
def test_spectrum_even_and_positive_property(linewidth_ratio, quality, coupling_target, log_omega):
    d = derive(desk_physical(linewidth_ratio=linewidth_ratio, quality=quality,
                             coupling_target=coupling_target))
    omega = d.omega_mirror * 10.0 ** log_omega
    noisy = NoiseModel(amplitude=WhiteNoise(1e-3), phase=WhiteNoise(1e-3))
    plus = evaluate(d, omega, noise=noisy)
    minus = evaluate(d, -omega, noise=noisy)
    assert plus.total == minus.total
    for name in plus.PART_NAMES:
        assert plus.part(name) >= 0.0
