"""Analytic-vs-simulated spectrum comparison reports.

The simulated signal only contains the noise channels that are switched
on, so the analytic reference is assembled from the matching terms of the
spectrum breakdown.  The vacuum ports (and the thermal pair) must toggle
together for the term-by-term bookkeeping to stay clean; the detector
floor rides the input-port switches because the synthetic demodulation
channels are derived from the same vacuum.
"""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from .errors import ConfigError, RuntimeCapError
from .params import DerivedParams
from .spectrum import PhaseModulation, ZeroNoise, evaluate
from .stochastic import (
    NoiseSwitches,
    SimConfig,
    _segment_samples,
    simulate_signal_psd,
)

__all__ = ["compare_analytic_vs_simulated", "analytic_terms_for_switches"]


def analytic_terms_for_switches(cfg: SimConfig) -> tuple[list[str], list[str]]:
    """Spectrum terms represented in a simulation with these switches, plus notes."""
    s = cfg.switches
    vac = (s.input_amplitude, s.input_phase, s.loss_amplitude, s.loss_phase)
    if len(set(vac)) != 1:
        raise ConfigError(
            "vacuum ports must toggle together for analytic comparison "
            "(input/loss amplitude and phase)"
        )
    if s.thermal_momentum != s.thermal_position:
        raise ConfigError("thermal sources must toggle together for analytic comparison")
    terms: list[str] = []
    notes: list[str] = []
    if vac[0]:
        terms += ["shot", "back_action", "internal_loss"]
    else:
        notes.append(
            "shot floor is detector-side, not cavity-side: with the vacuum ports off the "
            "synthetic demodulation channels are off too, so the simulated signal has no "
            "floor while the full spectrum total would include it"
        )
    if s.thermal_momentum:
        terms += ["thermal_T", "thermal_correction"]
    if s.classical_amplitude and not isinstance(cfg.noise.amplitude, ZeroNoise):
        terms.append("amplitude_noise")
    if s.classical_phase and not isinstance(cfg.noise.phase, ZeroNoise):
        terms.append("phase_noise")
    return terms, notes


def _analytic_on_grid(d: DerivedParams, omega, terms, noise) -> np.ndarray:
    bd = evaluate(d, omega, noise=noise, scheme=PhaseModulation(), thermal="cbmme")
    if not terms:
        return np.zeros_like(np.asarray(omega, dtype=float))
    return sum(bd.part(name) for name in terms)


def _band_metrics(est, d: DerivedParams, band, terms, noise) -> dict:
    om, psd = est.band(*band)
    if om.size == 0:
        raise ConfigError(
            f"no Welch bins inside the band {band}; lengthen the segments"
        )
    ref = _analytic_on_grid(d, om, terms, noise)
    full = _analytic_on_grid(
        d, om, ["shot", "back_action", "internal_loss", "thermal_T", "thermal_correction",
                "amplitude_noise", "phase_noise"], noise,
    )
    out = {
        "n_bins": int(om.size),
        "band_integrated_ratio": float(np.sum(psd) / np.sum(ref)) if np.all(ref > 0) or np.sum(ref) > 0 else None,
    }
    if np.all(ref > 0):
        rel = (psd - ref) / ref
        out["rms_relative_deviation"] = float(np.sqrt(np.mean(rel * rel)))
    else:
        out["rms_relative_deviation"] = None
        rel_full = (psd - full) / full
        out["rms_relative_deviation_vs_full_total"] = float(np.sqrt(np.mean(rel_full * rel_full)))
    return out


_PER_TERM_RUNS = (
    ("vacuum_only", NoiseSwitches.vacuum_only()),
    ("thermal_only", NoiseSwitches.thermal_only()),
    ("classical_amplitude_only", NoiseSwitches.classical_only(True, False)),
    ("classical_phase_only", NoiseSwitches.classical_only(False, True)),
)


def compare_analytic_vs_simulated(
    d: DerivedParams,
    cfg: SimConfig,
    tolerance: float = 0.10,
    band: tuple[float, float] | None = None,
    per_term: bool = True,
) -> dict:
    """Run the oracle, estimate its PSD, and report deviations from the analytic terms.

    The headline metric is the band-averaged RMS relative deviation of the
    Welch estimate from the switch-matched analytic spectrum; the report
    also carries per-term toggled runs at reduced averaging when requested.
    Raises RuntimeCapError before doing any work if the total sample count
    exceeds the configured cap.
    """
    if band is None:
        band = (d.omega_mirror / 3.0, 3.0 * d.omega_mirror)
    cfg.validate(d)
    terms, notes = analytic_terms_for_switches(cfg)

    runs: list[tuple[str, SimConfig]] = [("main", cfg)]
    if per_term:
        seg = _segment_samples(cfg.n_samples(), cfg.n_segments)
        n_reduced = max(16, cfg.n_segments // 8)
        dur_reduced = (n_reduced + 1) / 2 * seg * cfg.dt
        for name, switches in _PER_TERM_RUNS:
            probe = replace(cfg, switches=switches, duration=dur_reduced,
                            n_segments=n_reduced)
            probe_terms, _ = analytic_terms_for_switches(probe)
            if probe_terms and all(t in terms for t in probe_terms):
                runs.append((name, probe))

    projected = sum(c.n_samples() for _, c in runs)
    if projected > cfg.runtime_cap_samples:
        raise RuntimeCapError(
            f"estimated {projected:.3g} samples exceeds the runtime cap of "
            f"{cfg.runtime_cap_samples:.3g}; required duration {projected * cfg.dt:.6g} s "
            f"at dt = {cfg.dt:.3g} s"
        )

    report = {
        "band_rad_s": [float(band[0]), float(band[1])],
        "tolerance": float(tolerance),
        "n_segments": int(cfg.n_segments),
        "expected_statistical_rms": float(math.sqrt(1.056 / cfg.n_segments)),
        "master_seed": int(cfg.master_seed),
        "dt_s": float(cfg.dt),
        "duration_s": float(cfg.duration),
        "analytic_terms_included": terms,
        "notes": notes,
    }

    per_term_report: dict[str, dict] = {}
    for name, run_cfg in runs:
        est = simulate_signal_psd(d, run_cfg)
        run_terms, _ = analytic_terms_for_switches(run_cfg)
        metrics = _band_metrics(est, d, band, run_terms, run_cfg.noise)
        metrics["n_segments_used"] = int(est.n_segments)
        if name == "main":
            rms = metrics.get("rms_relative_deviation")
            report.update(metrics)
            report["pass"] = bool(rms is not None and rms <= tolerance)
        else:
            ratio = metrics["band_integrated_ratio"]
            metrics["pass"] = bool(ratio is not None and abs(ratio - 1.0) <= tolerance)
            per_term_report[name] = metrics
    if per_term:
        report["per_term"] = per_term_report
    return report
