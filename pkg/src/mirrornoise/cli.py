"""Command-line front end.

Subcommands: ``spectrum`` (per-term noise spectrum on a frequency grid),
``error-budget`` (position-error power sweep), ``compare`` (time-domain
oracle vs analytic spectrum).  CSV for grids, JSON for reports; every
output written to disk is accompanied by a .manifest.json recording the
resolved parameters, command line, seed and tool version.  Exit codes:
0 success, 1 validation error, 2 tolerance failure in compare, 3 runtime
cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import asdict
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .compare import compare_analytic_vs_simulated
from .errors import MirrorNoiseError, RuntimeCapError, ValidationError
from .measurement import BUDGET_CSV_HEADER, budget_csv_rows, figure2_sweep
from .params import derive, load_params
from .spectrum import (
    Homodyne,
    LorentzianNoise,
    NoiseModel,
    OneOverFNoise,
    PhaseModulation,
    WhiteNoise,
    ZeroNoise,
    evaluate,
    load_noise_table,
)
from .stochastic import NoiseSwitches, SimConfig

SPECTRUM_CSV_HEADER = (
    "omega_rad_s,shot,back_action,internal_loss,amplitude_noise,phase_noise,"
    "thermal_T,thermal_correction,total"
)


def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def _write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(out_path, text: str, manifest: dict | None, extra_outputs=()) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    _write_atomic(out_path, text)
    if manifest is not None:
        manifest = dict(manifest)
        manifest["outputs"] = [os.path.abspath(out_path)] + [
            os.path.abspath(p) for p in extra_outputs
        ]
        _write_atomic(out_path + ".manifest.json", json.dumps(manifest, indent=2) + "\n")


def _manifest(args, derived, seed=None) -> dict:
    return {
        "tool": "mirrornoise",
        "version": __version__,
        "argv": list(getattr(args, "_argv", [])),
        "timestamp_utc": datetime.now(timezone.utc).isoformat(),
        "params_file": os.path.abspath(args.params),
        "resolved_params": asdict(derived),
        "seed": seed,
    }


def _parse_noise_shape(text: str):
    try:
        if text == "zero":
            return ZeroNoise()
        if text.startswith("white:"):
            return WhiteNoise(level=float(text.split(":", 1)[1]))
        if text.startswith("lorentzian:"):
            _, level, corner = text.split(":")
            return LorentzianNoise(level=float(level), corner=float(corner))
        if text.startswith("oneoverf:"):
            _, level, corner, floor = text.split(":")
            return OneOverFNoise(level=float(level), corner=float(corner),
                                 floor=float(floor))
    except (ValueError, TypeError):
        pass
    else:
        if os.path.exists(text):
            return None  # handled as a table file by the caller
    raise ValidationError(
        [f"cannot parse noise spec {text!r}: expected zero, white:LEVEL, "
         "lorentzian:LEVEL:CORNER, oneoverf:LEVEL:CORNER:FLOOR, or a table file"]
    )


def _noise_model(args) -> NoiseModel:
    base = getattr(args, "noise", None) or "zero"
    shape = _parse_noise_shape(base)
    model = load_noise_table(base) if shape is None else NoiseModel(amplitude=shape, phase=shape)
    amp_spec = getattr(args, "amp_noise", None)
    phase_spec = getattr(args, "phase_noise", None)
    if amp_spec:
        shape = _parse_noise_shape(amp_spec)
        if shape is None:
            raise ValidationError(["--amp-noise takes a shape spec, not a file"])
        model = NoiseModel(amplitude=shape, phase=model.phase)
    if phase_spec:
        shape = _parse_noise_shape(phase_spec)
        if shape is None:
            raise ValidationError(["--phase-noise takes a shape spec, not a file"])
        model = NoiseModel(amplitude=model.amplitude, phase=shape)
    return model


def _scheme(args):
    if args.scheme == "pm":
        return PhaseModulation()
    return Homodyne(lo_amplitude=args.lo_amplitude, reflectivity=args.bs_reflectivity)


def _omega_grid(args, derived) -> np.ndarray:
    lo = args.omega_min if args.omega_min is not None else derived.damping / 10.0
    hi = args.omega_max if args.omega_max is not None else 10.0 * derived.half_linewidth
    n = args.omega_points
    if n < 2 or not hi > lo:
        raise ValidationError(["omega grid needs omega_min < omega_max and >= 2 points"])
    if args.omega_scale == "log":
        if lo <= 0:
            raise ValidationError(["log omega grid needs a positive omega_min"])
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def cmd_spectrum(args) -> int:
    derived = derive(load_params(args.params))
    grid = _omega_grid(args, derived)
    if args.carrier is not None:
        margin = args.carrier_margin
        w_max = float(np.max(np.abs(grid)))
        if w_max * margin >= args.carrier:
            print(
                f"warning: grid reaches {w_max:.4g} rad/s, within a factor {margin:g} of the "
                f"carrier {args.carrier:.4g} rad/s; the carrier-noise-negligible assumption "
                "of the demodulation model degrades there",
                file=sys.stderr,
            )
    bd = evaluate(derived, grid, noise=_noise_model(args), scheme=_scheme(args), thermal=args.thermal)
    lines = [SPECTRUM_CSV_HEADER]
    for i in range(grid.size):
        lines.append(",".join(_fmt(v[i]) for v in (
            bd.omega, bd.shot, bd.back_action, bd.internal_loss, bd.amplitude_noise,
            bd.phase_noise, bd.thermal_T, bd.thermal_correction, bd.total,
        )))
    _emit(args.out, "\n".join(lines) + "\n", _manifest(args, derived))
    return 0


def cmd_error_budget(args) -> int:
    derived = derive(load_params(args.params))
    powers = np.geomspace(args.power_min, args.power_max, args.power_points)
    method = "closed_form" if args.method == "closed-form" else "spectrum_scaled"
    budgets = figure2_sweep(
        derived, powers, measurement_time=args.tau_m, method=method,
        noise=_noise_model(args), scheme=_scheme(args), thermal=args.thermal,
    )
    if args.at == "dc":
        budgets = [b for b in budgets if b.omega == 0.0]
    elif args.at == "resonance":
        budgets = [b for b in budgets if b.omega != 0.0]
    text = "\n".join([BUDGET_CSV_HEADER] + budget_csv_rows(budgets)) + "\n"
    _emit(args.out, text, _manifest(args, derived))
    return 0


def _sim_config(args, derived) -> tuple[SimConfig, tuple[float, float] | None, bool]:
    with open(args.sim_config, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    known = {
        "dt", "duration", "segment_samples", "n_segments", "master_seed", "window",
        "noise_switches", "classical_amplitude", "classical_phase", "initial_state",
        "burn_in_s", "runtime_cap_samples", "band_rad_s", "per_term",
    }
    unknown = set(spec) - known
    if unknown:
        raise ValidationError([f"unknown sim-config keys: {sorted(unknown)}"])
    dt = float(spec.get("dt", 0.08 / derived.half_linewidth))
    n_segments = int(spec.get("n_segments", 16))
    if "duration" in spec:
        duration = float(spec["duration"])
    elif "segment_samples" in spec:
        duration = (n_segments + 1) / 2 * int(spec["segment_samples"]) * dt
    else:
        raise ValidationError(["sim-config needs 'duration' or 'segment_samples'"])
    switches = NoiseSwitches(**spec.get("noise_switches", {}))
    noise = NoiseModel(
        amplitude=_shape_from_json(spec.get("classical_amplitude")),
        phase=_shape_from_json(spec.get("classical_phase")),
    )
    seed = args.seed if args.seed is not None else int(spec.get("master_seed", 12345))
    cfg = SimConfig(
        duration=duration,
        dt=dt,
        master_seed=seed,
        n_segments=n_segments,
        window=str(spec.get("window", "hann")),
        switches=switches,
        noise=noise,
        initial_state=str(spec.get("initial_state", "stationary")),
        burn_in=spec.get("burn_in_s"),
        runtime_cap_samples=float(spec.get("runtime_cap_samples", 1.5e9)),
    )
    band = tuple(float(v) for v in spec["band_rad_s"]) if "band_rad_s" in spec else None
    per_term = bool(spec.get("per_term", True)) and not args.skip_per_term
    return cfg, band, per_term


def _shape_from_json(spec):
    if spec is None:
        return ZeroNoise()
    kind = spec.get("shape", "zero")
    if kind == "zero":
        return ZeroNoise()
    if kind == "white":
        return WhiteNoise(level=float(spec["level"]))
    if kind == "lorentzian":
        return LorentzianNoise(level=float(spec["level"]), corner=float(spec["corner"]))
    raise ValidationError([f"unsupported classical shape {kind!r} for simulation"])


def cmd_compare(args) -> int:
    derived = derive(load_params(args.params))
    cfg, band, per_term = _sim_config(args, derived)
    report = compare_analytic_vs_simulated(
        derived, cfg, tolerance=args.tolerance, band=band, per_term=per_term,
    )
    extra = []
    if args.psd_out:
        from .stochastic import simulate_signal_psd

        est = simulate_signal_psd(derived, cfg)
        lines = ["omega_rad_s,psd"]
        lines += [f"{_fmt(w)},{_fmt(p)}" for w, p in zip(est.omega, est.psd)]
        _write_atomic(args.psd_out, "\n".join(lines) + "\n")
        extra.append(args.psd_out)
    _emit(args.out, json.dumps(report, indent=2) + "\n",
          _manifest(args, derived, seed=cfg.master_seed), extra_outputs=extra)
    return 0 if report["pass"] else 2


def _add_scheme_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=("pm", "homodyne"), default="pm",
                   help="detection scheme (default pm)")
    p.add_argument("--lo-amplitude", type=float, default=1.0,
                   help="homodyne local oscillator amplitude")
    p.add_argument("--bs-reflectivity", type=float, default=0.5,
                   help="homodyne beamsplitter reflectivity, in (0,1)")
    p.add_argument("--thermal", choices=("cbmme", "sbmme"), default="cbmme",
                   help="Brownian damping model for the thermal correction term")
    p.add_argument("--noise", default="zero",
                   help="classical noise for both quadratures: zero, white:LEVEL, "
                        "lorentzian:LEVEL:CORNER, oneoverf:LEVEL:CORNER:FLOOR, or a table file")
    p.add_argument("--amp-noise", default=None, help="override amplitude-noise shape")
    p.add_argument("--phase-noise", default=None, help="override phase-noise shape")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mirrornoise",
        description="Noise budgets for optical phase readout of a suspended cavity mirror",
    )
    parser.add_argument("--version", action="version", version=f"mirrornoise {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="per-term signal noise spectrum on a frequency grid")
    sp.add_argument("--params", required=True, help="parameter file (key = value)")
    sp.add_argument("--out", default=None, help="output CSV (stdout if omitted)")
    sp.add_argument("--omega-min", type=float, default=None)
    sp.add_argument("--omega-max", type=float, default=None)
    sp.add_argument("--omega-points", type=int, default=512)
    sp.add_argument("--omega-scale", choices=("log", "lin"), default="log")
    sp.add_argument("--carrier", type=float, default=None,
                    help="modulation carrier [rad/s]; warns when the grid approaches it")
    sp.add_argument("--carrier-margin", type=float, default=10.0,
                    help="required carrier / band-edge factor before warning")
    _add_scheme_options(sp)
    sp.set_defaults(func=cmd_spectrum)

    eb = sub.add_parser("error-budget", help="position-error budgets over a power sweep")
    eb.add_argument("--params", required=True)
    eb.add_argument("--out", default=None)
    eb.add_argument("--power-min", type=float, default=1e-6)
    eb.add_argument("--power-max", type=float, default=1.0)
    eb.add_argument("--power-points", type=int, default=25)
    eb.add_argument("--tau-m", type=float, default=300.0, help="measurement time [s]")
    eb.add_argument("--at", choices=("dc", "resonance", "both"), default="both")
    eb.add_argument("--method", choices=("closed-form", "spectrum"), default="closed-form")
    _add_scheme_options(eb)
    eb.set_defaults(func=cmd_error_budget)

    cp = sub.add_parser("compare", help="time-domain oracle vs analytic spectrum")
    cp.add_argument("--params", required=True)
    cp.add_argument("--sim-config", required=True, help="JSON simulation configuration")
    cp.add_argument("--seed", type=int, default=None, help="override the configured master seed")
    cp.add_argument("--tolerance", type=float, default=0.10)
    cp.add_argument("--out", default=None, help="JSON report path (stdout if omitted)")
    cp.add_argument("--psd-out", default=None, help="optional CSV dump of the simulated PSD")
    cp.add_argument("--skip-per-term", action="store_true",
                    help="skip the per-term toggled diagnostic runs")
    cp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for tolerance failures
        return 0 if exc.code in (0, None) else 1
    args._argv = argv
    try:
        return args.func(args)
    except RuntimeCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (MirrorNoiseError, OSError) as exc:
        if isinstance(exc, ValidationError):
            for violation in exc.violations:
                print(f"error: {violation}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
