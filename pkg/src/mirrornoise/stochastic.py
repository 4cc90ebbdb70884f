"""Time-domain stochastic oracle for the linearised cavity/mirror system.

The driven system is linear, so the discretisation is exact at any step:
one step advances the state by e^{A dt} and adds a Gaussian increment with
the exact process-noise covariance.  The per-step joint distribution of

* the state increment,
* the step-integrated state (for integrate-and-dump output samples), and
* the raw Wiener increments of sources that feed the detector directly

is obtained from a single Van Loan matrix exponential, so the simulated
output carries no step-size bias beyond the |sinc(omega dt / 2)|^2 of the
averaging window.  The recursion runs in the complex Schur basis of
e^{A dt} (unitary, hence well conditioned even though the drift matrix has
a defective repeated eigenvalue at -kappa_c whenever the optomechanical
coupling is on).

All operator-valued noises are replaced by independent real white noises
carrying the symmetrised correlation functions; the imaginary antisymmetric
cross-correlations of the thermal pair (and of the vacuum quadratures)
symmetrise to zero, so every source is generated independently.  The
oracle therefore validates the symmetrised (Lindblad-model) spectrum and
cannot, by construction, reproduce the odd-in-frequency term of the
non-Lindblad damping model.

RNG: counter-based Philox (numpy), keyed per (master_seed, chunk, stream)
through SeedSequence, so chunk streams are independent and every run is
bit-reproducible.  The chunk length is pinned by ``CHUNK_SAMPLES``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

import numpy as np
from scipy.linalg import expm, schur, solve_continuous_lyapunov
from scipy.signal import lfilter

from .dynamics import drift_matrix
from .errors import ConfigError, SimulationError
from .params import DerivedParams
from .spectrum import (
    LorentzianNoise,
    NoiseModel,
    WhiteNoise,
    ZeroNoise,
)

__all__ = [
    "CHUNK_SAMPLES",
    "NoiseSwitches",
    "SimConfig",
    "SimTrace",
    "PsdEstimate",
    "StateMoments",
    "DemodConfig",
    "DemodFloorResult",
    "integrate",
    "output_psd",
    "welch_psd",
    "simulate_signal_psd",
    "simulate_state_moments",
    "stationary_covariance",
    "synthesize_noise",
    "demodulation_floor_sim",
]

CHUNK_SAMPLES = 1 << 20  # pinned: chunk boundaries shape the RNG stream layout


@dataclass(frozen=True)
class NoiseSwitches:
    """Per-source on/off flags for the time-domain drive."""

    input_amplitude: bool = True     # vacuum at the coupler, amplitude quadrature
    input_phase: bool = True         # vacuum at the coupler, phase quadrature
    loss_amplitude: bool = True      # vacuum through internal losses, amplitude
    loss_phase: bool = True          # vacuum through internal losses, phase
    thermal_momentum: bool = True    # momentum kicks, the T_s-proportional channel
    thermal_position: bool = True    # position channel of the Lindblad damping model
    classical_amplitude: bool = True
    classical_phase: bool = True

    @staticmethod
    def all_off() -> "NoiseSwitches":
        return NoiseSwitches(False, False, False, False, False, False, False, False)

    @staticmethod
    def vacuum_only() -> "NoiseSwitches":
        return NoiseSwitches(True, True, True, True, False, False, False, False)

    @staticmethod
    def thermal_only() -> "NoiseSwitches":
        return NoiseSwitches(False, False, False, False, True, True, False, False)

    @staticmethod
    def classical_only(amplitude: bool, phase: bool) -> "NoiseSwitches":
        return NoiseSwitches(False, False, False, False, False, False, amplitude, phase)


@dataclass(frozen=True)
class SimConfig:
    """Run configuration for the time-domain oracle.

    ``duration``/``dt`` in seconds; ``dt`` must resolve the fastest pole
    (dt < 0.1/kappa_c).  ``n_segments`` is the minimum Welch segment count
    (Hann window, 50% overlap).  ``initial_state`` is "stationary" (drawn
    from the analytic stationary covariance; the trace is stationary from
    t = 0) or "zero" (burn-in of 10/Gamma discarded unless ``burn_in``
    overrides it).
    """

    duration: float
    dt: float
    master_seed: int
    n_segments: int = 16
    window: str = "hann"
    switches: NoiseSwitches = NoiseSwitches()
    noise: NoiseModel = field(default_factory=NoiseModel)
    initial_state: str = "stationary"
    burn_in: Optional[float] = None
    max_trace_samples: int = 8_000_000
    runtime_cap_samples: float = 1.5e9

    def n_samples(self) -> int:
        return int(round(self.duration / self.dt))

    def validate(self, d: DerivedParams) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (self.duration > 0 and math.isfinite(self.duration)):
            raise ConfigError(f"duration must be positive, got {self.duration}")
        limit = 0.1 / d.half_linewidth
        if not self.dt < limit:
            raise ConfigError(
                f"dt = {self.dt:.3g} s does not resolve the fastest pole: need dt < "
                f"0.1/kappa_c = {limit:.3g} s"
            )
        if self.n_segments < 16:
            raise ConfigError(f"n_segments must be >= 16 for variance control, got {self.n_segments}")
        if self.window != "hann":
            raise ConfigError(f"unsupported window {self.window!r}; only 'hann' is implemented")
        if self.initial_state not in ("stationary", "zero"):
            raise ConfigError(f"initial_state must be 'stationary' or 'zero', got {self.initial_state!r}")
        if self.n_samples() < 2:
            raise ConfigError("duration/dt gives fewer than 2 samples")
        # reject active shapes the simulator cannot realise before any work happens
        if self.switches.classical_amplitude:
            _classical_column_scale(self.noise.amplitude, "classical_amplitude")
        if self.switches.classical_phase:
            _classical_column_scale(self.noise.phase, "classical_phase")

    def resolved_burn_in(self, d: DerivedParams) -> float:
        if self.burn_in is not None:
            return self.burn_in
        return 0.0 if self.initial_state == "stationary" else 10.0 / d.damping


def _classical_column_scale(shape, name: str):
    """(kind, level, corner) for a simulable classical shape, else ConfigError."""
    if isinstance(shape, ZeroNoise):
        return ("zero", 0.0, 0.0)
    if isinstance(shape, WhiteNoise):
        return ("white", shape.level, 0.0)
    if isinstance(shape, LorentzianNoise):
        return ("lorentzian", shape.level, shape.corner)
    raise ConfigError(
        f"unsupported {name} shape {type(shape).__name__} for time-domain synthesis; "
        "use zero, white or lorentzian"
    )


# ---------------------------------------------------------------------------
# model assembly

_QUANTUM_SOURCES = (
    "input_amplitude",
    "input_phase",
    "loss_amplitude",
    "loss_phase",
    "thermal_position",
    "thermal_momentum",
)


@dataclass
class _Model:
    a: np.ndarray                 # (n, n) drift, incl. classical shaping states
    b: np.ndarray                 # (n, m) noise columns, unit Wiener sources
    out_signal: np.ndarray        # (n,) state readout of the composed signal
    out_quadrature: np.ndarray    # (n,) state readout of the bare output quadrature
    feed_signal: np.ndarray       # (m,) direct Wiener feedthrough of the signal
    feed_quadrature: np.ndarray   # (m,) feedthrough of the bare output quadrature
    q_density: float              # demodulation-floor white channel density
    state_labels: tuple
    source_labels: tuple


def _build_model(d: DerivedParams, switches: NoiseSwitches, noise: NoiseModel) -> _Model:
    gamma, mu = d.coupler_decay, d.internal_decay
    sqrt_gamma = math.sqrt(gamma)
    labels = ["dX", "dY", "dQ", "dP"]
    n = 4
    columns = []  # (label, (target row, column scale), feed_signal, feed_quad)

    if switches.input_amplitude:
        columns.append(("input_amplitude", (0, sqrt_gamma), 0.0, 0.0))
    if switches.input_phase:
        columns.append(("input_phase", (1, sqrt_gamma), -1.0, -1.0))
    if switches.loss_amplitude:
        columns.append(("loss_amplitude", (0, math.sqrt(mu)), 0.0, 0.0))
    if switches.loss_phase:
        columns.append(("loss_phase", (1, math.sqrt(mu)), 0.0, 0.0))
    if switches.thermal_position:
        columns.append(
            ("thermal_position", (2, math.sqrt(d.damping / (3.0 * d.scaled_temperature))), 0.0, 0.0)
        )
    if switches.thermal_momentum:
        columns.append(
            ("thermal_momentum", (3, math.sqrt(4.0 * d.damping * d.scaled_temperature)), 0.0, 0.0)
        )

    # classical laser noise: white enters as a scaled column with (for phase
    # noise) a direct feedthrough; a lorentzian shape adds an exactly
    # integrated shaping state instead.
    phase_pickup = 2.0 * sqrt_gamma * d.cavity_amplitude / d.input_amplitude
    ou_specs = []  # (label, row_target, corner, drive_scale, out_signal_coeff)
    if switches.classical_amplitude:
        kind, level, corner = _classical_column_scale(noise.amplitude, "classical_amplitude")
        if kind == "white" and level > 0:
            columns.append(("classical_amplitude", (0, 2.0 * sqrt_gamma * math.sqrt(level)), 0.0, 0.0))
        elif kind == "lorentzian":
            ou_specs.append(("ou_amplitude", 0, corner, corner * math.sqrt(level), 0.0))
    if switches.classical_phase:
        kind, level, corner = _classical_column_scale(noise.phase, "classical_phase")
        if kind == "white" and level > 0:
            scale = math.sqrt(level)
            columns.append(
                ("classical_phase", (1, 2.0 * sqrt_gamma * scale), -phase_pickup * scale, 0.0)
            )
        elif kind == "lorentzian":
            ou_specs.append(("ou_phase", 1, corner, corner * math.sqrt(level), -phase_pickup))

    n_total = n + len(ou_specs)
    a = np.zeros((n_total, n_total))
    a[:4, :4] = drift_matrix(d)
    out_signal = np.zeros(n_total)
    out_quadrature = np.zeros(n_total)
    out_signal[1] = sqrt_gamma
    out_quadrature[1] = sqrt_gamma

    for k, (label, row_target, corner, drive_scale, out_coeff) in enumerate(ou_specs):
        idx = n + k
        labels.append(label)
        a[idx, idx] = -corner
        a[row_target, idx] = 2.0 * sqrt_gamma
        out_signal[idx] = out_coeff
        columns.append((label, (idx, drive_scale), 0.0, 0.0))

    m = len(columns)
    b = np.zeros((n_total, m))
    feed_signal = np.zeros(m)
    feed_quadrature = np.zeros(m)
    source_labels = []
    for j, (label, (row, scale), fs, fq) in enumerate(columns):
        b[row, j] = scale
        feed_signal[j] = fs
        feed_quadrature[j] = fq
        source_labels.append(label)

    q_density = 0.0
    if switches.input_phase:
        q_density += 0.5
    if switches.input_amplitude:
        q_density += 0.5 * ((gamma - mu) / (d.mod_index * (gamma + mu))) ** 2

    return _Model(
        a=a,
        b=b,
        out_signal=out_signal,
        out_quadrature=out_quadrature,
        feed_signal=feed_signal,
        feed_quadrature=feed_quadrature,
        q_density=q_density,
        state_labels=tuple(labels),
        source_labels=tuple(source_labels),
    )


# ---------------------------------------------------------------------------
# exact one-step statistics

@dataclass
class _Stepper:
    model: _Model
    dt: float
    f: np.ndarray                  # e^{A dt}
    g: np.ndarray                  # integral of e^{A s} ds over the step
    t_schur: np.ndarray            # upper-triangular Schur factor of f
    u_schur: np.ndarray            # unitary Schur basis
    mix: Optional[np.ndarray]      # Cholesky-like mixer of the sampled vector
    n_states: int
    n_sources: int
    v_rows: np.ndarray             # projections of the integrated noise, (k, n)
    feed_cols: np.ndarray          # indices of sources with direct feedthrough
    sig_row_y: np.ndarray          # out_signal @ g @ u_schur
    quad_row_y: np.ndarray         # out_quadrature @ g @ u_schur
    stationary_cov: np.ndarray     # stationary state covariance (Lyapunov)


def _van_loan(a_aug: np.ndarray, b_aug: np.ndarray, dt: float):
    na = a_aug.shape[0]
    block = np.zeros((2 * na, 2 * na))
    block[:na, :na] = -a_aug
    block[:na, na:] = b_aug @ b_aug.T
    block[na:, na:] = a_aug.T
    e = expm(block * dt)
    f_aug = e[na:, na:].T
    q_aug = f_aug @ e[:na, na:]
    return f_aug, 0.5 * (q_aug + q_aug.T)


def _psd_sqrt(sigma: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (sigma + sigma.T))
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals)


def _make_stepper(model: _Model, dt: float) -> _Stepper:
    n = model.a.shape[0]
    m = model.b.shape[1]

    # augmented system: state, its running integral, and the raw Wiener
    # increments of the sources; one Van Loan call yields every covariance
    # block the sampler needs.
    na = 2 * n + m
    a_aug = np.zeros((na, na))
    a_aug[:n, :n] = model.a
    a_aug[n:2 * n, :n] = np.eye(n)
    b_aug = np.zeros((na, m))
    b_aug[:n, :] = model.b
    b_aug[2 * n:, :] = np.eye(m)
    f_aug, q_aug = _van_loan(a_aug, b_aug, dt)
    f = f_aug[:n, :n]
    g = f_aug[n:2 * n, :n]

    feed_cols = np.flatnonzero(
        (model.feed_signal != 0.0) | (model.feed_quadrature != 0.0)
    )
    v_rows_list = [model.out_signal]
    if not np.array_equal(model.out_signal, model.out_quadrature):
        v_rows_list.append(model.out_quadrature)
    v_rows = np.stack(v_rows_list)

    mix = None
    if m > 0:
        k = v_rows.shape[0]
        reducer = np.zeros((n + k + feed_cols.size, na))
        reducer[:n, :n] = np.eye(n)
        reducer[n:n + k, n:2 * n] = v_rows
        for j, src in enumerate(feed_cols):
            reducer[n + k + j, 2 * n + src] = 1.0
        mix = _psd_sqrt(reducer @ q_aug @ reducer.T)

    t_schur, u_schur = schur(f, output="complex")

    if m > 0:
        stationary = solve_continuous_lyapunov(model.a, -model.b @ model.b.T)
        stationary = 0.5 * (stationary + stationary.T)
    else:
        stationary = np.zeros((n, n))

    return _Stepper(
        model=model,
        dt=dt,
        f=f,
        g=g,
        t_schur=t_schur,
        u_schur=u_schur,
        mix=mix,
        n_states=n,
        n_sources=m,
        v_rows=v_rows,
        feed_cols=feed_cols,
        sig_row_y=(model.out_signal @ g) @ u_schur,
        quad_row_y=(model.out_quadrature @ g) @ u_schur,
        stationary_cov=stationary,
    )


def _rng(master_seed: int, chunk: int, stream: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=(int(master_seed), int(chunk), int(stream))))
    )


def stationary_covariance(
    d: DerivedParams,
    switches: NoiseSwitches = NoiseSwitches(),
    noise: NoiseModel = NoiseModel(),
):
    """Analytic stationary state covariance (Lyapunov equation) and state labels."""
    model = _build_model(d, switches, noise)
    if model.b.shape[1] == 0:
        return model.state_labels, np.zeros((model.a.shape[0],) * 2)
    sigma = solve_continuous_lyapunov(model.a, -model.b @ model.b.T)
    return model.state_labels, 0.5 * (sigma + sigma.T)


def _initial_state(stepper: _Stepper, cfg: SimConfig, x0) -> np.ndarray:
    n = stepper.n_states
    if x0 is not None:
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (n,):
            raise ConfigError(f"initial state must have shape ({n},), got {x0.shape}")
        return x0
    if cfg.initial_state == "zero":
        return np.zeros(n)
    root = _psd_sqrt(stepper.stationary_cov)
    z = _rng(cfg.master_seed, 0, 2).standard_normal(n)
    return root @ z


def _stream(
    d: DerivedParams,
    cfg: SimConfig,
    need_states: bool,
    need_signal: bool,
    x0=None,
) -> Iterator[tuple]:
    """Yield (states, output_quadrature, signal) chunks after burn-in discard.

    Entries not requested are None.  Chunk boundaries, and hence the RNG
    layout, are fixed by CHUNK_SAMPLES regardless of the consumer.
    """
    cfg.validate(d)
    model = _build_model(d, cfg.switches, cfg.noise)
    stepper = _make_stepper(model, cfg.dt)
    n, m = stepper.n_states, stepper.n_sources
    k_v = stepper.v_rows.shape[0]
    t_mat, u_mat = stepper.t_schur, stepper.u_schur
    uh = u_mat.conj().T
    diag = np.diag(t_mat)
    dt = cfg.dt

    total = cfg.n_samples()
    burn = int(round(cfg.resolved_burn_in(d) / dt))
    y_carry = uh @ _initial_state(stepper, cfg, x0).astype(complex)

    feed_sig = model.feed_signal[stepper.feed_cols] / dt
    feed_quad = model.feed_quadrature[stepper.feed_cols] / dt
    q_sigma = math.sqrt(model.q_density / dt) if model.q_density > 0 else 0.0

    chunk_index = 0
    produced = 0
    while produced < total + burn:
        ncur = min(CHUNK_SAMPLES, total + burn - produced)
        if m > 0:
            z = _rng(cfg.master_seed, chunk_index, 0).standard_normal((ncur, stepper.mix.shape[0]))
            samples = z @ stepper.mix.T
            u_inc = samples[:, :n]
            v_proj = samples[:, n:n + k_v]
            dw = samples[:, n + k_v:]
        else:
            u_inc = np.zeros((ncur, n))
            v_proj = np.zeros((ncur, k_v))
            dw = np.zeros((ncur, 0))

        w_modes = u_inc.astype(complex) @ uh.T
        y_modes = np.empty((ncur, n), dtype=complex)
        for i in range(n - 1, -1, -1):
            forcing = w_modes[:, i]
            for j in range(i + 1, n):
                forcing = forcing + t_mat[i, j] * y_modes[:, j]
            seq = np.concatenate(([y_carry[i]], forcing[:-1]))
            y_modes[:, i] = lfilter([1.0], [1.0, -diag[i]], seq)
        y_carry = t_mat @ y_modes[-1] + w_modes[-1]

        states = None
        if need_states:
            states = np.real(y_modes @ u_mat.T)
            if not np.all(np.isfinite(states)):
                bad = int(np.argmin(np.isfinite(states).all(axis=1))) + produced
                raise SimulationError(f"non-finite state at step {bad} (t = {bad * dt:.6g} s)")

        quadrature = None
        signal = None
        if need_signal:
            state_avg_sig = (np.real(y_modes @ stepper.sig_row_y) + v_proj[:, 0]) / dt
            v_quad = v_proj[:, 1] if k_v == 2 else v_proj[:, 0]
            state_avg_quad = (np.real(y_modes @ stepper.quad_row_y) + v_quad) / dt
            quadrature = state_avg_quad + dw @ feed_quad
            signal = state_avg_sig + dw @ feed_sig
            if q_sigma > 0:
                signal = signal + _rng(cfg.master_seed, chunk_index, 1).normal(0.0, q_sigma, ncur)
            if not np.all(np.isfinite(signal)):
                bad = int(np.argmin(np.isfinite(signal))) + produced
                raise SimulationError(f"non-finite output at step {bad} (t = {bad * dt:.6g} s)")

        lo = max(burn - produced, 0)
        if lo < ncur:
            yield (
                states[lo:] if states is not None else None,
                quadrature[lo:] if quadrature is not None else None,
                signal[lo:] if signal is not None else None,
            )
        produced += ncur
        chunk_index += 1


# ---------------------------------------------------------------------------
# traces

@dataclass
class SimTrace:
    """Materialised realisation: exact state samples plus the composed signal.

    ``output`` is the bare output phase quadrature (cavity leakage minus the
    reflected vacuum); ``signal`` adds the demodulation-floor white channels
    and the classical phase pickup, normalised to the detection scale.
    """

    dt: float
    t0: float
    states: np.ndarray
    state_labels: tuple
    output: np.ndarray
    signal: np.ndarray
    master_seed: int

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.states.shape[0])

    def save(self, path) -> None:
        """Binary columnar dump (npz): header fields + column arrays."""
        np.savez(
            path,
            format_version=np.int64(1),
            dt=np.float64(self.dt),
            t0=np.float64(self.t0),
            master_seed=np.int64(self.master_seed),
            state_labels=np.array(self.state_labels),
            states=self.states,
            output=self.output,
            signal=self.signal,
        )

    @staticmethod
    def load(path) -> "SimTrace":
        with np.load(path, allow_pickle=False) as data:
            if int(data["format_version"]) != 1:
                raise ConfigError(f"unsupported trace format version {int(data['format_version'])}")
            return SimTrace(
                dt=float(data["dt"]),
                t0=float(data["t0"]),
                states=data["states"],
                state_labels=tuple(str(s) for s in data["state_labels"]),
                output=data["output"],
                signal=data["signal"],
                master_seed=int(data["master_seed"]),
            )


def integrate(d: DerivedParams, cfg: SimConfig, x0=None) -> SimTrace:
    """Exact-discretisation realisation of the driven system.

    ``x0`` overrides the configured initial state (state-space vector).
    Burn-in is discarded from the front; the trace is stationary from its
    first sample when the initial state is drawn from the stationary
    distribution.
    """
    keep = cfg.n_samples()
    if keep > cfg.max_trace_samples:
        raise ConfigError(
            f"trace of {keep} samples exceeds max_trace_samples = {cfg.max_trace_samples}; "
            "use the streaming consumers for long runs"
        )
    states, quads, signals = [], [], []
    for s, q, r in _stream(d, cfg, need_states=True, need_signal=True, x0=x0):
        states.append(s)
        quads.append(q)
        signals.append(r)
    burn = int(round(cfg.resolved_burn_in(d) / cfg.dt))
    return SimTrace(
        dt=cfg.dt,
        t0=burn * cfg.dt,
        states=np.concatenate(states),
        state_labels=_build_model(d, cfg.switches, cfg.noise).state_labels,
        output=np.concatenate(quads),
        signal=np.concatenate(signals),
        master_seed=cfg.master_seed,
    )


# ---------------------------------------------------------------------------
# Welch spectral estimation (two-sided, rad/s)

@dataclass
class PsdEstimate:
    """Two-sided PSD on an ascending rad/s grid (symmetric for real signals)."""

    omega: np.ndarray
    psd: np.ndarray
    n_segments: int
    segment_samples: int
    dt: float

    def band(self, omega_min: float, omega_max: float):
        """Bins with omega_min <= omega <= omega_max (positive side for positive bands)."""
        mask = (self.omega >= omega_min) & (self.omega <= omega_max)
        return self.omega[mask], self.psd[mask]


class _WelchAccumulator:
    """Streaming Welch: Hann window, 50% overlap, unit-density calibration.

    Normalised so a white input of two-sided density D (sample variance
    D/dt) estimates a flat spectrum at D on the angular-frequency grid.
    """

    def __init__(self, segment_samples: int, dt: float):
        if segment_samples < 64 or segment_samples % 2:
            raise ConfigError(f"segment of {segment_samples} samples is too short or odd")
        self.seg = segment_samples
        self.hop = segment_samples // 2
        self.dt = dt
        k = np.arange(segment_samples)
        self.win = 0.5 - 0.5 * np.cos(2.0 * np.pi * k / segment_samples)
        self.win_ssq = float(np.sum(self.win ** 2))
        self.buf = np.empty(0)
        self.psum = np.zeros(segment_samples // 2 + 1)
        self.count = 0

    def push(self, x: np.ndarray) -> None:
        self.buf = np.concatenate((self.buf, np.asarray(x, dtype=float)))
        while self.buf.size >= self.seg:
            spec = np.fft.rfft(self.buf[: self.seg] * self.win)
            self.psum += self.dt * (spec.real ** 2 + spec.imag ** 2) / self.win_ssq
            self.count += 1
            self.buf = self.buf[self.hop:].copy()

    def result(self) -> PsdEstimate:
        if self.count == 0:
            raise ConfigError("no complete Welch segment accumulated")
        half = self.psum / self.count
        seg = self.seg
        # mirror the positive half onto the negative frequencies (real input)
        psd = np.concatenate((half[1: seg // 2 + 1][::-1], half[: seg // 2]))
        omega = 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(seg, self.dt))
        return PsdEstimate(
            omega=omega, psd=psd, n_segments=self.count,
            segment_samples=seg, dt=self.dt,
        )


def _segment_samples(n_samples: int, n_segments: int) -> int:
    seg = (2 * n_samples) // (n_segments + 1)
    seg -= seg % 2
    return seg


def welch_psd(x: np.ndarray, dt: float, n_segments: int) -> PsdEstimate:
    """Two-sided Welch PSD of a sampled real signal, at least ``n_segments`` averages."""
    x = np.asarray(x, dtype=float)
    seg = _segment_samples(x.size, n_segments)
    if seg < 64:
        need = (n_segments + 1) * 32  # 64-sample segments at 50% overlap
        raise ConfigError(
            f"trace too short for {n_segments} Welch segments: {x.size} samples, "
            f"need at least {need} ({need * dt:.6g} s at dt = {dt:.3g} s)"
        )
    acc = _WelchAccumulator(seg, dt)
    acc.push(x)
    return acc.result()


def output_psd(trace: SimTrace, cfg: SimConfig) -> PsdEstimate:
    """Welch PSD of the trace's composed signal."""
    return welch_psd(trace.signal, trace.dt, cfg.n_segments)


def simulate_signal_psd(d: DerivedParams, cfg: SimConfig) -> PsdEstimate:
    """Streaming equivalent of integrate + output_psd with constant memory."""
    cfg.validate(d)
    kept = cfg.n_samples()
    seg = _segment_samples(kept, cfg.n_segments)
    if seg < 64:
        need = (cfg.n_segments + 1) * 32
        raise ConfigError(
            f"duration too short for {cfg.n_segments} Welch segments: {kept} samples, "
            f"need at least {need} ({need * cfg.dt:.6g} s)"
        )
    acc = _WelchAccumulator(seg, cfg.dt)
    for _, _, r in _stream(d, cfg, need_states=False, need_signal=True):
        acc.push(r)
    return acc.result()


# ---------------------------------------------------------------------------
# moments

@dataclass
class StateMoments:
    """Streaming first/second moments of the state vector with batch-mean errors."""

    state_labels: tuple
    mean: np.ndarray
    second: np.ndarray            # <x_i x_j>, not centred
    n_samples: int
    se_second_diag: np.ndarray    # batch-means standard error of diag(second)
    n_batches: int


def simulate_state_moments(d: DerivedParams, cfg: SimConfig, n_batches: int = 32) -> StateMoments:
    """Time-averaged state moments over the post-burn-in stream."""
    cfg.validate(d)
    model = _build_model(d, cfg.switches, cfg.noise)
    n = model.a.shape[0]
    total = np.zeros(n)
    second = np.zeros((n, n))
    batch_diag = []
    cur_sum = np.zeros(n)
    cur_sq = np.zeros(n)
    cur_count = 0
    count = 0
    batch_target = max(1, cfg.n_samples() // n_batches)
    for s, _, _ in _stream(d, cfg, need_states=True, need_signal=False):
        total += s.sum(axis=0)
        second += s.T @ s
        count += s.shape[0]
        cur_sum += s.sum(axis=0)
        cur_sq += (s * s).sum(axis=0)
        cur_count += s.shape[0]
        if cur_count >= batch_target:
            batch_diag.append(cur_sq / cur_count)
            cur_sum = np.zeros(n)
            cur_sq = np.zeros(n)
            cur_count = 0
    if cur_count > batch_target // 2 and cur_count > 0:
        batch_diag.append(cur_sq / cur_count)
    batches = np.asarray(batch_diag)
    nb = batches.shape[0]
    se = batches.std(axis=0, ddof=1) / math.sqrt(nb) if nb > 1 else np.full(n, np.nan)
    return StateMoments(
        state_labels=model.state_labels,
        mean=total / count,
        second=second / count,
        n_samples=count,
        se_second_diag=se,
        n_batches=nb,
    )


# ---------------------------------------------------------------------------
# standalone source synthesis (validation path, independent of the stepper)

def synthesize_noise(cfg: SimConfig, source: str, d: Optional[DerivedParams] = None) -> np.ndarray:
    """Sampled path of one driving source.

    Quantum and thermal sources are independent zero-mean white sequences
    with variance 1/dt per sample (unit two-sided density); the imaginary
    antisymmetric cross-correlations of the thermal pair symmetrise to
    zero, so the pair is generated independently.  Classical sources follow
    the declared shape; only zero, white and lorentzian shapes are
    simulable.
    """
    n = cfg.n_samples()
    dt = cfg.dt
    if source in _QUANTUM_SOURCES:
        idx = _QUANTUM_SOURCES.index(source)
        return _rng(cfg.master_seed, idx, 3).normal(0.0, math.sqrt(1.0 / dt), n)
    if source not in ("classical_amplitude", "classical_phase"):
        raise ConfigError(f"unknown noise source {source!r}")
    shape = cfg.noise.amplitude if source == "classical_amplitude" else cfg.noise.phase
    kind, level, corner = _classical_column_scale(shape, source)
    idx = 6 if source == "classical_amplitude" else 7
    rng = _rng(cfg.master_seed, idx, 3)
    if kind == "zero":
        return np.zeros(n)
    if kind == "white":
        return rng.normal(0.0, math.sqrt(level / dt), n)
    # lorentzian: exact one-step OU update, stationary start
    sigma = corner * math.sqrt(level)
    decay = math.exp(-corner * dt)
    step_sd = math.sqrt(sigma * sigma * (1.0 - decay * decay) / (2.0 * corner))
    s0 = rng.normal(0.0, math.sqrt(sigma * sigma / (2.0 * corner)))
    kicks = rng.normal(0.0, step_sd, n - 1) if n > 1 else np.empty(0)
    seq = np.concatenate(([s0], kicks))
    return lfilter([1.0], [1.0, -decay], seq)


# ---------------------------------------------------------------------------
# carrier-level demodulation floor

@dataclass(frozen=True)
class DemodConfig:
    """First-principles demodulation run: carrier and window in SI units."""

    carrier: float        # modulation angular frequency [rad/s]
    window_time: float    # demodulation averaging time [s]
    dt: float
    duration: float
    master_seed: int

    def n_samples(self) -> int:
        return int(round(self.duration / self.dt))

    def validate(self) -> None:
        if self.carrier * self.window_time < 20.0 * math.pi:
            raise ConfigError(
                "carrier * window_time must be >> 2 pi (>= 10 cycles); got "
                f"{self.carrier * self.window_time / (2 * math.pi):.3g} cycles"
            )
        nyq_period = 2.0 * math.pi / (2.0 * self.carrier)
        if self.dt > nyq_period / 8.0:
            raise ConfigError(
                f"dt = {self.dt:.3g} s aliases the second harmonic; need dt <= "
                f"{nyq_period / 8.0:.3g} s"
            )
        if self.duration < 20.0 * self.window_time:
            raise ConfigError("duration must cover at least 20 demodulation windows")


@dataclass
class DemodFloorResult:
    """Demodulation-floor channel paths and their empirical autocorrelations."""

    q1: np.ndarray
    q2: np.ndarray
    lags: np.ndarray          # seconds, 0 .. 2 * window_time
    acf_q1: np.ndarray
    acf_q2: np.ndarray
    coarse_lags: np.ndarray   # lag subset with batch-means errors
    coarse_acf_q1: np.ndarray
    coarse_acf_q2: np.ndarray
    se_q1: np.ndarray
    se_q2: np.ndarray
    q1_density: float         # integral of acf_q1 over all lags
    q2_density: float
    window_time: float
    dt: float


def _acf_fft(x: np.ndarray, max_lag: int) -> np.ndarray:
    n = x.size
    nfft = 1 << int(np.ceil(np.log2(n + max_lag + 1)))
    spec = np.fft.rfft(x, nfft)
    corr = np.fft.irfft(spec.real ** 2 + spec.imag ** 2, nfft)[: max_lag + 1]
    return corr / (n - np.arange(max_lag + 1))


def _batched_acf(x: np.ndarray, lags: np.ndarray, n_batches: int = 16):
    edges = np.linspace(0, x.size, n_batches + 1, dtype=int)
    vals = np.empty((n_batches, lags.size))
    for b in range(n_batches):
        seg = x[edges[b]: edges[b + 1]]
        for i, lag in enumerate(lags):
            vals[b, i] = np.mean(seg[: seg.size - lag] * seg[lag:]) if seg.size > lag else np.nan
    mean = np.nanmean(vals, axis=0)
    se = np.nanstd(vals, axis=0, ddof=1) / math.sqrt(n_batches)
    return mean, se


def demodulation_floor_sim(d: DerivedParams, cfg: DemodConfig) -> DemodFloorResult:
    """Simulate the windowed demodulation integrals against synthetic vacuum.

    The two channels are the broadband vacuum picked up at the carrier
    (amplitude quadrature, weight beta - sqrt(gamma) alpha) and at twice the
    carrier (phase quadrature, weight eps beta).  Their autocorrelations are
    triangular with support one window wide.
    """
    cfg.validate()
    n = cfg.n_samples()
    j = int(round(cfg.window_time / cfg.dt))
    if j < 8:
        raise ConfigError("window_time must span at least 8 samples")
    dt = cfg.dt
    t = np.arange(n) * dt
    dwx = _rng(cfg.master_seed, 0, 4).normal(0.0, math.sqrt(dt), n)
    dwy = _rng(cfg.master_seed, 1, 4).normal(0.0, math.sqrt(dt), n)

    amp_q1 = d.input_amplitude - math.sqrt(d.coupler_decay) * d.cavity_amplitude
    amp_q2 = d.mod_index * d.input_amplitude

    def windowed(phasor_freq: float, dw: np.ndarray) -> np.ndarray:
        z = np.exp(-1j * phasor_freq * t) * dw
        csum = np.concatenate(([0.0 + 0.0j], np.cumsum(z)))
        return csum[j:] - csum[:-j]

    q1 = -(amp_q1 / cfg.window_time) * np.real(1j * windowed(cfg.carrier, dwx))
    q2 = (amp_q2 / cfg.window_time) * np.real(windowed(2.0 * cfg.carrier, dwy))

    max_lag = 2 * j
    acf_q1 = _acf_fft(q1, max_lag)
    acf_q2 = _acf_fft(q2, max_lag)
    coarse = np.unique(np.concatenate((np.arange(0, max_lag + 1, max(1, j // 8)), [j, max_lag])))
    c1, se1 = _batched_acf(q1, coarse)
    c2, se2 = _batched_acf(q2, coarse)

    lags = np.arange(max_lag + 1) * dt
    return DemodFloorResult(
        q1=q1,
        q2=q2,
        lags=lags,
        acf_q1=acf_q1,
        acf_q2=acf_q2,
        coarse_lags=coarse * dt,
        coarse_acf_q1=c1,
        coarse_acf_q2=c2,
        se_q1=se1,
        se_q2=se2,
        q1_density=float(np.trapezoid(np.concatenate((acf_q1[:0:-1], acf_q1)), dx=dt)),
        q2_density=float(np.trapezoid(np.concatenate((acf_q2[:0:-1], acf_q2)), dx=dt)),
        window_time=cfg.window_time,
        dt=dt,
    )
