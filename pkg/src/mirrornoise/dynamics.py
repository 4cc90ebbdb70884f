"""Linearised four-state cavity/mirror dynamics and its frequency-domain solution.

State ordering is (dX, dY, dQ, dP): cavity amplitude and phase quadrature
fluctuations, then scaled mirror position and momentum.  The frequency
domain uses the e^{+i omega t} forward transform, so the transfer matrix is
the resolvent (-i omega I - A)^{-1}.  Two independent routes to that matrix
are provided; their agreement is the central anti-transcription check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import DerivedParams

STATE_LABELS = ("dX", "dY", "dQ", "dP")


def drift_matrix(d: DerivedParams) -> np.ndarray:
    """Real 4x4 drift matrix of the linearised Langevin system, entries in 1/s."""
    kappa = d.half_linewidth
    nu = d.omega_mirror
    coupling = d.scaled_coupling * d.cavity_amplitude
    a = np.zeros((4, 4))
    a[0, 0] = -kappa
    a[1, 1] = -kappa
    a[1, 2] = coupling
    a[2, 3] = nu
    a[3, 0] = coupling
    a[3, 2] = -nu
    a[3, 3] = -d.damping
    return a


@dataclass(frozen=True)
class TransferMatrix:
    """Frequency-domain solution x(omega) = matrix @ noise(omega) at one omega."""

    omega: float
    matrix: np.ndarray      # complex 4x4
    denominator: complex    # common denominator of the closed-form entries


def denominator(d: DerivedParams, omega: float) -> complex:
    """Common denominator of the closed-form transfer-matrix entries."""
    kappa = d.half_linewidth
    nu = d.omega_mirror
    gamma_m = d.damping
    c = kappa - 1j * omega
    mech = nu * nu - omega * omega - 1j * gamma_m * omega
    return c * c * mech


def abs2_denominator(d: DerivedParams, omega) -> np.ndarray:
    """|denominator|^2, evaluated in its explicitly even, nonnegative form."""
    omega = np.asarray(omega, dtype=float)
    kappa2 = d.half_linewidth ** 2
    nu2 = d.omega_mirror ** 2
    w2 = omega * omega
    return (kappa2 + w2) ** 2 * ((nu2 - w2) ** 2 + d.damping ** 2 * w2)


def transfer_closed_form(d: DerivedParams, omega: float) -> TransferMatrix:
    """Transfer matrix from the closed-form entries over the common denominator."""
    kappa = d.half_linewidth
    nu = d.omega_mirror
    gamma_m = d.damping
    ca = d.scaled_coupling * d.cavity_amplitude
    c = kappa - 1j * omega
    mech = nu * nu - omega * omega - 1j * gamma_m * omega
    den = c * c * mech
    if den == 0:
        # poles sit strictly off the real axis for positive damping
        raise AssertionError("transfer denominator vanished on the real axis")
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = c * mech
    m[1, 1] = c * mech
    m[1, 0] = ca * ca * nu
    m[1, 2] = ca * (gamma_m - 1j * omega) * c
    m[1, 3] = ca * nu * c
    m[2, 0] = ca * nu * c
    m[2, 2] = (gamma_m - 1j * omega) * c * c
    m[2, 3] = nu * c * c
    m[3, 2] = -nu * c * c
    m[3, 0] = -1j * ca * omega * c
    m[3, 3] = -1j * omega * c * c
    return TransferMatrix(omega=float(omega), matrix=m / den, denominator=den)


def transfer_numeric(d: DerivedParams, omega: float) -> TransferMatrix:
    """Transfer matrix by direct inversion of (-i omega I - A)."""
    a = drift_matrix(d)
    b = -1j * omega * np.eye(4) - a
    det = np.linalg.det(b)
    if det == 0:
        raise AssertionError("(-i omega I - A) singular despite positive damping")
    return TransferMatrix(omega=float(omega), matrix=np.linalg.inv(b), denominator=det)
