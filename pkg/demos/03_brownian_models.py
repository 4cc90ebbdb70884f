"""Lindblad-form vs standard Brownian damping in the signal spectrum.

A stationary, commuting output forces an even spectrum.  The standard
damping model instead produces a term odd in frequency; the corrected
(Lindblad-form) model replaces it with a small 1/T term that only
dominates below a crossover temperature shown here as a function of
frequency.
"""

import math
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mirrornoise import derive, diosi_crossover_temperature, evaluate, load_params

HERE = pathlib.Path(__file__).parent
OUT = HERE / "output"
OUT.mkdir(exist_ok=True)

d = derive(load_params(HERE / "params" / "reference.params"))
nu = d.omega_mirror

omega = np.linspace(-2 * nu, 2 * nu, 2001)
even = evaluate(d, omega, thermal="cbmme")
odd = evaluate(d, omega, thermal="sbmme")

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
axes[0].semilogy(omega / nu, even.total, label="corrected model (even)")
axes[0].semilogy(omega / nu, odd.total, "--", label="standard model")
axes[0].set_xlabel("frequency / mirror frequency")
axes[0].set_ylabel("normalized signal PSD")
axes[0].legend(fontsize=8)

asym = odd.total - odd.total[::-1]
axes[1].plot(omega / nu, asym)
axes[1].set_xlabel("frequency / mirror frequency")
axes[1].set_ylabel("total(w) - total(-w)")
axes[1].set_title("odd-in-frequency artifact of the standard model", fontsize=9)
fig.tight_layout()
fig.savefig(OUT / "brownian_models.png", dpi=150)
print(f"wrote {OUT / 'brownian_models.png'}")

bd = evaluate(d, nu)
print(f"thermal term / low-T correction at resonance: {bd.thermal_T / bd.thermal_correction:.3e}")

print("\ncrossover temperature where the low-T correction starts to dominate:")
for freq_hz in (1e6, 1e9, 5e9, 1e11):
    tstar = diosi_crossover_temperature(d.damping, 2 * math.pi * freq_hz)
    print(f"  at {freq_hz:9.3g} Hz: T* = {tstar:.4g} K")
