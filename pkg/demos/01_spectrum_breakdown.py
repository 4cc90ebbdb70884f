"""Per-term noise spectrum of the demodulated phase signal.

Evaluates every contribution (detector floor, back-action, internal loss,
classical laser noise, thermal motion) over a log frequency grid at the
lab-scale configuration and plots the budget.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mirrornoise import NoiseModel, WhiteNoise, derive, evaluate, load_params

HERE = pathlib.Path(__file__).parent
OUT = HERE / "output"
OUT.mkdir(exist_ok=True)

d = derive(load_params(HERE / "params" / "reference.params"))
print(f"mirror damping      {d.damping:.4g} 1/s (quality {d.quality:.3g})")
print(f"scaled temperature  {d.scaled_temperature:.4g}")
print(f"cavity finesse      {d.finesse:.4g}")

omega = np.geomspace(d.damping / 10, 10 * d.half_linewidth, 1200)
noise = NoiseModel(amplitude=WhiteNoise(1e-2), phase=WhiteNoise(1e-2))
bd = evaluate(d, omega, noise=noise)

fig, ax = plt.subplots(figsize=(7, 5))
for name, label in [
    ("shot", "detector floor"),
    ("back_action", "radiation-pressure back-action"),
    ("internal_loss", "internal losses"),
    ("amplitude_noise", "classical amplitude noise"),
    ("phase_noise", "classical phase noise"),
    ("thermal_T", "thermal motion"),
    ("thermal_correction", "low-T damping correction"),
]:
    ax.loglog(omega, np.maximum(bd.part(name), 1e-30), label=label, lw=1)
ax.loglog(omega, bd.total, "k", lw=2, label="total")
ax.set_xlabel("angular frequency [rad/s]")
ax.set_ylabel("normalized signal PSD")
ax.set_ylim(1e-12, 10 * bd.total.max())
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "spectrum_breakdown.png", dpi=150)
print(f"wrote {OUT / 'spectrum_breakdown.png'}")

rows = ["omega_rad_s," + ",".join(bd.PART_NAMES) + ",total"]
for i in range(omega.size):
    rows.append(",".join(
        format(v, ".16e")
        for v in [omega[i], *(bd.part(n)[i] for n in bd.PART_NAMES), bd.total[i]]
    ))
(OUT / "spectrum_breakdown.csv").write_text("\n".join(rows) + "\n")
print(f"wrote {OUT / 'spectrum_breakdown.csv'}")
