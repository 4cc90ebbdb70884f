"""Position-measurement error vs laser power.

Shot noise falls as 1/P, the photon back-action grows as P, thermal noise
is flat; the back-action and thermal contributions are a factor Q^2 larger
at the mechanical resonance than at dc.  Writes the sweep as CSV and a
log-log figure with the dc curve dashed and the resonance curve dash-dot.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mirrornoise import (
    derive,
    figure2_sweep,
    load_params,
    shot_backaction_crossing_power,
)
from mirrornoise.measurement import BUDGET_CSV_HEADER, budget_csv_rows

HERE = pathlib.Path(__file__).parent
OUT = HERE / "output"
OUT.mkdir(exist_ok=True)

d = derive(load_params(HERE / "params" / "reference.params"))
tau = 300.0
powers = np.geomspace(1e-6, 1.0, 61)
budgets = figure2_sweep(d, powers, measurement_time=tau)
(OUT / "error_budget_sweep.csv").write_text(
    "\n".join([BUDGET_CSV_HEADER] + budget_csv_rows(budgets)) + "\n"
)
print(f"wrote {OUT / 'error_budget_sweep.csv'}")

dc = [b for b in budgets if b.omega == 0.0]
res = [b for b in budgets if b.omega != 0.0]

fig, ax = plt.subplots(figsize=(7, 5))
ax.loglog(powers, [np.sqrt(b.total) for b in dc], "--", label="constant displacement")
ax.loglog(powers, [np.sqrt(b.total) for b in res], "-.", label="at the mirror resonance")
ax.set_xlabel("laser power [W]")
ax.set_ylabel(f"position error [m] ({tau:.0f} s measurement)")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "error_budget_sweep.png", dpi=150)
print(f"wrote {OUT / 'error_budget_sweep.png'}")

for omega, label in ((0.0, "dc"), (d.omega_mirror, "resonance")):
    crossing = shot_backaction_crossing_power(d, omega, tau)
    print(f"shot/back-action crossing at {label}: {crossing:.4g} W")
