"""Stability phase diagram in the (drive power, magnon detuning) plane.

A coarse grid keeps this under a few seconds.  ``kerrmagno sweep --preset
fig2`` runs the full 200 x 200 version and writes CSV.
"""

# %%
import numpy as np

from kerrmagno import Axis, SweepSpec, reference_params, run_sweep

spec = SweepSpec(
    axes=(Axis("drive_power", 1e-3, 200e-3, 40),
          Axis("delta_m_over_omega_b", -1.2, 0.0, 24)),
    base=reference_params(),
    task="classify",
)
result = run_sweep(spec)

# %% Text rendering: rows are detunings, columns drive powers.
glyph = {"1S0U": ".", "2S1U": "B", "0S1U": "~", "1S2U": "x", "degenerate": "?"}
P, dm = result.coordinates
regions = result.regions
print("Delta_m/omega_b   P_d: 1 mW -> 200 mW")
for j in range(len(dm) - 1, -1, -1):
    print(f"{dm[j]:+6.2f}  " + "".join(glyph.get(r, "!") for r in regions[:, j]))
print("\n. one stable root   B bistable (2S1U)   x one of three stable (1S2U)"
      "   ~ no stable root (0S1U)")

# %% Counts per region
labels, counts = np.unique(regions, return_counts=True)
for lab, n in zip(labels, counts):
    print(f"{lab:>10s}: {n}")
