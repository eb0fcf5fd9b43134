"""Magnon bistability in a Kerr-modified cavity magnomechanical system.

Run with ``python demos/01_bistability.py``.  Everything is printed; no
plotting library is needed.
"""

# %% Reference parameters
# A 10 GHz cavity couples to a YIG magnon mode (g_ma/2pi = 3.2 MHz) that is
# driven at power P_d and talks to a 10 MHz phonon.  Detunings are quoted in
# units of the phonon frequency omega_b.
from kerrmagno import (bistable_power_window, classify_phase, critical_drive, derive,
                       reference_params, switching_points)
from kerrmagno.params import drive_power_from_amplitude

p = reference_params(drive_power=50e-3)
dp = derive(p)
print(f"eta = {dp.eta:.6f}   Delta_0 = {dp.delta_0 / p.omega_b:+.5f} omega_b   "
      f"kappa_0/2pi = {dp.kappa_0 / 6.283185307179586e6:.5f} MHz")
print(f"K' = {dp.kerr_eff:.4e} rad/s   n_th = {dp.n_th:.3f}   Omega = {dp.drive_amp:.4e}")

# %% Where do three fixed points coexist?
# The intensity I = |<m>|^2 obeys a cubic.  Its three-root condition gives a
# closed window in drive power.
lo, hi = bistable_power_window(p)
print(f"\nbistable window: {lo * 1e3:.3f} mW .. {hi * 1e3:.3f} mW")

I_minus, I_plus = switching_points(dp)
print(f"turning points: I- = {I_minus:.4e}, I+ = {I_plus:.4e}")

# The closed-form "critical drive" is a different quantity; compare:
oc = critical_drive(dp)
print(f"closed-form critical drive {oc:.4e} "
      f"(= {drive_power_from_amplitude(oc, p.omega_d, p.kappa_m) * 1e3:.1f} mW)")

# %% The S-curve
# Walk up in power and list every fixed point with its stability.
print("\n P [mW]  region   roots (intensity : status)")
for P_mw in (5, 13, 14, 30, 50, 80, 82, 100, 126, 127, 150):
    phase = classify_phase(p.replace(drive_power=P_mw * 1e-3))
    roots = "  ".join(f"{r.mean_state.intensity:.3e}:{r.status[0]}" for r in phase.reports)
    print(f"{P_mw:7.1f}  {phase.region:7s}  {roots}")

# Past ~126 mW the single fixed point loses stability through a complex
# eigenvalue pair (see 03_limit_cycle.py).
