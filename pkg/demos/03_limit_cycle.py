"""Beyond the critical power: Hopf instability and a stable limit cycle."""

# %%
import numpy as np

from kerrmagno import (classify_phase, detect_limit_cycle, integrate_mean_field,
                       max_lyapunov_exponent, perturb, reference_params)

p = reference_params(drive_power=130e-3)
tau = p.tau
(rep,) = classify_phase(p).reports
print("eigenvalues / omega_b:")
for ev in rep.eigenvalues:
    print(f"   {ev.real / p.omega_b:+.5f} {ev.imag / p.omega_b:+.5f}i")
print(f"status: {rep.status}, Hopf-like: {rep.hopf_like}")

# %% Kick the unstable point and watch the oscillation grow and saturate.
# The growth rate is Re(lambda) ~ 0.005 omega_b, i.e. one e-fold every ~35 tau,
# so saturation from a 1e-3 kick takes a few hundred tau.
traj = integrate_mean_field(p, perturb(rep.mean_state), 600 * tau)
I0 = rep.mean_state.intensity
for t_mark in (50, 150, 250, 350, 450, 550):
    win = (traj.t_tau > t_mark) & (traj.t_tau < t_mark + 10)
    x = traj.intensity[win] / I0
    print(f"t = {t_mark:3d}..{t_mark + 10} tau   |m|^2 / I_fp in [{x.min():.4f}, {x.max():.4f}]")

lc = detect_limit_cycle(traj, transient_cut=300 * tau)
print(f"\nperiodic: {lc.periodic}, period = {lc.period / tau:.4f} tau, "
      f"peak-to-peak = {lc.amplitude / I0:.3f} I_fp")

# %% Regular, not chaotic: the largest Lyapunov exponent of the cycle is ~0.
est = max_lyapunov_exponent(p, perturb(rep.mean_state), 500 * tau, tau, transient=400 * tau)
print(f"lambda_max = {est.rate_over_omega_b:+.2e} omega_b")

stable = reference_params(drive_power=50e-3)
low = classify_phase(stable).reports[0].mean_state
est = max_lyapunov_exponent(stable, low, 500 * tau, tau)
print(f"lower branch at 50 mW: lambda_max = {est.rate_over_omega_b:+.2e} omega_b")
