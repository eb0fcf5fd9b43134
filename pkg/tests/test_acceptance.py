"""Acceptance criteria, one test each; every test records a PASS/FAIL line."""

import math

import numpy as np
import pytest
from scipy import ndimage

from conftest import ACCEPTANCE_LINES
from jacobian import entrywise_relative_error, numerical_jacobian
from kerrmagno import dynamics, sweep
from kerrmagno.gaussian import (anisotropy, diffusion_matrix, log_negativity,
                                steady_covariance, wigner_field)
from kerrmagno.params import reference_params
from kerrmagno.stability import classify_phase, drift_matrix
from kerrmagno.steady import MeanState, bistable_power_window

MW = 1e-3


def record(n, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_01_bistable_window():
    lo, hi = bistable_power_window(reference_params())
    ok = abs(lo / (13.84 * MW) - 1) <= 0.01 and abs(hi / (81.94 * MW) - 1) <= 0.01
    record(1, "bistable power window", ok,
           f"({lo / MW:.3f}, {hi / MW:.3f}) mW vs (13.84, 81.94) mW +-1%")


def test_02_critical_power():
    def lead(P):
        phase = classify_phase(reference_params(drive_power=P))
        assert phase.n_roots == 1
        return phase.reports[0].max_real_part

    lo, hi = 82 * MW, 200 * MW
    assert lead(lo) < 0 < lead(hi)
    while hi - lo > 1e-6 * MW:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if lead(mid) < 0 else (lo, mid)
    pc = 0.5 * (lo + hi)
    ok = abs(pc / (126.34 * MW) - 1) <= 0.02
    record(2, "critical power by bisection", ok, f"P_c = {pc / MW:.3f} mW vs 126.34 mW +-2%")


def test_03_hopf_limit_cycle():
    p = reference_params(drive_power=130 * MW)
    phase = classify_phase(p)
    rep = phase.reports[0]
    ev = rep.eigenvalues
    lead = ev[0]
    pair = lead.imag != 0 and np.any(np.isclose(ev, lead.conjugate(), rtol=1e-12))
    traj = dynamics.integrate_mean_field(p, dynamics.perturb(rep.mean_state), 600 * p.tau)
    lc = dynamics.detect_limit_cycle(traj, 300 * p.tau)
    ok = phase.n_roots == 1 and not rep.stable and rep.hopf_like and pair and lc.periodic
    record(3, "Hopf signature and limit cycle at 130 mW", ok,
           f"lead eigenvalue {lead / p.omega_b:.4f} omega_b, periodic={lc.periodic}, "
           f"period={lc.period / p.tau:.4f} tau")


def test_04_lyapunov_vs_integration():
    cases = [(50, "lower"), (50, "upper"), (100, "upper")]
    errors = []
    for P, branch in cases:
        p = reference_params(drive_power=P * MW)
        state, stable = dynamics.select_fixed_point(p, branch)
        assert stable
        V_inf = steady_covariance(drift_matrix(p, state), diffusion_matrix(p))
        traj = dynamics.integrate_covariance(p, state, None, (0.0, 500 * p.tau),
                                             tol=1e-11, t_eval=[500 * p.tau])
        errors.append(np.linalg.norm(traj.cov[-1] - V_inf) / np.linalg.norm(V_inf))
    ok = max(errors) <= 1e-6
    record(4, "steady covariance vs 500 tau integration", ok,
           "relative Frobenius errors " + ", ".join(f"{e:.2e}" for e in errors)
           + " vs 1e-6")


def test_05_drift_matrix_jacobian():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        p = reference_params(drive_power=rng.uniform(1, 200) * MW,
                             delta_m_over_omega_b=rng.uniform(-1.2, 0.0))
        scale = 10 ** rng.uniform(6, 7.7)
        c = lambda s: complex(*(rng.normal(size=2) * s))
        state = MeanState(c(scale / 3), c(scale), c(1e5))
        A = drift_matrix(p, state).matrix
        worst = max(worst, entrywise_relative_error(A, numerical_jacobian(p, state)))
    record(5, "drift matrix equals central-difference Jacobian", worst <= 1e-6,
           f"worst entrywise relative deviation {worst:.2e} over 100 states vs 1e-6")


def _tmsv(r):
    c, s = math.cosh(2 * r) / 2, math.sinh(2 * r) / 2
    V = np.zeros((4, 4))
    V[:2, :2] = V[2:, 2:] = c * np.eye(2)
    V[:2, 2:] = V[2:, :2] = s * np.diag([1.0, -1.0])
    return V


def test_06_entanglement_properties():
    p50 = reference_params(drive_power=50 * MW)
    phase = classify_phase(p50)
    low, up = phase.reports[0].mean_state, phase.reports[2].mean_state
    e_low = dynamics.steady_entanglement(p50, low)
    e_up = dynamics.steady_entanglement(p50, up)
    a = e_low > 0 and e_up > 0

    lo, _ = bistable_power_window(p50)
    powers = np.arange(math.ceil(lo / MW), 200) * MW
    upper = []
    for P in powers:
        p = reference_params(drive_power=P)
        state, stable = dynamics.select_fixed_point(p, "upper")
        if not stable:
            break
        upper.append((P, dynamics.steady_entanglement(p, state)))
    P_last = upper[-1][0]
    P_max = max(upper, key=lambda x: x[1])[0]
    b = P_max == P_last

    phonon = [dynamics.steady_entanglement(p50, s, pair) for s in (low, up)
              for pair in (("magnon", "phonon"), ("cavity", "phonon"))]
    c = all(v == 0.0 for v in phonon)

    d_err = max(abs(log_negativity(_tmsv(r)) - 2 * r) for r in (0.1, 0.5, 1.0, 2.0))
    d = d_err <= 1e-9
    record(6, "entanglement properties (a)-(d)", a and b and c and d,
           f"(a) E_am lower={e_low:.4f} upper={e_up:.4f}; (b) max at {P_max / MW:.0f} mW, "
           f"last stable {P_last / MW:.0f} mW; (c) phonon pairs {max(phonon):.1e}; "
           f"(d) TMSV error {d_err:.1e}")


def test_07_wigner():
    vac = wigner_field(np.eye(2) / 2, n=201)
    peak = vac.values[100, 100]
    p = reference_params(drive_power=130 * MW)
    state, _ = dynamics.select_fixed_point(p, "upper")
    times = np.array([30.0, 60.0, 90.0]) * p.tau
    traj = dynamics.integrate_covariance(p, dynamics.perturb(state), None, (0.0, times[-1]),
                                         t_eval=times)
    blocks = [V[2:4, 2:4] for V in traj.cov]
    norms = [wigner_field(g).integral() for g in blocks] + [vac.integral()]
    ratios = [anisotropy(g) for g in blocks]
    ok = (all(abs(x - 1) <= 1e-3 for x in norms) and abs(peak - 1 / math.pi) <= 1e-12
          and ratios[0] < ratios[1] < ratios[2])
    record(7, "Wigner normalisation, vacuum peak, growing anisotropy", ok,
           f"integrals {min(norms):.5f}..{max(norms):.5f}; peak*pi={peak * math.pi:.12f}; "
           f"anisotropy " + " -> ".join(f"{r:.4f}" for r in ratios))


def _nearest_other(regions, idx, other):
    i, j = idx
    hits = np.argwhere(regions == other)
    return int(np.abs(hits - [i, j]).max(axis=1).min()) if len(hits) else None


def test_08_phase_diagram_structure():
    classify = sweep.run_sweep(sweep.preset("fig2"))
    regions = classify.regions
    labels = set(regions.ravel())
    four = labels == {"1S0U", "2S1U", "0S1U", "1S2U"}
    three = np.vectorize(lambda pt: len(pt.intensities) == 3, otypes=[bool])(
        np.array(classify.points, dtype=object).reshape(classify.shape))
    _, n_comp = ndimage.label(three, structure=np.ones((3, 3)))

    emap = sweep.run_sweep(sweep.preset("fig5"))
    E = emap.e_am
    idx = np.unravel_index(np.nanargmax(E), E.shape)
    label = emap.regions[idx]
    other = {"1S0U": "0S1U", "0S1U": "1S0U"}.get(label)
    dist = _nearest_other(emap.regions, idx, other) if other else None
    on_boundary = dist is not None and dist <= 1
    P, dm = (g[k] for g, k in zip(emap.coordinates, idx))
    ok = four and n_comp == 1 and on_boundary
    record(8, "phase diagram labels, connected tongue, E_am maximum on 1S0U/0S1U boundary", ok,
           f"labels {sorted(labels)}; three-root components {n_comp}; max E_am={E[idx]:.4f} "
           f"at P={P / MW:.1f} mW, Delta_m={dm:.3f} omega_b in {label}, "
           f"{dist} cells from {other}")


def test_09_determinism(tmp_path):
    axes = (sweep.Axis("drive_power", 100 * MW, 140 * MW, 5),
            sweep.Axis("delta_m_over_omega_b", -0.9, -0.7, 4))
    files = []
    for w in (1, 4):
        spec = sweep.SweepSpec(axes, reference_params(), "entangle", workers=w)
        files.append(sweep.run_sweep(spec).write(tmp_path / f"w{w}"))
    same = all(a.read_bytes() == b.read_bytes() for a, b in zip(*files))
    record(9, "sweep output identical for 1 and 4 workers", same,
           f"{len(files[0])} files compared byte-for-byte")


def test_10_no_chaos():
    axes = (sweep.Axis("drive_power", 10 * MW, 200 * MW, 5),
            sweep.Axis("delta_m_over_omega_b", -1.2, 0.0, 4))
    res = sweep.run_sweep(sweep.SweepSpec(axes, reference_params(), "dynamics"))
    lam = res.field("lyapunov")
    ok = np.all(np.isfinite(lam)) and lam.max() <= 1e-3
    record(10, "largest Lyapunov exponent <= 0 over 20 points", ok,
           f"max lambda = {np.nanmax(lam):.2e} omega_b (tolerance 1e-3); regions "
           f"{sorted(set(res.regions.ravel()))}")
