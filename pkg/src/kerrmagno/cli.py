"""Command-line front end: ``kerrmagno steady|dynamics|entangle|sweep``.

Exit codes: 0 success, 1 numerical failure, 2 configuration error,
3 no stationary Gaussian state (use ``entangle --kind dynamic``).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import dynamics, gaussian, steady, sweep
from .errors import (ConfigError, DomainError, InsufficientDataError, IntegrationError,
                     NoStationaryStateError, NumericalError)
from .params import FIELDS, derive, load_params, params_to_dict, reference_params
from .stability import classify_fixed_point, classify_phase, drift_matrix

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG, EXIT_NO_STATIONARY = 0, 1, 2, 3

OUT_ENV = "KERRMAGNO_OUT"
WORKERS_ENV = "KERRMAGNO_WORKERS"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_json(path: Path, payload: dict):
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _parse_override(text: str):
    key, sep, value = text.partition("=")
    if not sep:
        raise ConfigError(f"--set expects key=value, got {text!r}", key=text)
    key = key.strip()
    if key not in FIELDS:
        raise ConfigError(f"unknown parameter {key!r}", key=key)
    try:
        return key, float(value)
    except ValueError:
        raise ConfigError(f"parameter {key!r} needs a number, got {value!r}", key=key)


def resolve_params(args):
    params = load_params(args.params) if args.params else reference_params()
    overrides = dict(_parse_override(s) for s in args.set or ())
    if "delta_m_over_omega_b" in vars(args) and args.delta_m_over_omega_b is not None:
        params = params.with_detunings(delta_m=args.delta_m_over_omega_b * params.omega_b)
    if args.power_mw is not None:
        overrides["drive_power"] = args.power_mw * 1e-3
    try:
        return params.replace(**overrides) if overrides else params
    except DomainError as exc:
        raise ConfigError(str(exc), key=",".join(overrides)) from exc


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}", key="out")
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable", key="out")
    return out


def _workers(args) -> int:
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1", key="workers")
        return args.workers
    try:
        return sweep.default_workers()
    except DomainError as exc:
        raise ConfigError(str(exc), key=WORKERS_ENV) from exc


def _config(args, params) -> dict:
    opts = {k: v for k, v in vars(args).items() if k not in ("func", "params_obj")}
    return {"command": args.command, "options": opts, "params": params_to_dict(params)}


def _report(rep) -> dict:
    s = rep.mean_state
    return {
        "intensity": s.intensity,
        "a_mean": s.a_mean, "m_mean": s.m_mean, "b_mean": s.b_mean,
        "eigenvalues": rep.eigenvalues,
        "max_real_part": rep.max_real_part,
        "status": rep.status,
        "hopf_like": rep.hopf_like,
    }


# ---- subcommands ----------------------------------------------------------

def cmd_steady(args) -> int:
    params = resolve_params(args)
    out = _out_dir(args)
    dp = derive(params)
    phase = classify_phase(params)
    try:
        switch = steady.switching_points(dp)
    except DomainError:
        switch = None
    try:
        omega_c = steady.critical_drive(dp)
    except DomainError as exc:
        omega_c = str(exc)
    window = steady.bistable_power_window(params)
    payload = {
        "config": _config(args, params),
        "derived": asdict(dp),
        "region": phase.region,
        "roots": [_report(r) for r in phase.reports],
        "discriminant_lhs": phase.cubic.discriminant_lhs,
        "switching_intensities": switch,
        "bistable_power_window_w": window,
        "critical_drive_closed_form": omega_c,
    }
    write_json(out / "steady.json", payload)
    print(json.dumps(_jsonable({k: payload[k] for k in
                                ("region", "bistable_power_window_w", "discriminant_lhs")}
                               | {"intensities": phase.intensities})))
    return EXIT_OK


def _start_state(params, branch, rel):
    state, stable = dynamics.select_fixed_point(params, branch)
    return (state if stable else dynamics.perturb(state, rel)), stable


def cmd_dynamics(args) -> int:
    params = resolve_params(args)
    out = _out_dir(args)
    tau = params.tau
    start, stable = _start_state(params, args.branch, args.perturb)
    config = _config(args, params)
    report = {"config": config, "start_state_stable": stable}
    status = EXIT_OK
    try:
        if args.covariance:
            traj = dynamics.integrate_covariance(params, start, None, args.t_span * tau,
                                                 tol=args.tol,
                                                 samples_per_tau=args.samples_per_tau)
        else:
            traj = dynamics.integrate_mean_field(params, start, args.t_span * tau,
                                                 tol=args.tol,
                                                 samples_per_tau=args.samples_per_tau)
    except IntegrationError as exc:
        traj = exc.partial
        report["error"] = str(exc)
        status = EXIT_NUMERIC
    if traj is not None:
        traj.to_csv(out / "trajectory.csv", entanglement=args.covariance, config=config)
        report["samples"] = len(traj)
        report["truncated"] = traj.truncated
    if status == EXIT_OK and args.limit_cycle and len(traj) > 0:
        try:
            cut = args.t_span / 2 if args.lc_transient is None else args.lc_transient
            report["limit_cycle"] = asdict(dynamics.detect_limit_cycle(traj, cut * tau))
        except (DomainError, InsufficientDataError) as exc:
            report["limit_cycle"] = {"error": str(exc)}
    if status == EXIT_OK and args.lyapunov:
        est = dynamics.max_lyapunov_exponent(
            params, start, args.lyapunov_horizon * tau, tau,
            transient=args.lyapunov_transient * tau, tol=args.tol)
        report["lyapunov"] = {"rate": est.rate, "rate_over_omega_b": est.rate_over_omega_b,
                              "converged": est.converged}
    write_json(out / "dynamics.json", report)
    return status


def cmd_entangle(args) -> int:
    params = resolve_params(args)
    out = _out_dir(args)
    modes = tuple(args.modes.split(","))
    for m in modes:
        gaussian.mode_index(m)
    if len(modes) != 2:
        raise ConfigError("--modes needs exactly two comma-separated names", key="modes")
    config = _config(args, params)
    tau = params.tau
    state, stable = dynamics.select_fixed_point(params, args.branch)
    kind = args.kind if args.kind != "auto" else ("steady" if stable else "dynamic")
    fixed = classify_fixed_point(drift_matrix(params, state), state)
    payload = {"config": config, "kind": kind, "modes": modes, "fixed_point": _report(fixed)}
    if kind == "steady":
        payload["log_negativity"] = dynamics.steady_entanglement(params, state, modes)
    else:
        start = state if stable else dynamics.perturb(state, args.perturb)
        traj = dynamics.integrate_covariance(params, start, None, args.t_span * tau,
                                             tol=args.tol,
                                             samples_per_tau=args.samples_per_tau)
        values = traj.entanglement(*modes)
        _write_series(out / "entanglement.csv", traj.t, traj.t_tau, values, config)
        cut = traj.t_tau >= args.transient
        payload["time_average"] = float(values[cut].mean()) if cut.any() else None
        payload["final"] = float(values[-1]) if len(values) else None
        if args.wigner_times:
            times = np.array(sorted(args.wigner_times)) * tau
            snaps = dynamics.integrate_covariance(params, start, None, (0.0, times[-1]),
                                                  tol=args.tol, t_eval=times)
            k = gaussian.mode_index(args.wigner_mode)
            files = []
            for t_k, V in zip(snaps.t_tau, snaps.cov):
                g = V[2 * k:2 * k + 2, 2 * k:2 * k + 2]
                field = gaussian.wigner_field(g, n=args.wigner_grid)
                name = f"wigner_{args.wigner_mode}_t{t_k:g}tau.csv"
                _write_wigner(out / name, field, t_k, config)
                files.append(name)
            payload["wigner_files"] = files
    write_json(out / "entangle.json", payload)
    print(json.dumps(_jsonable({k: v for k, v in payload.items() if k != "config"})))
    return EXIT_OK


def _write_series(path, t, t_tau, values, config):
    with open(path, "w") as fh:
        fh.write("# config: " + json.dumps(_jsonable(config), sort_keys=True) + "\n")
        fh.write("t,t_over_tau,log_negativity\n")
        for row in zip(t, t_tau, values):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _write_wigner(path, field, t_tau, config):
    header = {"t_over_tau": t_tau, "gamma": field.gamma, "nx": len(field.x),
              "ny": len(field.y), "integral": field.integral(), "config": config}
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(_jsonable(header), sort_keys=True) + "\n")
        fh.write("x,y,W\n")
        for j, yv in enumerate(field.y):
            for i, xv in enumerate(field.x):
                fh.write(f"{xv!r},{yv!r},{float(field.values[j, i])!r}\n")


def _parse_axis(text: str) -> sweep.Axis:
    parts = text.split(":")
    if len(parts) not in (4, 5):
        raise ConfigError(f"--axis expects name:start:stop:num[:scale], got {text!r}",
                          key="axis")
    try:
        return sweep.Axis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]),
                          *(parts[4:] or []))
    except ValueError as exc:
        raise ConfigError(f"bad --axis {text!r}: {exc}", key="axis") from exc


def cmd_sweep(args) -> int:
    params = resolve_params(args)
    out = _out_dir(args)
    workers = _workers(args)
    if args.preset:
        spec = sweep.preset(args.preset, params, workers, fast=args.fast,
                            resolution=args.resolution)
        spec = dataclasses.replace(spec, task=args.task or spec.task, rtol=args.tol)
    elif args.axis:
        spec = sweep.SweepSpec(tuple(_parse_axis(a) for a in args.axis), params,
                               args.task or "classify", workers, bool(args.fast),
                               rtol=args.tol)
    else:
        raise ConfigError("sweep needs --preset or at least one --axis", key="axis")
    result = sweep.run_sweep(spec, serial=args.serial)
    stem = args.preset or "sweep"
    config = {"command": "sweep", "spec": spec.to_dict()}
    csv_path, _ = result.write(out, stem)
    if len(spec.axes) == 1 and spec.axes[0].name == "drive_power":
        sweep.bistability_curve(spec, result=result).to_csv(out / f"{stem}_branches.csv",
                                                           config)
    n_bad = sum(1 for p in result.points if p.code and p.code != sweep.SKIPPED)
    print(f"{len(result.points)} points written to {csv_path} ({n_bad} failed)")
    return EXIT_NUMERIC if n_bad == len(result.points) else EXIT_OK


# ---- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="JSON parameter file (default: reference set)")
    common.add_argument("--out", help=f"output directory (env {OUT_ENV}, default .)")
    common.add_argument("--tol", type=float, default=dynamics.DEFAULT_TOL,
                        help="integrator relative tolerance")
    common.add_argument("--workers", type=int, help=f"process count (env {WORKERS_ENV})")
    common.add_argument("--serial", action="store_true", help="run sweeps in-process")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one parameter (SI units, repeatable)")
    common.add_argument("--power-mw", type=float, help="drive power in mW")
    common.add_argument("--delta-m-over-omega-b", type=float,
                        help="magnon detuning in units of omega_b")

    p = argparse.ArgumentParser(prog="kerrmagno",
                                description="Kerr-modified cavity magnomechanics simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("steady", parents=[common], help="fixed points and stability")
    s.set_defaults(func=cmd_steady)

    d = sub.add_parser("dynamics", parents=[common], help="time integration")
    d.add_argument("--t-span", type=float, default=300.0, help="duration in tau")
    d.add_argument("--branch", default="upper", help="upper|lower|middle start root")
    d.add_argument("--perturb", type=float, default=dynamics.PERTURBATION)
    d.add_argument("--samples-per-tau", type=int, default=20)
    d.add_argument("--covariance", action="store_true", help="also evolve covariances")
    d.add_argument("--limit-cycle", action="store_true")
    d.add_argument("--lc-transient", type=float,
                   help="samples discarded before limit-cycle detection (tau, default half the run)")
    d.add_argument("--lyapunov", action="store_true")
    d.add_argument("--lyapunov-horizon", type=float, default=500.0, help="in tau")
    d.add_argument("--lyapunov-transient", type=float, default=500.0, help="in tau")
    d.set_defaults(func=cmd_dynamics)

    e = sub.add_parser("entangle", parents=[common], help="log-negativity and Wigner data")
    e.add_argument("--modes", default="cavity,magnon")
    e.add_argument("--kind", choices=("auto", "steady", "dynamic"), default="auto")
    e.add_argument("--branch", default="upper")
    e.add_argument("--perturb", type=float, default=dynamics.PERTURBATION)
    e.add_argument("--t-span", type=float, default=250.0, help="duration in tau")
    e.add_argument("--transient", type=float, default=dynamics.DEFAULT_TRANSIENT_TAU,
                   help="averaging starts here (tau)")
    e.add_argument("--samples-per-tau", type=int, default=20)
    e.add_argument("--wigner-times", type=float, nargs="*", metavar="TAU")
    e.add_argument("--wigner-mode", default="magnon")
    e.add_argument("--wigner-grid", type=int, default=201)
    e.set_defaults(func=cmd_entangle)

    w = sub.add_parser("sweep", parents=[common], help="parameter sweeps")
    w.add_argument("--preset", choices=("fig1", "fig2", "fig3", "fig5"))
    w.add_argument("--axis", action="append",
                   help="name:start:stop:num[:linear|log] (repeatable, max 2)")
    w.add_argument("--task", choices=sweep.TASKS)
    w.add_argument("--fast", action=argparse.BooleanOptionalAction, default=None)
    w.add_argument("--resolution", type=int, help="points per preset axis")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error [{exc.key}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoStationaryStateError as exc:
        print(f"no stationary state: {exc}; rerun with --kind dynamic", file=sys.stderr)
        return EXIT_NO_STATIONARY
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
