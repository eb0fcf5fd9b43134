"""Parameter sweeps: bistability curves, stability phase diagrams and
entanglement maps.

Every grid point is evaluated independently and written into a preallocated
slot, so results do not depend on the number of workers or on completion
order.  Failures are recorded per point as an error code.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import dynamics
from .errors import (DomainError, IntegrationError, NoStationaryStateError,
                     NumericalError, PhysicalityError)
from .params import FIELDS, SystemParams, params_to_dict, reference_params
from .stability import classify_phase

TASKS = ("classify", "entangle", "dynamics")

# Error codes stored per grid point.
OK = ""
NO_STATIONARY = "NO_STATIONARY_STATE"
INTEGRATION = "INTEGRATION_FAILED"
PHYSICALITY = "UNPHYSICAL_COVARIANCE"
NUMERIC = "NUMERIC_FAILURE"
DOMAIN = "DOMAIN_ERROR"
SKIPPED = "SKIPPED_FAST_MODE"

_SPECIAL_AXES = ("delta_a", "delta_m", "delta_a_over_omega_b", "delta_m_over_omega_b")


@dataclass(frozen=True)
class Axis:
    """One sweep axis; ``name`` is a SystemParams field or a detuning alias."""

    name: str
    start: float
    stop: float
    num: int
    scale: str = "linear"

    def __post_init__(self):
        if self.name not in FIELDS and self.name not in _SPECIAL_AXES:
            raise DomainError(f"unknown sweep parameter {self.name!r}")
        if self.num < 2:
            raise DomainError("an axis needs at least 2 points")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise DomainError("axis range must be finite")
        if self.scale not in ("linear", "log"):
            raise DomainError("scale must be 'linear' or 'log'")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise DomainError("log axis needs positive bounds")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.num)
        return np.linspace(self.start, self.stop, self.num)


def apply_axis(params: SystemParams, name: str, value: float) -> SystemParams:
    if name == "delta_a":
        return params.with_detunings(delta_a=value)
    if name == "delta_m":
        return params.with_detunings(delta_m=value)
    if name == "delta_a_over_omega_b":
        return params.with_detunings(delta_a=value * params.omega_b)
    if name == "delta_m_over_omega_b":
        return params.with_detunings(delta_m=value * params.omega_b)
    return params.replace(**{name: float(value)})


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple
    base: SystemParams
    task: str = "classify"
    workers: int = 1
    fast: bool = False
    unstable_stride: int = 4
    boundary_band: int = 3
    transient_tau: float = dynamics.DEFAULT_TRANSIENT_TAU
    window_tau: float = dynamics.DEFAULT_WINDOW_TAU
    lyapunov_horizon_tau: float = 500.0
    # an unstable start needs time to reach its attractor
    lyapunov_transient_tau: float = 500.0
    rtol: float = dynamics.DEFAULT_TOL

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not 1 <= len(self.axes) <= 2:
            raise DomainError("sweeps support one or two axes")
        if self.task not in TASKS:
            raise DomainError(f"task must be one of {TASKS}")
        if self.workers < 1 or self.unstable_stride < 1:
            raise DomainError("workers and unstable_stride must be >= 1")
        if self.boundary_band < 0:
            raise DomainError("boundary_band must be >= 0")

    @property
    def shape(self):
        return tuple(a.num for a in self.axes)

    def grid(self):
        return [a.values() for a in self.axes]

    def params_at(self, index) -> SystemParams:
        p = self.base
        for axis, values, i in zip(self.axes, self.grid(), index):
            p = apply_axis(p, axis.name, values[i])
        return p

    def to_dict(self) -> dict:
        """Result-determining settings; the worker count is omitted so output
        files are identical for any degree of parallelism."""
        d = {k: v for k, v in asdict(self).items() if k not in ("axes", "base", "workers")}
        d["axes"] = [asdict(a) for a in self.axes]
        d["base"] = params_to_dict(self.base)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        from .params import params_from_dict

        data = dict(data)
        axes = tuple(Axis(**a) for a in data.pop("axes"))
        base = params_from_dict(data.pop("base"))
        return cls(axes=axes, base=base, **data)


@dataclass
class PointResult:
    region: str = ""
    intensities: tuple = ()
    stability: tuple = ()
    e_am: float = math.nan
    e_kind: str = ""
    e_std: float = math.nan
    lyapunov: float = math.nan
    code: str = OK
    message: str = ""


def _error_code(exc) -> str:
    if isinstance(exc, NoStationaryStateError):
        return NO_STATIONARY
    if isinstance(exc, IntegrationError):
        return INTEGRATION
    if isinstance(exc, PhysicalityError):
        return PHYSICALITY
    if isinstance(exc, DomainError):
        return DOMAIN
    if isinstance(exc, (NumericalError, ArithmeticError, np.linalg.LinAlgError)):
        return NUMERIC
    return NUMERIC


def evaluate_point(spec: SweepSpec, index, dynamic: bool = True) -> PointResult:
    """Evaluate one grid point; ``dynamic=False`` skips costly unstable-point runs."""
    res = PointResult()
    try:
        params = spec.params_at(index)
        phase = classify_phase(params)
        res.region = phase.region
        res.intensities = tuple(r.mean_state.intensity for r in phase.reports)
        res.stability = tuple(r.status for r in phase.reports)
        if spec.task == "classify":
            return res
        state, stable = dynamics.select_fixed_point(params, "upper", phase)
        tau = params.tau
        if spec.task == "entangle":
            if stable:
                res.e_am = dynamics.steady_entanglement(params, state)
                res.e_kind = "steady"
            elif not dynamic:
                res.code = SKIPPED
            else:
                avg = dynamics.time_averaged_entanglement(
                    params, window=spec.window_tau * tau,
                    transient_cut=spec.transient_tau * tau, rtol=spec.rtol,
                    initial=dynamics.perturb(state))
                res.e_am, res.e_std, res.e_kind = avg.mean, avg.std, "time_averaged"
        else:
            start = state if stable else dynamics.perturb(state)
            est = dynamics.max_lyapunov_exponent(
                params, start, spec.lyapunov_horizon_tau * tau, tau,
                transient=spec.lyapunov_transient_tau * tau, tol=spec.rtol)
            res.lyapunov = est.rate_over_omega_b
    except Exception as exc:  # recorded per point; a sweep never aborts
        res.code = _error_code(exc)
        res.message = f"{type(exc).__name__}: {exc}"
    return res


def _evaluate_chunk(spec, indices, dynamic=None):
    dynamic = [True] * len(indices) if dynamic is None else dynamic
    return [evaluate_point(spec, idx, dyn) for idx, dyn in zip(indices, dynamic)]


def _n_stable(label: str) -> int:
    head = label.split("S")[0]
    return int(head) if head.isdigit() else 0


def fast_mode_mask(spec: SweepSpec, regions: np.ndarray) -> np.ndarray:
    """Unstable cells that get a dynamical run in fast mode.

    Kept: cells on the ``unstable_stride`` lattice plus every unstable cell
    within ``boundary_band`` cells (Chebyshev) of a cell holding a stable
    root, where the time-averaged entanglement varies fastest.
    """
    regions = np.asarray(regions, dtype=object)
    has_stable = np.array([_n_stable(r) > 0 for r in regions.ravel()]).reshape(regions.shape)
    lattice = np.ones(regions.shape, bool)
    for ax, n in enumerate(regions.shape):
        shape = [1] * regions.ndim
        shape[ax] = n
        lattice &= (np.arange(n) % spec.unstable_stride == 0).reshape(shape)
    k = spec.boundary_band
    near = ndimage.binary_dilation(has_stable, np.ones((2 * k + 1,) * regions.ndim, bool)) \
        if k else has_stable
    return lattice | near


@dataclass
class SweepResult:
    spec: SweepSpec
    points: list = field(default_factory=list)  # C-ordered over the grid

    @property
    def shape(self):
        return self.spec.shape

    @property
    def coordinates(self):
        return self.spec.grid()

    def field(self, name) -> np.ndarray:
        values = [getattr(p, name) for p in self.points]
        dtype = object if name in ("region", "code", "e_kind", "message") else float
        return np.array(values, dtype=dtype).reshape(self.shape)

    @property
    def regions(self) -> np.ndarray:
        return self.field("region")

    @property
    def e_am(self) -> np.ndarray:
        return self.field("e_am")

    @property
    def codes(self) -> np.ndarray:
        return self.field("code")

    def rows(self):
        grids = self.coordinates
        for flat, idx in enumerate(np.ndindex(*self.shape)):
            p = self.points[flat]
            row = {}
            for axis, values, i in zip(self.spec.axes, grids, idx):
                row[f"i_{axis.name}"] = i
                row[axis.name] = float(values[i])
            row["region"] = p.region
            row["n_roots"] = len(p.intensities)
            for k in range(3):
                row[f"I_{k + 1}"] = p.intensities[k] if k < len(p.intensities) else math.nan
                row[f"stability_{k + 1}"] = p.stability[k] if k < len(p.stability) else ""
            row["E_am"] = p.e_am
            row["E_am_std"] = p.e_std
            row["E_am_kind"] = p.e_kind
            row["lyapunov_over_omega_b"] = p.lyapunov
            row["error_code"] = p.code
            row["message"] = p.message
            yield row

    def to_csv(self, path, config=None):
        rows = list(self.rows())
        with open(path, "w", newline="") as fh:
            fh.write("# config: " + json.dumps(config or self.spec.to_dict(), sort_keys=True) + "\n")
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            for row in rows:
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})

    def write(self, out_dir, stem="sweep"):
        """Write ``<stem>.csv`` and the ``<stem>.json`` sidecar; returns both paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
        self.to_csv(csv_path)
        summary = {
            "spec": self.spec.to_dict(),
            "shape": list(self.shape),
            "region_counts": _counts(p.region for p in self.points),
            "error_counts": _counts(p.code for p in self.points if p.code),
        }
        json_path.write_text(json.dumps(summary, indent=2, sort_keys=True))
        return csv_path, json_path


def _counts(items):
    out = {}
    for x in items:
        out[x] = out.get(x, 0) + 1
    return dict(sorted(out.items()))


def run_sweep(spec: SweepSpec, serial: bool = False) -> SweepResult:
    """Evaluate every grid point of ``spec``.

    ``serial=True`` (or ``spec.workers == 1``) runs in-process; otherwise
    chunks of points are distributed over a process pool.
    """
    indices = list(np.ndindex(*spec.shape))
    dynamic = [True] * len(indices)
    if spec.task == "entangle" and spec.fast:
        pre = run_sweep(SweepSpec(spec.axes, spec.base, "classify", spec.workers), serial)
        dynamic = list(fast_mode_mask(spec, pre.regions).ravel())
    if serial or spec.workers == 1:
        return SweepResult(spec, _evaluate_chunk(spec, indices, dynamic))
    n_chunks = min(len(indices), spec.workers * 8)
    chunks = [indices[k::n_chunks] for k in range(n_chunks)]
    flags = [dynamic[k::n_chunks] for k in range(n_chunks)]
    slots = [None] * len(indices)
    position = {idx: flat for flat, idx in enumerate(indices)}
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        for chunk, results in zip(chunks, pool.map(_evaluate_chunk, [spec] * n_chunks,
                                                   chunks, flags)):
            for idx, r in zip(chunk, results):
                slots[position[idx]] = r
    return SweepResult(spec, slots)


@dataclass
class BranchTable:
    """All fixed points along a one-dimensional drive-power sweep."""

    power: np.ndarray
    intensity: np.ndarray
    status: np.ndarray
    branch: np.ndarray
    region: np.ndarray

    def to_csv(self, path, config=None):
        with open(path, "w", newline="") as fh:
            if config is not None:
                fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(["drive_power", "intensity", "status", "branch", "region"])
            for row in zip(self.power, self.intensity, self.status, self.branch, self.region):
                w.writerow([repr(float(row[0])), repr(float(row[1])), *row[2:]])


_BRANCH_NAMES = {1: ("single",), 2: ("lower", "upper"), 3: ("lower", "middle", "upper")}


def bistability_curve(spec: SweepSpec, serial: bool = False,
                      result: SweepResult | None = None) -> BranchTable:
    """Branch table (power, intensity, stability) for a 1-D ``drive_power`` sweep."""
    if len(spec.axes) != 1 or spec.axes[0].name != "drive_power":
        raise DomainError("bistability_curve needs a single drive_power axis")
    if result is None:
        result = run_sweep(SweepSpec(spec.axes, spec.base, "classify", spec.workers), serial)
    power, inten, status, branch, region = [], [], [], [], []
    for P, pt in zip(spec.axes[0].values(), result.points):
        names = _BRANCH_NAMES.get(len(pt.intensities), ())
        for I, st, nm in zip(pt.intensities, pt.stability, names):
            power.append(P)
            inten.append(I)
            status.append(st)
            branch.append(nm)
            region.append(pt.region)
    return BranchTable(np.array(power), np.array(inten), np.array(status),
                       np.array(branch), np.array(region))


def preset(name: str, base: SystemParams | None = None, workers: int = 1,
           fast: bool | None = None, resolution: int | None = None) -> SweepSpec:
    """Sweep recipes for the reference figures: fig1, fig2, fig3, fig5.

    fig1/fig3 scan the drive power over 1-150 mW at the base detuning
    (classification / entanglement).  fig2/fig5 cover 1-200 mW times
    Delta_m in [-1.2, 0] omega_b on a 200x200 grid (classification /
    entanglement, the latter in fast mode by default).
    """
    base = reference_params() if base is None else base
    if name in ("fig1", "fig3"):
        n = resolution or (300 if name == "fig1" else 150)
        axes = (Axis("drive_power", 1e-3, 150e-3, n),)
        task = "classify" if name == "fig1" else "entangle"
        return SweepSpec(axes, base, task, workers, bool(fast))
    if name in ("fig2", "fig5"):
        n = resolution or 200
        axes = (Axis("drive_power", 1e-3, 200e-3, n),
                Axis("delta_m_over_omega_b", -1.2, 0.0, n))
        task = "classify" if name == "fig2" else "entangle"
        return SweepSpec(axes, base, task, workers, True if fast is None else fast)
    raise DomainError(f"unknown preset {name!r}; choose fig1, fig2, fig3 or fig5")


def default_workers() -> int:
    env = os.environ.get("KERRMAGNO_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"KERRMAGNO_WORKERS must be an integer, got {env!r}")
    return 1
