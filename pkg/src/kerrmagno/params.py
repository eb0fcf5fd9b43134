"""Physical inputs, unit handling and derived effective quantities.

All frequencies and rates are stored as angular quantities in rad/s.
Parameter files may instead quote ``frequency / 2pi`` values in Hz, the
convention used when reporting experimental parameters; the loader applies
the factor 2pi exactly once.

Decay rates enter the equations of motion as written, i.e. ``kappa`` is the
amplitude damping rate in ``da/dt = -(i Delta + kappa) a``.  With this
convention the reference parameter set reproduces the 13.84-81.94 mW
bistable window.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DomainError

# CODATA 2018 (exact in the revised SI).
HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K

TWO_PI = 2.0 * math.pi

FIELDS = (
    "omega_a",
    "omega_m",
    "omega_b",
    "kappa_a",
    "kappa_m",
    "kappa_b",
    "g_ma",
    "g_mb",
    "kerr_K",
    "omega_d",
    "drive_power",
    "temperature",
)
# Quantities that carry frequency units and are scaled by the unit convention.
_FREQUENCY_KEYS = frozenset(FIELDS[:10]) | {"delta_a", "delta_m"}
UNIT_CONVENTIONS = ("hz_over_2pi", "rad_per_s")


@dataclass(frozen=True)
class SystemParams:
    """Constants and drive settings of the cavity-magnon-phonon system.

    Frequencies, rates and couplings are angular [rad/s]; ``drive_power``
    is in W and ``temperature`` in K.
    """

    omega_a: float
    omega_m: float
    omega_b: float
    kappa_a: float
    kappa_m: float
    kappa_b: float
    g_ma: float
    g_mb: float
    kerr_K: float
    omega_d: float
    drive_power: float
    temperature: float

    def __post_init__(self):
        for name in FIELDS:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
        for name in ("omega_a", "omega_m", "omega_b", "omega_d",
                     "kappa_a", "kappa_m", "kappa_b"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be strictly positive")
        if self.drive_power < 0:
            raise DomainError("drive_power must be >= 0")
        if self.temperature < 0:
            raise DomainError("temperature must be >= 0")

    @property
    def delta_a(self) -> float:
        return self.omega_a - self.omega_d

    @property
    def delta_m(self) -> float:
        return self.omega_m - self.omega_d

    @property
    def tau(self) -> float:
        """Mechanical period 2pi/omega_b [s]."""
        return TWO_PI / self.omega_b

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def with_detunings(self, delta_a=None, delta_m=None) -> "SystemParams":
        """Return a copy with the given detunings [rad/s].

        Changing ``delta_a`` moves the drive frequency; the magnon detuning is
        held fixed unless a new ``delta_m`` is given as well.
        """
        dm = self.delta_m if delta_m is None else delta_m
        omega_d = self.omega_d if delta_a is None else self.omega_a - delta_a
        return self.replace(omega_d=omega_d, omega_m=omega_d + dm)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in FIELDS}


@dataclass(frozen=True)
class DerivedParams:
    """Effective quantities entering the steady-state problem."""

    delta_a: float
    delta_m: float
    eta: float
    zeta: float
    kerr_eff: float
    delta_0: float
    kappa_0: float
    drive_amp: float
    n_th: float


def drive_amplitude(drive_power, omega_d, kappa_m):
    """Magnon drive amplitude sqrt(2 kappa_m P_d / (hbar omega_d)) [1/s]."""
    for name, v in (("drive_power", drive_power), ("omega_d", omega_d),
                    ("kappa_m", kappa_m)):
        if not math.isfinite(v) or v < 0:
            raise DomainError(f"{name} must be finite and >= 0, got {v!r}")
    if omega_d == 0:
        raise DomainError("omega_d must be > 0")
    return math.sqrt(2.0 * kappa_m * drive_power / (HBAR * omega_d))


def drive_power_from_amplitude(amplitude, omega_d, kappa_m):
    """Inverse of :func:`drive_amplitude` [W]."""
    return amplitude**2 * HBAR * omega_d / (2.0 * kappa_m)


def thermal_occupation(omega_b, temperature):
    """Bose-Einstein occupation of a mode at angular frequency ``omega_b``."""
    if not (math.isfinite(omega_b) and math.isfinite(temperature)):
        raise DomainError("omega_b and temperature must be finite")
    if omega_b <= 0:
        raise DomainError("omega_b must be > 0")
    if temperature < 0:
        raise DomainError("temperature must be >= 0")
    if temperature == 0:
        return 0.0
    x = HBAR * omega_b / (K_B * temperature)
    if x > 700.0:
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def derive(params: SystemParams) -> DerivedParams:
    p = params
    delta_a = p.delta_a
    delta_m = p.delta_m
    eta = p.g_ma**2 / (delta_a**2 + p.kappa_a**2)
    zeta = p.g_mb**2 / (p.omega_b**2 + p.kappa_b**2)
    return DerivedParams(
        delta_a=delta_a,
        delta_m=delta_m,
        eta=eta,
        zeta=zeta,
        kerr_eff=2.0 * (p.kerr_K - zeta * p.omega_b),
        delta_0=delta_m - eta * delta_a,
        kappa_0=p.kappa_m + eta * p.kappa_a,
        drive_amp=drive_amplitude(p.drive_power, p.omega_d, p.kappa_m),
        n_th=thermal_occupation(p.omega_b, p.temperature),
    )


def reference_params(drive_power=0.05, delta_m_over_omega_b=-0.8,
                     delta_a_over_omega_b=-0.9) -> SystemParams:
    """Parameter set of the reference bistability study.

    omega_a/2pi = 10 GHz, omega_b/2pi = 10 MHz, kappa_a/2pi = kappa_m/2pi =
    1 MHz, kappa_b/2pi = 100 Hz, K/2pi = 6.5 nHz, g_ma/2pi = 3.2 MHz,
    g_mb/2pi = 1 mHz, T = 10 mK, detunings quoted in units of omega_b.
    """
    omega_a = TWO_PI * 10e9
    omega_b = TWO_PI * 10e6
    omega_d = omega_a - delta_a_over_omega_b * omega_b
    return SystemParams(
        omega_a=omega_a,
        omega_m=omega_d + delta_m_over_omega_b * omega_b,
        omega_b=omega_b,
        kappa_a=TWO_PI * 1e6,
        kappa_m=TWO_PI * 1e6,
        kappa_b=TWO_PI * 100.0,
        g_ma=TWO_PI * 3.2e6,
        g_mb=TWO_PI * 1e-3,
        kerr_K=TWO_PI * 6.5e-9,
        omega_d=omega_d,
        drive_power=drive_power,
        temperature=0.01,
    )


# --- parameter files -------------------------------------------------------

def params_from_dict(data: dict) -> SystemParams:
    """Build :class:`SystemParams` from a parameter-file mapping.

    Keys are the :class:`SystemParams` field names plus ``unit_convention``.
    ``omega_d`` may be replaced by ``delta_a`` and ``omega_m`` by ``delta_m``.
    Unknown keys are rejected.
    """
    if not isinstance(data, dict):
        raise ConfigError("parameter file must contain a JSON object")
    data = dict(data)
    convention = data.pop("unit_convention", "hz_over_2pi")
    if convention not in UNIT_CONVENTIONS:
        raise ConfigError(
            f"unit_convention must be one of {UNIT_CONVENTIONS}, got {convention!r}",
            key="unit_convention")
    scale = TWO_PI if convention == "hz_over_2pi" else 1.0
    allowed = set(FIELDS) | {"delta_a", "delta_m"}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown parameter key {key!r}", key=key)

    values = {}
    for key, raw in data.items():
        try:
            v = float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"parameter {key!r} is not a number: {raw!r}", key=key)
        values[key] = v * scale if key in _FREQUENCY_KEYS else v

    if "omega_d" not in values:
        if "delta_a" not in values or "omega_a" not in values:
            raise ConfigError("missing required key 'omega_d' (or 'delta_a')",
                              key="omega_d")
        values["omega_d"] = values["omega_a"] - values["delta_a"]
    elif "delta_a" in values:
        raise ConfigError("give either 'omega_d' or 'delta_a', not both", key="delta_a")
    values.pop("delta_a", None)

    if "omega_m" not in values:
        if "delta_m" not in values:
            raise ConfigError("missing required key 'omega_m' (or 'delta_m')",
                              key="omega_m")
        values["omega_m"] = values["omega_d"] + values["delta_m"]
    elif "delta_m" in values:
        raise ConfigError("give either 'omega_m' or 'delta_m', not both", key="delta_m")
    values.pop("delta_m", None)

    for key in FIELDS:
        if key not in values:
            raise ConfigError(f"missing required key {key!r}", key=key)
    try:
        return SystemParams(**values)
    except DomainError as exc:
        key = str(exc).split()[0]
        raise ConfigError(str(exc), key=key if key in FIELDS else None) from exc


def params_to_dict(params: SystemParams, unit_convention="rad_per_s") -> dict:
    if unit_convention not in UNIT_CONVENTIONS:
        raise ConfigError(f"unknown unit convention {unit_convention!r}",
                          key="unit_convention")
    scale = TWO_PI if unit_convention == "hz_over_2pi" else 1.0
    out = {"unit_convention": unit_convention}
    for key, value in params.to_dict().items():
        out[key] = value / scale if key in _FREQUENCY_KEYS else value
    return out


def load_params(path) -> SystemParams:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"parameter file not found: {path}", key="params")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}", key="params")
    return params_from_dict(data)


def save_params(params: SystemParams, path, unit_convention="rad_per_s"):
    Path(path).write_text(json.dumps(params_to_dict(params, unit_convention), indent=2))


