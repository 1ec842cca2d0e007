"""System parameters, unit conventions and derived scalars.

All rates and frequencies are stored in the same units; the figure presets
use omega_m = 1 so values read like ratios to the mechanical frequency.
"""
from __future__ import annotations

import dataclasses
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainError, WeakDriveError, WeakDriveWarning


@dataclass(frozen=True)
class SystemParams:
    """Model parameters of the pumped, weakly driven optomechanical cavity."""

    delta_c: float = 0.0
    g0: float = 0.5
    G: float = 0.0
    Omega: float = 0.01
    gamma_c: float = 0.3
    gamma_m: float = 0.001
    nbar_m: float = 0.0
    omega_m: float = 1.0

    def __post_init__(self):
        for name in ("delta_c", "g0", "G", "Omega", "gamma_c", "gamma_m", "nbar_m", "omega_m"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
                raise DomainError(f"{name} must be a finite real number, got {value!r}")
        if self.omega_m <= 0:
            raise DomainError("omega_m must be > 0")
        if self.gamma_c <= 0:
            raise DomainError("gamma_c must be > 0")
        for name in ("gamma_m", "nbar_m", "g0", "G", "Omega"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")

    @property
    def weak_drive(self) -> bool:
        return self.Omega < self.gamma_c

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)

    def scaled(self, s: float) -> "SystemParams":
        """Multiply every rate/frequency by ``s`` (nbar_m is dimensionless)."""
        if s <= 0:
            raise DomainError("scale factor must be > 0")
        return self.replace(
            omega_m=self.omega_m * s, delta_c=self.delta_c * s, g0=self.g0 * s,
            G=self.G * s, Omega=self.Omega * s, gamma_c=self.gamma_c * s,
            gamma_m=self.gamma_m * s,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SystemParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise DomainError(f"unknown parameter keys: {sorted(unknown)}")
        return cls(**{k: float(v) if isinstance(v, int) and not isinstance(v, bool) else v
                      for k, v in data.items()})


@dataclass(frozen=True)
class DerivedScalars:
    eta: float    # g0^2 / omega_m, Kerr-like anharmonicity
    delta: float  # 2 g0 G / omega_m, pump-induced level shift


def derived_scalars(p: SystemParams) -> DerivedScalars:
    return DerivedScalars(eta=p.g0 ** 2 / p.omega_m, delta=2.0 * p.g0 * p.G / p.omega_m)


def drive_amplitude(P_in: float, gamma_c: float, omega_L: float) -> float:
    """Drive amplitude sqrt(P_in * gamma_c / omega_L) from input laser power."""
    if P_in < 0 or gamma_c <= 0 or omega_L <= 0:
        raise DomainError("drive_amplitude needs P_in >= 0 and gamma_c, omega_L > 0")
    return math.sqrt(P_in * gamma_c / omega_L)


def thermal_occupancy(omega_m: float, T: float, k_B: float = 1.0) -> float:
    """Bose-Einstein occupancy of the mechanical bath; zero at T = 0."""
    if omega_m <= 0 or T < 0:
        raise DomainError("thermal_occupancy needs omega_m > 0 and T >= 0")
    if T == 0:
        return 0.0
    x = omega_m / (k_B * T)
    if x > 700:
        return 0.0
    return 1.0 / math.expm1(x)


def require_weak_drive(p: SystemParams, route: str) -> None:
    """Hard error for the perturbative/analytic routes outside Omega < gamma_c."""
    if not p.weak_drive:
        raise WeakDriveError(
            f"{route} route requires Omega < gamma_c (got Omega={p.Omega}, gamma_c={p.gamma_c})"
        )


def warn_weak_drive(p: SystemParams, route: str) -> None:
    if not p.weak_drive:
        warnings.warn(
            f"{route}: Omega={p.Omega} >= gamma_c={p.gamma_c}; weak-drive picture does not apply",
            WeakDriveWarning, stacklevel=3,
        )


def load_params(path: str | Path) -> SystemParams:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise DomainError("parameter config must be a JSON object")
    return SystemParams.from_dict(data)


def dump_params(p: SystemParams) -> str:
    return json.dumps(p.to_dict(), sort_keys=True)


# Parameter set shared by all figure presets (ratios to omega_m).
FIG2 = SystemParams(delta_c=0.0, g0=0.5, G=0.0, Omega=0.01, gamma_c=0.3, gamma_m=0.001, nbar_m=0.0)
