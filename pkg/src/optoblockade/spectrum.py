"""Closed-form eigenstructure of the undriven, pumped optomechanical system."""
from __future__ import annotations

from dataclasses import dataclass, field

from .params import SystemParams, derived_scalars


@dataclass(frozen=True)
class LevelIndex:
    n: int  # photon number
    m: int  # phonon number in the n-photon displaced basis

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("level indices must be >= 0")


def eigenenergy(idx: LevelIndex | tuple, p: SystemParams) -> float:
    """E_nm = n Delta_c + m omega_m - n^2 eta - n delta - G^2/omega_m."""
    n, m = (idx.n, idx.m) if isinstance(idx, LevelIndex) else idx
    d = derived_scalars(p)
    return n * p.delta_c + m * p.omega_m - n * n * d.eta - n * d.delta - p.G ** 2 / p.omega_m


def energy_shift(n: int, p: SystemParams) -> float:
    if n < 0:
        raise ValueError("photon number must be >= 0")
    return (n * n * p.g0 ** 2 + 2 * n * p.g0 * p.G + p.G ** 2) / p.omega_m


def spr_detuning(p: SystemParams) -> float:
    """Detuning of the 0 -> 1 photon resonance, eta + delta."""
    d = derived_scalars(p)
    return d.eta + d.delta


def tpr_detuning(p: SystemParams, m_sideband: int = 0) -> float:
    """Detuning of the two-photon resonance |0,0~(0)> -> |2,m~(2)>."""
    if m_sideband < 0:
        raise ValueError("sideband index must be >= 0")
    d = derived_scalars(p)
    return 2 * d.eta + d.delta - m_sideband * p.omega_m / 2


@dataclass(frozen=True)
class ResonanceTable:
    spr_detuning: float
    tpr_detunings: dict = field(default_factory=dict)
    # Laser frequencies relative to omega_c (omega_L - omega_c) that hit the
    # single-photon, zero-sideband two-photon and two-phonon-sideband
    # two-photon transitions.
    omega_10: float = 0.0
    omega_20: float = 0.0
    omega_21: float = 0.0

    def rows(self):
        yield ("spr", 0, self.spr_detuning)
        for m, value in sorted(self.tpr_detunings.items()):
            yield ("tpr", m, value)


def resonance_table(p: SystemParams, max_sideband: int = 4) -> ResonanceTable:
    tpr = {m: tpr_detuning(p, m) for m in range(max_sideband + 1)}
    spr = spr_detuning(p)
    return ResonanceTable(
        spr_detuning=spr, tpr_detunings=tpr,
        omega_10=-spr, omega_20=-tpr[0], omega_21=-tpr_detuning(p, 2),
    )
