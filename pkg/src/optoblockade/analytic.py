"""Closed-form weak-drive correlations and blockade classification.

The zero-sideband formulas depend on the detuning only through
Delta_c - delta, which is how the mechanical pump moves the blockade
features without changing their depth.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError
from .params import SystemParams, derived_scalars, require_weak_drive


@dataclass(frozen=True)
class ChiSet:
    chi: tuple          # chi_n = Delta_c - n eta, n = 1..3
    shifted: tuple      # chi_n - delta


def chi_set(p: SystemParams) -> ChiSet:
    d = derived_scalars(p)
    chi = tuple(p.delta_c - n * d.eta for n in (1, 2, 3))
    return ChiSet(chi=chi, shifted=tuple(c - d.delta for c in chi))


def _brackets(p: SystemParams):
    s = chi_set(p).shifted
    return [4.0 * c * c + p.gamma_c ** 2 for c in s]


def g2_analytic(p: SystemParams) -> float:
    require_weak_drive(p, "analytic")
    b1, b2, _ = _brackets(p)
    return b1 / b2


def g3_analytic(p: SystemParams, as_printed: bool = False) -> float:
    """Equal-time third-order correlation.

    ``as_printed=True`` swaps in the alternative numerator
    4[(chi_1 - delta)^2 + gamma_c^2]^2; it is kept only as a negative
    control and disagrees with 6 P3 / P1^3.
    """
    require_weak_drive(p, "analytic")
    b1, b2, b3 = _brackets(p)
    if as_printed:
        c1 = chi_set(p).shifted[0]
        return 4.0 * (c1 * c1 + p.gamma_c ** 2) ** 2 / (b2 * b3)
    return b1 * b1 / (b2 * b3)


def spr_g2(p: SystemParams) -> float:
    eta = derived_scalars(p).eta
    return p.gamma_c ** 2 / (4 * eta ** 2 + p.gamma_c ** 2)


def tpr_g2(p: SystemParams) -> float:
    eta = derived_scalars(p).eta
    return (4 * eta ** 2 + p.gamma_c ** 2) / p.gamma_c ** 2


def turning_point_pump(delta_c: float, p: SystemParams) -> float:
    """Pump strength G* minimizing g2_analytic at fixed detuning."""
    if p.g0 <= 0:
        raise DomainError("turning point undefined for g0 = 0 (no pump dependence)")
    g0, wm = p.g0, p.omega_m
    return (-3 * g0 ** 2 + math.sqrt(g0 ** 4 + p.gamma_c ** 2 * wm ** 2) + 2 * delta_c * wm) / (4 * g0)


class Blockade(str, enum.Enum):
    ONE_PB = "OnePB"
    TWO_PB = "TwoPB"
    PIT = "PIT"
    SUB_POISSON = "SubPoisson"
    SUPER_POISSON = "SuperPoisson"
    NONE = "None"


@dataclass(frozen=True)
class Thresholds:
    one_pb: float = 0.5  # g2 below this is labelled OnePB
    pit: float = 2.0     # g2 above this (and not TwoPB) is labelled PIT


@dataclass(frozen=True)
class BlockadeLabel:
    kind: Blockade
    thresholds: Thresholds

    def __str__(self):
        return self.kind.value


def classify(g2: float, g3: float, thresholds: Thresholds = Thresholds()) -> BlockadeLabel:
    if not (g2 >= 0 and g3 >= 0):
        raise DomainError(f"correlations must be >= 0, got g2={g2}, g3={g3}")
    if g2 > 1 and g3 < 1:
        kind = Blockade.TWO_PB
    elif g2 < thresholds.one_pb:
        kind = Blockade.ONE_PB
    elif g2 > thresholds.pit:
        kind = Blockade.PIT
    elif g2 < 1:
        kind = Blockade.SUB_POISSON
    elif g2 > 1:
        kind = Blockade.SUPER_POISSON
    else:
        kind = Blockade.NONE
    return BlockadeLabel(kind, thresholds)
