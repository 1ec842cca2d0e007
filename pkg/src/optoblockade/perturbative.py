"""Weak-drive amplitude solver in the displaced few-photon basis.

The state is expanded as sum_{n<=3, m} C[n, m] |n>_a |m~(n)>_b with the
phonon index running over the displaced number states of each photon
manifold. Probabilities are summed over m before forming g2/g3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analytic import BlockadeLabel, Thresholds, classify
from .errors import ConfigurationError, DomainError, UndefinedCorrelationError
from .fock import displaced_overlap, displaced_overlap_first_order
from .params import SystemParams, derived_scalars, require_weak_drive
from .spectrum import eigenenergy

N_PHOTON = 4  # manifolds n = 0..3

OverlapFn = Callable[[int, int, float], float]


@dataclass(frozen=True, eq=False)
class AmplitudeSet:
    c: np.ndarray                 # shape (4, m_max + 1)
    params: SystemParams
    m_max: int
    truncation_remainder: float = 0.0

    def norm2(self) -> float:
        return float(np.sum(np.abs(self.c) ** 2))

    def normalized(self) -> "AmplitudeSet":
        return AmplitudeSet(self.c / math.sqrt(self.norm2()), self.params, self.m_max,
                            self.truncation_remainder)


@dataclass(frozen=True)
class CorrelationPoint:
    P1: float
    P2: float
    P3: float
    mean_n: float
    g2: float
    g3: float
    route: str
    label: BlockadeLabel

    def row(self) -> dict:
        return {"P1": self.P1, "P2": self.P2, "P3": self.P3, "mean_n": self.mean_n,
                "g2": self.g2, "g3": self.g3, "route": self.route, "label": str(self.label)}


def _overlap_table(size: int, alpha: float, overlap: OverlapFn) -> np.ndarray:
    return np.array([[overlap(l, k, alpha) for k in range(size)] for l in range(size)])


def _energies(p: SystemParams, m_max: int) -> np.ndarray:
    return np.array([[eigenenergy((n, m), p) for m in range(m_max + 1)] for n in range(N_PHOTON)])


def long_time_amplitudes(p: SystemParams, m_max: int = 8,
                         overlap: OverlapFn = displaced_overlap) -> AmplitudeSet:
    """Steady-state amplitudes C[n, m] for a mechanical ground initial state.

    Oscillating phases exp(-i E_00 t) are dropped; only moduli are
    observable. ``overlap`` may be swapped for the first-order expansion.
    """
    require_weak_drive(p, "perturbative")
    if m_max < 2:
        raise DomainError("m_max must be >= 2 to reach the two-phonon sidebands")
    alpha = p.g0 / p.omega_m
    # up[l, k] = <l~(n+1)|k~(n)>, identical for every n
    up = _overlap_table(m_max + 1, alpha, overlap)
    E = _energies(p, m_max)
    e00 = E[0, 0]
    Om, gc = p.Omega, p.gamma_c

    c = np.zeros((N_PHOTON, m_max + 1), dtype=complex)
    c[0, 0] = 1.0
    for n in range(1, N_PHOTON):
        denom = E[n] - e00 - 0.5j * n * gc
        c[n] = -math.sqrt(n) * Om * (up @ c[n - 1]) / denom

    # displaced vacuum weight outside the kept phonon range for the largest displacement
    reach = (N_PHOTON - 1) * alpha
    kept = sum(displaced_overlap(m, 0, reach) ** 2 for m in range(m_max + 1))
    return AmplitudeSet(c, p, m_max, truncation_remainder=max(0.0, 1.0 - kept))


def probabilities(a: AmplitudeSet) -> tuple:
    P = np.sum(np.abs(a.c) ** 2, axis=1)
    return float(P[1]), float(P[2]), float(P[3])


def g2_weak(P1: float, P2: float) -> float:
    if P1 <= 0:
        raise UndefinedCorrelationError("P1 = 0: g2 undefined")
    return 2.0 * P2 / P1 ** 2


def g3_weak(P1: float, P3: float) -> float:
    if P1 <= 0:
        raise UndefinedCorrelationError("P1 = 0: g3 undefined")
    return 6.0 * P3 / P1 ** 3


def perturbative_point(p: SystemParams, m_max: int = 8,
                       thresholds: Thresholds = Thresholds()) -> CorrelationPoint:
    amps = long_time_amplitudes(p, m_max)
    P1, P2, P3 = probabilities(amps)
    g2, g3 = g2_weak(P1, P2), g3_weak(P1, P3)
    return CorrelationPoint(P1, P2, P3, P1 + 2 * P2 + 3 * P3, g2, g3,
                            "perturbative", classify(g2, g3, thresholds))


def appendix_P1(p: SystemParams) -> float:
    """Single-photon probability with first-order overlaps (beta = g0/omega_m).

    Keeps the zero- and one-phonon sideband Lorentzians.
    """
    d = derived_scalars(p)
    beta = p.g0 / p.omega_m
    shifted = p.delta_c - d.eta - d.delta
    hw2 = (p.gamma_c / 2) ** 2
    return (p.Omega ** 2 / (shifted ** 2 + hw2)
            + p.Omega ** 2 * beta ** 2 / ((shifted + p.omega_m) ** 2 + hw2))


def appendix_P3(p: SystemParams, higher_branches: bool = False) -> float:
    """Three-photon probability from the first-order overlap expansion.

    By default only the leading zero-sideband term 6 Omega^6 |1/(E Q0 H)|^2
    is returned. ``higher_branches`` sums |V_m|^2 over m = 0..3.
    """
    gc = p.gamma_c
    e00 = eigenenergy((0, 0), p)
    E = eigenenergy((1, 0), p) - e00 - 0.5j * gc
    F = eigenenergy((1, 1), p) - e00 - 0.5j * gc
    H = eigenenergy((2, 0), p) - e00 - 1j * gc
    I = eigenenergy((2, 1), p) - e00 - 1j * gc
    J = eigenenergy((2, 2), p) - e00 - 1j * gc
    Q = [eigenenergy((3, m), p) - e00 - 1.5j * gc for m in range(4)]
    pre = 6.0 * p.Omega ** 6
    if not higher_branches:
        return pre * abs(1.0 / (E * Q[0] * H)) ** 2

    b = p.g0 / p.omega_m
    r2, r3 = math.sqrt(2.0), math.sqrt(3.0)
    total = 0.0
    for m in range(4):
        k = lambda j: 1.0 if m == j else 0.0  # noqa: E731
        s0 = k(0) + b * k(1)
        s1 = k(1) + r2 * b * k(2) - b * k(0)
        s2 = k(2) + r3 * b * k(3) - r2 * b * k(1)
        V = (s0 / (E * H) - b * b * s0 / (F * H) + b * s1 / (E * I)
             + b * s1 / (F * I) + r2 * b * b * s2 / (F * J)) / Q[m]
        total += abs(V) ** 2
    return pre * total


def _generator(p: SystemParams, m_max: int) -> np.ndarray:
    """Matrix of d/dt C = M C for the non-Hermitian few-photon dynamics."""
    size = m_max + 1
    up = _overlap_table(size, p.g0 / p.omega_m, displaced_overlap)
    E = _energies(p, m_max)
    M = np.zeros((N_PHOTON * size, N_PHOTON * size), dtype=complex)
    for n in range(N_PHOTON):
        blk = slice(n * size, (n + 1) * size)
        M[blk, blk] = np.diag(-0.5 * n * p.gamma_c - 1j * E[n])
        if n + 1 < N_PHOTON:
            nxt = slice((n + 1) * size, (n + 2) * size)
            coupling = -1j * math.sqrt(n + 1) * p.Omega
            M[nxt, blk] = coupling * up       # absorption n -> n+1
            M[blk, nxt] = coupling * up.T     # emission back into the drive
    return M


def max_stable_step(p: SystemParams) -> float:
    return 0.01 / max(p.omega_m, p.gamma_c, abs(p.delta_c))


def propagate_nonhermitian(p: SystemParams, t_final: float, dt: float | None = None,
                           m_max: int = 8) -> AmplitudeSet:
    """RK4 integration of the amplitude equations from |0>_a|0~(0)>_b.

    Returns raw amplitudes; the norm decays through cavity loss.
    """
    if t_final < 0:
        raise ConfigurationError("t_final must be >= 0")
    bound = max_stable_step(p)
    if dt is None:
        dt = t_final / max(1, math.ceil(t_final / bound)) if t_final > 0 else bound
    if dt <= 0 or dt > bound * (1 + 1e-12):
        raise ConfigurationError(f"dt={dt} outside (0, {bound}]")
    M = _generator(p, m_max)
    y = np.zeros(M.shape[0], dtype=complex)
    y[0] = 1.0
    steps = int(round(t_final / dt))
    # classical RK4 applied to a linear system is one fixed step matrix
    hM = dt * M
    hM2 = hM @ hM
    step = np.eye(M.shape[0]) + hM + hM2 / 2 + hM2 @ hM / 6 + hM2 @ hM2 / 24
    for _ in range(steps):
        y = step @ y
    return AmplitudeSet(y.reshape(N_PHOTON, m_max + 1), p, m_max)
