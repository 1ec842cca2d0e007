"""Cross-route invariant checks run by ``optoblockade validate``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analytic import g2_analytic, g3_analytic, spr_g2, tpr_g2, turning_point_pump
from .fock import Truncation, displaced_overlap, displacement_matrix
from .lindblad import liouvillian, trace_functional
from .params import FIG2, SystemParams
from .perturbative import (appendix_P1, appendix_P3, long_time_amplitudes, probabilities,
                           propagate_nonhermitian)
from .spectrum import spr_detuning, tpr_detuning


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))


def random_params(rng: np.random.Generator, g0_max: float = 1.0) -> SystemParams:
    return SystemParams(
        delta_c=float(rng.uniform(-1.5, 1.5)), g0=float(rng.uniform(0.05, g0_max)),
        G=float(rng.uniform(0.0, 1.0)), Omega=0.01, gamma_c=float(rng.uniform(0.05, 1.0)),
        gamma_m=0.001,
    )


def check_shift_covariance(rng, draws=1000, as_printed=False) -> Check:
    worst = 0.0
    for _ in range(draws):
        p = random_params(rng)
        delta = 2 * p.g0 * p.G / p.omega_m
        q = p.replace(delta_c=p.delta_c - delta, G=0.0)
        for f in (g2_analytic, lambda s: g3_analytic(s, as_printed=as_printed)):
            a, b = f(p), f(q)
            worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    return Check("analytic shift covariance", worst <= 1e-12, f"max rel dev {worst:.2e}")


def check_spr_tpr(rng, draws=100) -> Check:
    worst = 0.0
    for _ in range(draws):
        p = random_params(rng)
        worst = max(worst, abs(g2_analytic(p.replace(delta_c=spr_detuning(p))) - spr_g2(p)) / spr_g2(p),
                    abs(g2_analytic(p.replace(delta_c=tpr_detuning(p))) - tpr_g2(p)) / tpr_g2(p))
    return Check("SPR/TPR identities", worst <= 1e-12, f"max rel dev {worst:.2e}")


def check_appendix_equivalence(rng, draws=200, as_printed=False) -> Check:
    worst = 0.0
    for _ in range(draws):
        p = random_params(rng, g0_max=0.5)
        d = p.g0 ** 2 / p.omega_m + 2 * p.g0 * p.G / p.omega_m
        P1 = p.Omega ** 2 / ((p.delta_c - d) ** 2 + (p.gamma_c / 2) ** 2)
        g3 = 6 * appendix_P3(p) / P1 ** 3
        ref = g3_analytic(p, as_printed=as_printed)
        worst = max(worst, abs(g3 - ref) / ref)
    return Check("appendix g3 = 6 P3 / P1^3", worst <= 1e-10, f"max rel dev {worst:.2e}")


def brute_force_minimum(p: SystemParams, lo: float = 0.0, hi: float = 2.0, step: float = 1e-4) -> float:
    """Grid minimizer of g2_analytic over G: 1e-2 scan, then ``step`` around the best cell."""
    coarse = np.arange(lo, hi + 1e-12, 1e-2)
    best = coarse[int(np.argmin([g2_analytic(p.replace(G=float(G))) for G in coarse]))]
    fine = np.arange(max(lo, best - 0.02), min(hi, best + 0.02) + 1e-12, step)
    return float(fine[int(np.argmin([g2_analytic(p.replace(G=float(G))) for G in fine]))])


def check_turning_point(rng, draws=50) -> Check:
    worst = 0.0
    done = 0
    while done < draws:
        p = random_params(rng)
        Gstar = turning_point_pump(p.delta_c, p)
        if not 0.01 < Gstar < 1.99:
            continue
        worst = max(worst, abs(brute_force_minimum(p) - Gstar))
        done += 1
    return Check("turning point vs brute force", worst <= 2e-4, f"max |dG| {worst:.2e}")


def check_overlap_oracle() -> Check:
    worst = 0.0
    for alpha in (-1.5, -0.7, 0.3, 1.0, 1.5):
        D = displacement_matrix(60, alpha).data.real
        for l in range(21):
            for k in range(21):
                worst = max(worst, abs(displaced_overlap(l, k, alpha) - D[l, k]))
    return Check("Laguerre overlaps vs expm", worst <= 1e-8, f"max abs dev {worst:.2e}")


def check_propagation_oracle() -> Check:
    p = FIG2.replace(delta_c=0.25)
    ref = probabilities(long_time_amplitudes(p))
    got = probabilities(propagate_nonhermitian(p, 20 / p.gamma_c).normalized())
    worst = max(abs(g - r) / r for g, r in zip(got, ref))
    return Check("long-time amplitudes vs propagation", worst <= 0.05, f"max rel dev {worst:.2e}")


def check_appendix_small_coupling() -> Check:
    p = FIG2.replace(g0=0.05, delta_c=0.0025)
    exact = probabilities(long_time_amplitudes(p))
    beta2 = (p.g0 / p.omega_m) ** 2
    dev1 = abs(appendix_P1(p) - exact[0]) / exact[0]
    dev3 = abs(appendix_P3(p) - exact[2]) / exact[2]
    ok = dev1 <= 10 * beta2 and dev3 <= 10 * beta2
    return Check("appendix P1/P3 at g0=0.05", ok, f"rel devs {dev1:.2e}, {dev3:.2e}")


def check_trace_preservation(rng) -> Check:
    t = Truncation(4, 5)
    L = liouvillian(FIG2.replace(delta_c=0.3, G=0.2, nbar_m=0.3), t)
    tr = trace_functional(t.dim)
    worst = 0.0
    for _ in range(5):
        X = rng.normal(size=(t.dim, t.dim)) + 1j * rng.normal(size=(t.dim, t.dim))
        worst = max(worst, abs(tr @ (L @ X.reshape(-1, order="F"))) / np.linalg.norm(X))
    return Check("Liouvillian trace preservation", worst <= 1e-10, f"max {worst:.2e}")


def run_all(seed: int = 0, as_printed: bool = False) -> list:
    rng = np.random.default_rng(seed)
    return [
        check_shift_covariance(rng, as_printed=as_printed),
        check_spr_tpr(rng),
        check_appendix_equivalence(rng, as_printed=as_printed),
        check_turning_point(rng),
        check_overlap_oracle(),
        check_propagation_oracle(),
        check_appendix_small_coupling(),
        check_trace_preservation(rng),
    ]
