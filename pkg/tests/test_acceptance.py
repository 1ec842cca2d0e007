"""One test per acceptance criterion; each records a PASS/FAIL line for the summary."""
import time

import numpy as np
import pytest

from optoblockade.analytic import g2_analytic, g3_analytic, spr_g2, tpr_g2, turning_point_pump
from optoblockade.fock import Truncation, displaced_overlap, displacement_matrix
from optoblockade.lindblad import (PSD_TOL, RESIDUAL_TOL, liouvillian, master_point, residual,
                                   steady_state, correlations_from_state)
from optoblockade.params import FIG2
from optoblockade.perturbative import (appendix_P1, appendix_P3, long_time_amplitudes,
                                       probabilities, propagate_nonhermitian)
from optoblockade.spectrum import spr_detuning, tpr_detuning
from optoblockade.sweeps import PRESET_TRUNCATION, simultaneous_blockade_scan, window_shifts
from optoblockade.validation import brute_force_minimum, random_params

RESULTS = {}


def record(key, passed, detail):
    key = str(key)
    RESULTS[key] = (bool(passed), detail)
    print(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")
    assert passed, detail


def test_01_master_g2_at_blockade_peak():
    out = []
    ok = True
    for G, ref in ((0.0, 3.71), (0.3, 0.33)):
        t0 = time.perf_counter()
        g2 = master_point(FIG2.replace(delta_c=0.55, G=G)).g2
        dt = time.perf_counter() - t0
        conv = master_point(FIG2.replace(delta_c=0.55, G=G), PRESET_TRUNCATION).g2
        ok &= abs(g2 - ref) <= 0.15 * ref and abs(conv - ref) <= 0.15 * ref and dt < 60
        out.append(f"G={G}: g2={g2:.4f} ({conv:.4f} at n_b=24; ref {ref} +-15%) in {dt:.2f}s")
    record("1", ok, "; ".join(out))


def test_02_dip_and_peak(fig2a_sweep):
    feats = fig2a_sweep.features["master"]
    dip = min(feats["dips"], key=lambda x: abs(x - 0.22))
    peak = min(feats["peaks"], key=lambda x: abs(x - 0.55))
    ok = abs(dip - 0.22) <= 0.03 and abs(peak - 0.55) <= 0.03
    record("2", ok, f"dip {dip:.4f} (0.22+-0.03), peak {peak:.4f} (0.55+-0.03), 401 points")


def _inside(windows, x):
    return any(lo <= x <= hi for lo, hi in windows)


def test_03_two_photon_windows(fig5_sweeps):
    parts, ok = [], True
    for G, pts in ((0.0, (-0.64, 0.385)), (0.3, (-0.34, 0.685))):
        for x in pts:
            pt = master_point(FIG2.replace(delta_c=x, G=G), PRESET_TRUNCATION)
            hit = pt.g2 > 1 and pt.g3 < 1
            ok &= hit
            parts.append(f"G={G} x={x}: g2={pt.g2:.3f} g3={pt.g3:.3f}")
    ref = fig5_sweeps[0.0].features["master"]["windows"]
    moved = fig5_sweeps[0.3].features["master"]["windows"]
    ref = [w for w in ref if _inside([w], -0.64) or _inside([w], 0.385)]
    moved = [w for w in moved if _inside([w], -0.34) or _inside([w], 0.685)]
    shifts = window_shifts(ref, moved) if len(ref) == len(moved) == 2 else []
    ok &= len(shifts) == 2 and all(abs(s - 0.30) <= 0.02 for s in shifts)
    parts.append("shifts " + ", ".join(f"{s:.4f}" for s in shifts) + " (0.30+-0.02)")
    record("3", ok, "; ".join(parts))


def test_04_shift_covariance():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        p = random_params(rng)
        q = p.replace(delta_c=p.delta_c - 2 * p.g0 * p.G / p.omega_m, G=0.0)
        for f in (g2_analytic, g3_analytic):
            worst = max(worst, abs(f(p) - f(q)) / abs(f(q)))
    record("4", worst <= 1e-12, f"max rel dev {worst:.2e} over 1000 draws (tol 1e-12)")


def test_05_spr_tpr():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        p = random_params(rng)
        spr, tpr = p.gamma_c ** 2 / (4 * (p.g0 ** 2 / p.omega_m) ** 2 + p.gamma_c ** 2), None
        tpr = 1 / spr
        for G in (0.0, p.G):
            q = p.replace(G=G)
            worst = max(worst, abs(g2_analytic(q.replace(delta_c=spr_detuning(q))) - spr) / spr,
                        abs(g2_analytic(q.replace(delta_c=tpr_detuning(q))) - tpr) / tpr)
    a, b = spr_g2(FIG2), tpr_g2(FIG2)
    ok = worst <= 1e-12 and round(a, 5) == 0.26471 and round(b, 4) == 3.7778
    record("5", ok, f"max rel dev {worst:.2e}; reference values {a:.5f}, {b:.4f}")


def test_06_turning_point():
    rng = np.random.default_rng(6)
    worst, used = 0.0, 0
    while used < 50:
        p = random_params(rng)
        Gs = turning_point_pump(p.delta_c, p)
        if not 0.01 < Gs < 1.99:
            continue
        worst = max(worst, abs(brute_force_minimum(p) - Gs))
        used += 1
    a = turning_point_pump(0.3, FIG2.replace(delta_c=0.3))
    b = turning_point_pump(0.5, FIG2.replace(delta_c=0.5))
    ok = worst <= 2e-4 and round(a, 5) == 0.12026 and round(b, 5) == 0.32026
    record("6", ok, f"max |G*-brute| {worst:.2e} over 50 draws; G*={a:.5f}, {b:.5f}")


def test_07_oracle_equivalence():
    worst = 0.0
    for dc in (0.25, 0.55, -0.64, 0.385):
        p = FIG2.replace(delta_c=dc)
        ref = probabilities(long_time_amplitudes(p))
        got = probabilities(propagate_nonhermitian(p, 20 / p.gamma_c).normalized())
        worst = max(worst, max(abs(g - r) / r for g, r in zip(got, ref)))
    p = FIG2.replace(g0=0.05, delta_c=0.0025)
    exact = probabilities(long_time_amplitudes(p))
    beta2 = (p.g0 / p.omega_m) ** 2
    d1 = abs(appendix_P1(p) - exact[0]) / exact[0]
    d3 = abs(appendix_P3(p) - exact[2]) / exact[2]
    ok = worst <= 0.05 and d1 <= 10 * beta2 and d3 <= 10 * beta2
    record("7", ok, f"propagation max rel dev {worst:.2e} (tol 5%); appendix devs "
                  f"{d1 / beta2:.2f} and {d3 / beta2:.2f} x beta^2 at g0=0.05")


# representative points of every figure preset
PRESET_POINTS = [(0.22, 0.0), (0.55, 0.0), (0.55, 0.3), (-0.64, 0.0), (0.385, 0.0), (-0.34, 0.3),
                 (0.685, 0.3), (0.3, 0.12026), (0.5, 0.32026), (0.3, 1.0), (0.5, 1.0),
                 (0.56, 0.18), (0.56, 0.3), (0.56, 1.2)]
REFERENCE = Truncation(8, 24)


def _truncation_survey(start):
    """Physicality of every solve and the largest relative g2/g3 move from ``start`` to (8,24)."""
    worst = {"res": 0.0, "trace": 0.0, "eig": 0.0, "step": 0.0, "where": None}
    for dc, G in PRESET_POINTS:
        p = FIG2.replace(delta_c=dc, G=G)
        pts = []
        for t in (start, REFERENCE):
            L = liouvillian(p, t)
            rho = steady_state(L)
            worst["res"] = max(worst["res"], residual(L, rho))
            worst["trace"] = max(worst["trace"], abs(rho.trace() - 1))
            worst["eig"] = min(worst["eig"], rho.min_eigenvalue())
            pts.append(correlations_from_state(rho))
        step = max(abs(pts[1].g2 - pts[0].g2) / pts[1].g2, abs(pts[1].g3 - pts[0].g3) / pts[1].g3)
        if step > worst["step"]:
            worst["step"], worst["where"] = step, (dc, G)
    return worst


@pytest.mark.slow
def test_08a_physicality_and_preset_truncation():
    w = _truncation_survey(PRESET_TRUNCATION)
    ok = (w["res"] <= RESIDUAL_TOL and w["trace"] <= 1e-12 and w["eig"] >= -PSD_TOL
          and w["step"] < 0.01)
    record("8a", ok, f"max |L rho| {w['res']:.1e}, trace err {w['trace']:.1e}, min eig {w['eig']:.1e}; "
                     f"preset (6,24) -> (8,24) max step {w['step']:.1e} at {w['where']}")


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="heating and pump displacement populate phonon levels "
                                       "beyond 12 at the preset drive; see decisions ledger")
def test_08b_default_truncation_step():
    w = _truncation_survey(Truncation(6, 12))
    record("8b", w["step"] < 0.01, f"(6,12) -> (8,24) max step {w['step']:.2%} at {w['where']} "
                                  "(tol 1%)")


def test_09_overlaps():
    worst = 0.0
    for alpha in np.linspace(-1.5, 1.5, 13):
        D = displacement_matrix(80, alpha).data.real
        for l in range(21):
            for k in range(21):
                worst = max(worst, abs(displaced_overlap(l, k, alpha) - D[l, k]))
    deficit = 0.0
    for alpha in np.linspace(-1.5, 1.5, 13):
        for l in range(21):
            total = sum(displaced_overlap(l, k, alpha) ** 2 for k in range(l + 60))
            deficit = max(deficit, abs(1 - total))
    record("9", worst <= 1e-8 and deficit <= 1e-8,
           f"max |Laguerre - expm| {worst:.1e}; row-completeness deficit {deficit:.1e}")


def test_10_simultaneous_blockade():
    dc = np.linspace(0.0, 1.5, 301)
    parts, ok = [], True
    for pumps in ((0.3, 1.2), (0.18, 0.3)):
        scan = simultaneous_blockade_scan(dc, pumps)
        spans = scan.flagged_intervals()
        ok &= bool(spans)
        parts.append(f"{pumps}: " + (", ".join(f"[{a:.3f},{b:.3f}]" for a, b in spans) or "none"))
    record("10", ok, "flagged 1PB+2PB detunings " + "; ".join(parts))
