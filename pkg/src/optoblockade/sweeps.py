"""Parameter sweeps, feature extraction and figure presets."""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .analytic import Blockade, Thresholds, classify, g2_analytic, g3_analytic
from .errors import BlockadeError, DomainError
from .fock import Truncation
from .lindblad import PSD_TOL, RESIDUAL_TOL, master_point
from .params import FIG2, SystemParams, derived_scalars
from .perturbative import CorrelationPoint, perturbative_point

AXES = {"delta_c": "delta_c", "pump_G": "G"}
ROUTES = ("analytic", "perturbative", "master")
CSV_COLUMNS = ("axis_name", "axis_value", "route", "P1", "P2", "P3", "mean_n", "g2", "g3", "label")


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    start: float
    stop: float
    points: int
    routes: tuple = ("analytic",)
    base: SystemParams = FIG2
    truncation: Truncation = Truncation()
    thresholds: Thresholds = Thresholds()
    method: str = "auto"

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {sorted(AXES)}")
        if self.points < 2:
            raise DomainError("a sweep needs at least 2 points")
        if not self.start < self.stop:
            raise DomainError("sweep requires start < stop")
        bad = [r for r in self.routes if r not in ROUTES]
        if bad or not self.routes:
            raise DomainError(f"unknown routes {bad}; choose from {ROUTES}")
        object.__setattr__(self, "routes", tuple(self.routes))

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    def params_at(self, value: float) -> SystemParams:
        return self.base.replace(**{AXES[self.axis]: float(value)})

    def to_dict(self) -> dict:
        return {"axis": self.axis, "from": self.start, "to": self.stop, "points": self.points,
                "routes": list(self.routes), "method": self.method,
                "thresholds": {"one_pb": self.thresholds.one_pb, "pit": self.thresholds.pit}}


@dataclass(frozen=True)
class PointError:
    route: str
    message: str
    kind: str


@dataclass
class SweepResult:
    spec: SweepSpec
    grid: np.ndarray
    points: dict                      # route -> list[CorrelationPoint | PointError]
    features: dict = field(default_factory=dict)

    def series(self, route: str, name: str) -> np.ndarray:
        return np.array([getattr(pt, name) if isinstance(pt, CorrelationPoint) else np.nan
                         for pt in self.points[route]])

    def errors(self) -> list:
        return [(route, i, pt) for route, pts in self.points.items()
                for i, pt in enumerate(pts) if isinstance(pt, PointError)]

    def provenance(self) -> dict:
        return {
            "version": __version__,
            "sweep": self.spec.to_dict(),
            "params": self.spec.base.to_dict(),
            "truncation": self.spec.truncation.to_dict(),
            "solver": {"steady_state": self.spec.method, "residual_tol": RESIDUAL_TOL,
                       "psd_tol": PSD_TOL},
        }


def analytic_point(p: SystemParams, thresholds: Thresholds = Thresholds()) -> CorrelationPoint:
    g2, g3 = g2_analytic(p), g3_analytic(p)
    d = derived_scalars(p)
    P1 = p.Omega ** 2 / ((p.delta_c - d.eta - d.delta) ** 2 + (p.gamma_c / 2) ** 2)
    P2 = g2 * P1 ** 2 / 2
    P3 = g3 * P1 ** 3 / 6
    return CorrelationPoint(P1, P2, P3, P1 + 2 * P2 + 3 * P3, g2, g3, "analytic",
                            classify(g2, g3, thresholds))


def evaluate(route: str, p: SystemParams, truncation: Truncation = Truncation(),
             thresholds: Thresholds = Thresholds(), method: str = "auto") -> CorrelationPoint:
    if route == "analytic":
        return analytic_point(p, thresholds)
    if route == "perturbative":
        return perturbative_point(p, truncation.m_max, thresholds)
    if route == "master":
        return master_point(p, truncation, method, thresholds)
    raise DomainError(f"unknown route {route!r}")


def _evaluate_task(task):
    route, p, truncation, thresholds, method = task
    try:
        return evaluate(route, p, truncation, thresholds, method)
    except (BlockadeError, ArithmeticError, ValueError) as exc:
        return PointError(route, str(exc), type(exc).__name__)


def default_threads() -> int:
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def run_sweep(spec: SweepSpec, threads: int | None = None) -> SweepResult:
    """Evaluate every requested route on the grid; per-point failures are kept."""
    grid = spec.grid()
    tasks = [(route, spec.params_at(x), spec.truncation, spec.thresholds, spec.method)
             for route in spec.routes for x in grid]
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(tasks) < 2:
        results = [_evaluate_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_evaluate_task, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    n = len(grid)
    points = {route: results[i * n:(i + 1) * n] for i, route in enumerate(spec.routes)}
    result = SweepResult(spec, grid, points)
    for route in spec.routes:
        g2, g3 = result.series(route, "g2"), result.series(route, "g3")
        dips, peaks = find_extrema(grid, g2)
        result.features[route] = {"dips": dips, "peaks": peaks,
                                  "windows": find_windows(grid, g2, g3)}
    return result


def _parabolic_vertex(x0, x1, x2, y0, y1, y2) -> float:
    denom = (x0 - x1) * (x0 - x2) * (x1 - x2)
    A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / denom
    B = (x2 ** 2 * (y0 - y1) + x1 ** 2 * (y2 - y0) + x0 ** 2 * (y1 - y2)) / denom
    if A == 0:
        return x1
    return float(min(max(-B / (2 * A), x0), x2))


def find_extrema(x: Sequence[float], y: Sequence[float]) -> tuple:
    """Local minima and maxima by three-point test with parabolic refinement."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    dips, peaks = [], []
    for i in range(1, len(x) - 1):
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        if not np.all(np.isfinite([y0, y1, y2])):
            continue
        if y1 < y0 and y1 <= y2:
            dips.append(_parabolic_vertex(x[i - 1], x[i], x[i + 1], y0, y1, y2))
        elif y1 > y0 and y1 >= y2:
            peaks.append(_parabolic_vertex(x[i - 1], x[i], x[i + 1], y0, y1, y2))
    return dips, peaks


def _crossing(xa, xb, ca, cb) -> float:
    if not (np.isfinite(ca) and np.isfinite(cb)) or ca == cb:
        return float(xb if ca <= 0 else xa)
    return float(xa + (0.0 - ca) * (xb - xa) / (cb - ca))


def find_windows(x: Sequence[float], g2: Sequence[float], g3: Sequence[float]) -> list:
    """Maximal intervals where g2 > 1 and g3 < 1, ends interpolated to the crossing."""
    x = np.asarray(x, float)
    with np.errstate(invalid="ignore"):
        margin = np.minimum(np.asarray(g2, float) - 1.0, 1.0 - np.asarray(g3, float))
        inside = margin > 0
    windows = []
    i, n = 0, len(x)
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        lo = x[i] if i == 0 else _crossing(x[i - 1], x[i], margin[i - 1], margin[i])
        hi = x[j] if j == n - 1 else _crossing(x[j], x[j + 1], margin[j], margin[j + 1])
        windows.append((lo, hi))
        i = j + 1
    return windows


def _fmt(value) -> str:
    return format(float(value), ".17g")


def csv_rows(result: SweepResult) -> Iterable[list]:
    axis = result.spec.axis
    for route in result.spec.routes:
        for x, pt in zip(result.grid, result.points[route]):
            if isinstance(pt, CorrelationPoint):
                yield [axis, _fmt(x), route, _fmt(pt.P1), _fmt(pt.P2), _fmt(pt.P3),
                       _fmt(pt.mean_n), _fmt(pt.g2), _fmt(pt.g3), str(pt.label)]
            else:
                yield [axis, _fmt(x), route] + ["nan"] * 6 + ["error"]


def write_csv(result: SweepResult, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(csv_rows(result))


def to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    write_csv(result, buf)
    return buf.getvalue()


def sidecar(result: SweepResult) -> dict:
    data = result.provenance()
    data["features"] = result.features
    data["errors"] = [{"route": r, "index": i, "axis_value": float(result.grid[i]),
                       "kind": e.kind, "message": e.message} for r, i, e in result.errors()]
    return data


def write_outputs(result: SweepResult, csv_path) -> None:
    with open(csv_path, "w", newline="") as fh:
        write_csv(result, fh)
    with open(str(csv_path) + ".json", "w") as fh:
        json.dump(sidecar(result), fh, indent=2, sort_keys=True)


@dataclass
class BlockadeScan:
    delta_c: np.ndarray
    pumps: tuple
    labels: dict            # pump -> list[str] over delta_c
    one_pb: list            # per delta_c: pumps labelled OnePB
    two_pb: list            # per delta_c: pumps labelled TwoPB
    flagged: list           # delta_c values where both occur

    def flagged_intervals(self) -> list:
        mask = np.isin(self.delta_c, self.flagged)
        out, i = [], 0
        while i < len(mask):
            if mask[i]:
                j = i
                while j + 1 < len(mask) and mask[j + 1]:
                    j += 1
                out.append((float(self.delta_c[i]), float(self.delta_c[j])))
                i = j + 1
            else:
                i += 1
        return out


def simultaneous_blockade_scan(delta_c: Sequence[float], pump_values: Sequence[float],
                               base: SystemParams = FIG2, route: str = "perturbative",
                               truncation: Truncation = Truncation(),
                               thresholds: Thresholds = Thresholds(),
                               threads: int | None = 1) -> BlockadeScan:
    """Detunings where one pump strength gives OnePB and another gives TwoPB."""
    grid = np.asarray(delta_c, float)
    pumps = tuple(sorted(set(float(g) for g in pump_values)))
    if route not in ROUTES:
        raise DomainError(f"unknown route {route!r}")
    workers = default_threads() if threads is None else max(1, int(threads))
    labels = {}
    for G in pumps:
        # explicit grid so arbitrary (non-uniform) detuning lists are honoured
        tasks = [(route, base.replace(G=G, delta_c=float(x)), truncation, thresholds, "auto")
                 for x in grid]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                pts = list(pool.map(_evaluate_task, tasks))
        else:
            pts = [_evaluate_task(t) for t in tasks]
        labels[G] = [str(pt.label) if isinstance(pt, CorrelationPoint) else "error" for pt in pts]
    one = [[G for G in pumps if labels[G][i] == Blockade.ONE_PB.value] for i in range(len(grid))]
    two = [[G for G in pumps if labels[G][i] == Blockade.TWO_PB.value] for i in range(len(grid))]
    flagged = [float(grid[i]) for i in range(len(grid)) if one[i] and two[i]]
    return BlockadeScan(grid, pumps, labels, one, two, flagged)


# drive-induced heating and pump displacement populate phonon levels beyond 12
PRESET_TRUNCATION = Truncation(n_a=6, n_b=24)
FIGURES = ("fig2a", "fig2cd", "fig3", "fig4", "fig5", "fig6")


def figure_specs(name: str, points: int | None = None, routes: tuple | None = None) -> list:
    """(tag, SweepSpec) pairs reproducing the sweeps behind a figure."""
    if name not in FIGURES:
        raise DomainError(f"unknown figure {name!r}; choose from {FIGURES}")

    def spec(axis, lo, hi, n, default_routes, **changes):
        base = FIG2.replace(**changes)
        return SweepSpec(axis, lo, hi, points or n, routes or default_routes, base, PRESET_TRUNCATION)

    both = ("analytic", "master")
    if name == "fig2a":
        return [("G0", spec("delta_c", -1.0, 1.0, 401, both))]
    if name == "fig2cd":
        return [("sideband", spec("delta_c", -0.75, -0.55, 81, both)),
                ("zero_sideband", spec("delta_c", 0.30, 0.47, 69, both))]
    if name == "fig3":
        return [("G0", spec("delta_c", -1.0, 1.0, 401, both)),
                ("G0.3", spec("delta_c", -1.0, 1.0, 401, ("master",), G=0.3))]
    if name == "fig4":
        return [("delta0.3", spec("pump_G", 0.0, 1.0, 201, both, delta_c=0.3)),
                ("delta0.5", spec("pump_G", 0.0, 1.0, 201, both, delta_c=0.5))]
    if name == "fig5":
        return [("G0", spec("delta_c", -0.8, 0.6, 281, both)),
                ("G0.3", spec("delta_c", -0.5, 0.9, 281, both, G=0.3))]
    pert = ("perturbative", "master")
    return [("G0.18", spec("delta_c", 0.0, 1.5, 151, pert, G=0.18)),
            ("G0.3", spec("delta_c", 0.0, 1.5, 151, pert, G=0.3)),
            ("G1.2", spec("delta_c", 0.0, 1.5, 151, pert, G=1.2))]


def window_shifts(reference: list, shifted: list) -> list:
    """Pair windows of two sweeps by order and return midpoint differences."""
    return [0.5 * (b[0] + b[1]) - 0.5 * (a[0] + a[1]) for a, b in zip(reference, shifted)]
