import pytest

from optoblockade.params import FIG2
from optoblockade.sweeps import PRESET_TRUNCATION, SweepSpec, figure_specs, run_sweep


@pytest.fixture
def fig2():
    return FIG2


@pytest.fixture(scope="session")
def fig2a_sweep():
    """401-point master + analytic sweep over Delta_c in [-1, 1] at G = 0."""
    (_, spec), = figure_specs("fig2a")
    return run_sweep(spec, threads=1)


@pytest.fixture(scope="session")
def fig5_sweeps():
    """Window-resolving sweeps for G = 0 and G = 0.3 on grids offset by 0.3."""
    return {G: run_sweep(SweepSpec("delta_c", lo, lo + 1.4, 141, ("analytic", "master"),
                                   FIG2.replace(G=G), PRESET_TRUNCATION), threads=1)
            for G, lo in ((0.0, -0.8), (0.3, -0.5))}


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: (int(k.rstrip('ab')), k)):
        passed, detail = RESULTS[key]
        terminalreporter.write_line(f"criterion {key:<3} {'PASS' if passed else 'FAIL'}  {detail}")
