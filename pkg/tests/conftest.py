import numpy as np
import pytest

from fpualt import (build_reduced, eigendecompose, run_scenario,
                    to_quasi_harmonic)
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO / "scenarios"

SWEEP_A = 0.01
ODD_P = tuple(range(3, 49, 2))


@pytest.fixture(scope="session")
def systems():
    """Reduced system, modal basis and quasi-harmonic form for all odd p <= 47."""
    out = {}
    for p in ODD_P:
        red = build_reduced(p, SWEEP_A, 1.0)
        basis = eigendecompose(red)
        out[p] = (red, basis, to_quasi_harmonic(red, basis))
    return out


BOUNDED_SCENARIOS = ("fig_p3_unstable", "fig_p3_forcing", "fig_p3_center",
                     "fig_p5_forcing", "fig_p5_reverse", "cartoon_bounded",
                     "cartoon_forced")
DIVERGENT_SCENARIOS = ("fig_p3_divergent",)


@pytest.fixture(scope="session")
def scenario_results(tmp_path_factory):
    """Run every shipped scenario once; results shared across test modules."""
    out_dir = tmp_path_factory.mktemp("scenario_runs")
    results = {}
    for name in BOUNDED_SCENARIOS + DIVERGENT_SCENARIOS:
        results[name] = run_scenario(SCENARIO_DIR / f"{name}.scn", out_dir / name)
    return results


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)
