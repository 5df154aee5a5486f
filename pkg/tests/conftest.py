import re

import numpy as np
import pytest

from bandsel import kernels

CRITERIA = {
    1: "OMP ties or trails the exhaustive L0 oracle; equality on orthogonal supports",
    2: "OMP invariants: monotone residual, support orthogonality, exact recovery",
    3: "self-exclusion: zero diagonal, zero bands never used",
    4: "ranking invariant to scaling the sample matrix by 7.3",
    5: "duplicate-cube recovery covers >= G-1 generator groups in >= 90% of seeds",
    6: "synthetic OCA with G selected bands within 2 points of full-band OCA",
    7: "metric identities (OCA / kappa reference values)",
    8: "evaluate command reruns byte-identical",
    9: "Salinas-A pixel sweep reproduces the reference OCA",
    10: "Pavia-U / Indian Pines reproduce the reference OCA",
    11: "top-weighted band matches the published leader",
    12: "OCA stays flat across the sampled-pixel sweep",
}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    """Run a test under each kernel backend, restoring selection afterwards."""
    try:
        kernels.set_backend(request.param)
    except Exception:
        pytest.skip(f"{request.param} backend unavailable")
    yield request.param
    kernels.set_backend(None)


@pytest.fixture(autouse=True)
def _reset_backend():
    yield
    kernels.set_backend(None)


def random_sample_matrix(rng, n_pixels, n_bands, zero_band=None):
    """Random overcomplete sample matrix (n_pixels < n_bands expected by callers)."""
    yhat = rng.normal(size=(n_pixels, n_bands))
    if zero_band is not None:
        yhat[:, zero_band] = 0.0
    return yhat


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL/SKIP line per acceptance criterion."""
    status_by_criterion = {}
    rank = {"failed": 3, "skipped": 2, "passed": 1}
    for status in ("passed", "skipped", "failed"):
        for report in terminalreporter.stats.get(status, []):
            match = re.search(r"test_criterion_(\d+)", getattr(report, "nodeid", ""))
            if not match:
                continue
            num = int(match.group(1))
            if rank[status] > rank.get(status_by_criterion.get(num, ""), 0):
                status_by_criterion[num] = status
    if not status_by_criterion:
        return
    labels = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP (dataset not prepared)"}
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for num in sorted(status_by_criterion):
        outcome = labels[status_by_criterion[num]]
        terminalreporter.write_line(
            f"  criterion {num:02d}: {outcome:<28} {CRITERIA.get(num, '')}"
        )
