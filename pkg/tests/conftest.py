from __future__ import annotations

import numpy as np
import pytest

from canardkit.manifold import fold_points
from canardkit.model import Params

THETA, ETA, EPS = 0.05, 0.176, 0.005

# lines collected by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def section6():
    return Params(delta=0.4, theta=THETA, eta=ETA, epsilon=EPS)


@pytest.fixture(scope="session")
def folds6():
    return fold_points(THETA, ETA)


def two_fold_samples(n, seed=0, theta_range=(0.005, 0.5), eta_range=(0.01, 0.6)):
    """Random (theta, eta) pairs with two non-degenerate folds."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        th = rng.uniform(*theta_range)
        eta = rng.uniform(*eta_range)
        fps = fold_points(th, eta)
        if len(fps) == 2 and not any(f.degenerate for f in fps) and fps[1].u - fps[0].u > 1e-3:
            out.append((th, eta))
    return out


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
