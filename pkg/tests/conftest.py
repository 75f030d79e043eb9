import numpy as np
import pytest

from mlrh.model_core import ModelParams


def draw_params(rng, n, H=(0.0, 0.5)):
    """Random (params, a) over the ranges used by the invariant checks."""
    out = []
    for _ in range(n):
        m = ModelParams(
            H=float(rng.uniform(*H)),
            nu=float(rng.uniform(0.1, 2.0)),
            rho=float(rng.uniform(-0.9, 0.9)),
            lam=float(rng.uniform(0.0, 5.0)),
        )
        a = complex(rng.uniform(0.0, 20.0), -rng.uniform(0.0, 1.0))
        out.append((m, a))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.REPORT):
            terminalreporter.write_line(line)
