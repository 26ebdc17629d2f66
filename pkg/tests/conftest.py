import numpy as np
import pytest

from sobograd.grid import square_grid


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid16():
    return square_grid(16, 16.0)


def random_field(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def smooth_field(rng, grid, ncomp=None, width=2.0):
    """Random complex field with a Gaussian envelope (decays well inside the box)."""
    x1, x2 = grid.mesh
    env = np.exp(-(x1**2 + x2**2) / (2 * width**2))
    shape = grid.shape if ncomp is None else (ncomp,) + grid.shape
    return env * random_field(rng, shape)


# criterion -> part -> (ok, detail); filled by test_acceptance, printed at the end of the run
ACCEPTANCE = {}


def verdict(criterion: int, part: str, ok: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, {})[part] = (bool(ok), detail)
    assert ok, detail


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[crit]
        ok = all(p[0] for p in parts.values())
        detail = "; ".join(f"{name}: {d}" if name else d for name, (_, d) in parts.items())
        terminalreporter.write_line(f"criterion {crit:2d} {'PASS' if ok else 'FAIL'}  {detail}")
