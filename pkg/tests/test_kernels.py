"""The compiled kernels and the numpy fallback must agree."""
import numpy as np
import pytest

from sobograd import _kernels_py, kernels

try:
    from sobograd import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def _c(rng, shape):
    return np.ascontiguousarray(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def _close(a, b):
    if isinstance(a, tuple):
        assert len(a) == len(b)
        for x, y in zip(a, b):
            _close(x, y)
    elif isinstance(a, np.ndarray):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    else:
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def _cases(rng):
    n = 97
    psi, d, V = _c(rng, n), _c(rng, n), np.ascontiguousarray(rng.random(n))
    U, W = _c(rng, (2, n)), _c(rng, (2, n))
    LU, Ld = _c(rng, (2, n)), _c(rng, (2, n))
    rho0 = np.ascontiguousarray((abs(U) ** 2).sum(0))
    alpha = np.ascontiguousarray((U.real * W.real + U.imag * W.imag).sum(0))
    beta = np.ascontiguousarray((abs(W) ** 2).sum(0))
    return {
        "gpe_nonlinear": (psi, V, 3.0),
        "line_moments": (psi, d),
        "saturable_terms": (U, 0.5),
        "saturable_line_delta": (rho0, alpha, beta, 0.3, 0.5),
        "error_residual": (LU, U, 0.5),
        "error_line_value": (LU, Ld, U, W, 0.2, 0.5),
        "error_gradient_combine": (LU, U, W, 0.5),
    }


@needs_ext
@pytest.mark.parametrize("name", ["gpe_nonlinear", "line_moments", "saturable_terms", "saturable_line_delta",
                                  "error_residual", "error_line_value", "error_gradient_combine"])
def test_backends_agree(name):
    args = _cases(np.random.default_rng(7))[name]
    _close(getattr(compiled, name)(*args), getattr(_kernels_py, name)(*args))


def test_selected_backend_reported():
    assert kernels.BACKEND in ("cython", "python")
    if compiled is not None:
        assert kernels.BACKEND == "cython"


def test_saturable_line_delta_matches_direct_difference():
    rng = np.random.default_rng(3)
    U, W = _c(rng, (2, 50)), _c(rng, (2, 50))
    rho0 = (abs(U) ** 2).sum(0)
    alpha = (U.real * W.real + U.imag * W.imag).sum(0)
    beta = (abs(W) ** 2).sum(0)
    t = 0.7
    G = lambda r: (np.log1p(0.5 * r) - 0.5 * r) / 0.25
    direct = np.sum(G((abs(U - t * W) ** 2).sum(0)) - G(rho0))
    assert kernels.saturable_line_delta(rho0, alpha, beta, t, 0.5) == pytest.approx(direct, rel=1e-10)


def test_pure_python_env_switch(monkeypatch):
    import importlib

    monkeypatch.setenv("SOBOGRAD_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("SOBOGRAD_PURE_PYTHON")
        importlib.reload(kernels)
