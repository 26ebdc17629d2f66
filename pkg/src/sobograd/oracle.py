"""Independent verification oracles.

Nothing here touches the analytic gradients: the finite-difference checks and
the dense minimizer only ever call the functional's value.
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .grid import Grid


def fd_directional_derivative(functional_fn, psi, direction, h: float = 1e-5) -> float:
    """Central difference ``[F(psi + h d) - F(psi - h d)] / (2h)``.

    When the two values agree to fewer than ~6 significant digits of ``F``
    (cancellation), a Richardson extrapolation over larger steps is used.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    if np.shape(direction) != np.shape(psi):
        raise ValueError("direction and field shapes differ")

    def central(step):
        fp = functional_fn(psi + step * direction)
        fm = functional_fn(psi - step * direction)
        return (fp - fm) / (2.0 * step), max(abs(fp), abs(fm))

    D, scale = central(h)
    if abs(D) * 2.0 * h < 1e-10 * scale and scale > 0:
        # difference lost to rounding; extrapolate from coarser steps
        D1, _ = central(100.0 * h)
        D2, _ = central(50.0 * h)
        D = (4.0 * D2 - D1) / 3.0
    return float(D)


def analytic_directional_derivative(grid: Grid, grad, direction) -> float:
    """``2 Re <d, grad F>``, the quantity a central difference estimates."""
    return 2.0 * grid.inner(direction, grad).real


def _to_real(z):
    return np.concatenate([z.real.ravel(), z.imag.ravel()])


def _to_complex(x, shape):
    n = x.size // 2
    return (x[:n] + 1j * x[n:]).reshape(shape)


def dense_minimize(functional_fn, grid: Grid, shape=None, restarts: int = 8, tol: float = 1e-12,
                   scale: float = 1.0, seed: int = 0, max_evals: int = 400_000):
    """Brute-force minimum of ``functional_fn`` over all complex fields on a tiny grid.

    Runs quasi-Newton minimizations with finite-difference gradients from
    ``restarts`` random complex starting points (amplitude ``scale``) and
    returns ``(best_field, best_value)``.
    """
    if shape is None:
        shape = grid.shape
    n_unknowns = int(np.prod(shape))
    if n_unknowns > 64 * 2:
        raise ValueError("dense_minimize is restricted to tiny grids (<= 64 unknowns per component)")
    rng = np.random.default_rng(seed)
    evals = 0

    def obj(x):
        nonlocal evals
        evals += 1
        if evals > max_evals:
            raise RuntimeError("dense_minimize evaluation budget exhausted")
        return functional_fn(_to_complex(x, shape))

    best_x, best_f = None, np.inf
    for _ in range(restarts):
        z0 = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
        res = minimize(obj, _to_real(z0), method="L-BFGS-B",
                       options={"ftol": tol, "gtol": 1e-10, "maxiter": 20_000, "maxfun": 10**7})
        # polish from the best point found so far
        res = minimize(obj, res.x, method="BFGS", options={"gtol": 1e-9, "maxiter": 2000})
        if res.fun < best_f:
            best_x, best_f = res.x, float(res.fun)
    return _to_complex(best_x, shape), best_f
