"""Minimization drivers.

Two drivers share one trace format:

* ``imaginary_time_run``: norm-preserving gradient flow integrated with an
  embedded Runge-Kutta-Fehlberg 4(5) pair, one accepted step per outer
  iteration followed by renormalization.
* ``steepest_descent_run``: discrete descent ``psi <- psi - t P grad F`` with a
  bracketing + golden-section line search.

Both take any ``Preconditioner`` (``sobolev.build_preconditioner``).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .sobolev import Preconditioner

METHODS = ("imaginary_time", "steepest_descent")


@dataclass(frozen=True)
class DescentConfig:
    method: str = "steepest_descent"
    preconditioner: str = "sobolev"
    residual_tol: float = 1e-8
    energy_tol: float = 1e-12
    max_iters: int = 20000
    # when set, success means F <= value_tol instead of a small gradient
    value_tol: float | None = None
    rkf_initial_step: float = 1e-2
    rkf_tol_start: float = 1e-4
    rkf_tol_factor: float = 0.1
    rkf_tol_floor: float = 1e-10
    rkf_min_step: float = 1e-12
    max_norm_drift: float = 0.1
    bracket_growth: float = 2.0
    golden_rel_width: float = 1e-4
    line_max_evals: int = 50
    stagnation_window: int = 25

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        for name in ("residual_tol", "energy_tol", "rkf_initial_step", "rkf_tol_start", "rkf_tol_floor",
                     "golden_rel_width", "rkf_min_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.value_tol is not None and not self.value_tol > 0:
            raise ValueError("value_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.rkf_tol_factor < 1 or self.bracket_growth <= 1:
            raise ValueError("tolerance factor must lie in (0, 1) and bracket growth exceed 1")

    def with_(self, **kw) -> "DescentConfig":
        return replace(self, **kw)


@dataclass
class TraceRow:
    iteration: int
    energy: float
    residual: float
    norms: tuple
    mu: float
    wall_ms: float


@dataclass
class ConvergenceReport:
    iterations: int
    converged: bool
    status: str
    trace: list = field(default_factory=list)
    wall_time: float = 0.0
    final_state: np.ndarray | None = None
    evaluations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def final_energy(self) -> float:
        return self.trace[-1].energy

    @property
    def final_residual(self) -> float:
        return self.trace[-1].residual

    @property
    def final_mu(self) -> float:
        return self.trace[-1].mu

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.trace])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.residual for r in self.trace])

    @property
    def stagnated(self) -> bool:
        """True when the run stalled away from a critical point (possible saddle)."""
        return self.status == "stagnated"


def _l2(a) -> float:
    return math.sqrt(float(np.vdot(a, a).real))


def renormalize(f, N_target, grid):
    """Scale ``f`` (or each component of a vector field) to ``int |f|^2 = N_target``.

    ``N_target`` may be a scalar or, for vector fields of shape ``(C,) + grid.shape``,
    a sequence of per-component targets.
    """
    f = np.asarray(f)
    targets = np.atleast_1d(np.asarray(N_target, dtype=float))
    if f.ndim == grid.rank:
        N = grid.norm2(f)
        if not N > 0:
            raise ValueError("cannot renormalize the zero field")
        return f * math.sqrt(targets[0] / N)
    if targets.size == 1:
        targets = np.repeat(targets, f.shape[0])
    out = np.empty_like(f)
    for c in range(f.shape[0]):
        N = grid.norm2(f[c])
        if not N > 0:
            raise ValueError(f"component {c} is zero; cannot renormalize")
        out[c] = f[c] * math.sqrt(targets[c] / N)
    return out


def eigenvalue_estimate(psi, gradient_fn, grid) -> float:
    """Rayleigh quotient ``Re<psi, H psi> / <psi, psi>`` with ``H psi = gradient_fn(psi)``."""
    N = grid.norm2(psi)
    if not N > 0:
        raise ValueError("eigenvalue of the zero field is undefined")
    return grid.inner(psi, gradient_fn(psi)).real / N


# --------------------------------------------------------------- RKF45 stepper
# Fehlberg 4(5) tableau
_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
_B5 = (16 / 135, 0.0, 6656 / 12825, 28561 / 56430, -9 / 50, 2 / 55)


def rkf45_step(rhs, y, h, k1=None):
    """One Fehlberg step of ``y' = rhs(y)``.

    Returns the 4th-order solution and the norm of the embedded error estimate
    ``|y5 - y4|``.  ``k1 = rhs(y)`` may be passed in when already known.
    """
    ks = [rhs(y) if k1 is None else k1]
    for i in range(1, 6):
        yi = y.copy()
        for a, k in zip(_A[i], ks):
            if a:
                yi += (h * a) * k
        ks.append(rhs(yi))
    y4 = y.copy()
    err = np.zeros_like(y)
    for b4, b5, k in zip(_B4, _B5, ks):
        if b4:
            y4 += (h * b4) * k
        if b5 - b4:
            err += (h * (b5 - b4)) * k
    return y4, _l2(err)


# ------------------------------------------------------------ imaginary time
def _tangent_direction(nu, grad, P, grid):
    """Norm-tangent descent direction in the metric defined by ``P``.

    ``P grad - (<nu, P grad> / <nu, P nu>) P nu``: vanishes exactly at the
    eigenstates ``grad = mu nu`` and is L2-orthogonal to ``nu``, so the flow
    keeps the norm to first order and decreases the energy for any positive ``P``.
    """
    Pg = P(grad)
    if P.kind == "identity":
        Pnu = nu
    else:
        Pnu = P(nu)
    c = grid.inner(nu, Pg).real / grid.inner(nu, Pnu).real
    return Pg - c * Pnu


def imaginary_time_run(psi0, functional, N_target: float, P: Preconditioner, cfg: DescentConfig,
                       observe=None, callback=None) -> ConvergenceReport:
    """Constrained energy minimization by normalized gradient flow.

    ``functional`` provides ``value_and_gradient``.  Each outer iteration takes
    one accepted RKF45 step of ``sigma' = -D(sigma)`` (``D`` the tangent
    direction above) from the current normalized state and renormalizes.  A
    step is rejected when its error estimate exceeds the current tolerance,
    when the norm drifts by more than ``max_norm_drift``, or when the energy
    rises.  The error estimate is taken per unit step, relative to ``|nu|``.  The tolerance tightens by ``rkf_tol_factor`` whenever the residual
    falls below ten times its value.
    """
    grid = P.grid
    if not N_target > 0:
        raise ValueError("N_target must be positive")
    t_start = time.perf_counter()
    nu = renormalize(np.array(psi0, dtype=complex), N_target, grid)
    E, grad = functional.value_and_gradient(nu)
    evals = 1

    def rhs(y):
        nonlocal evals
        evals += 1
        return -_tangent_direction(y, functional.gradient(y), P, grid)

    h = cfg.rkf_initial_step
    tol = cfg.rkf_tol_start
    trace = []
    status = "max_iters"
    converged = False
    it = 0
    while True:
        N = grid.norm2(nu)
        mu = grid.inner(nu, grad).real / N
        residual = _l2(grad - mu * nu) * math.sqrt(grid.cell_volume) / math.sqrt(N)
        norms = (N,) if observe is None else observe(nu, grad)[0]
        row = TraceRow(it, E, residual, norms, mu, 1e3 * (time.perf_counter() - t_start))
        trace.append(row)
        if callback is not None:
            callback(row)
        if residual <= cfg.residual_tol:
            converged, status = True, "converged"
            break
        if it >= cfg.max_iters:
            break
        while tol > cfg.rkf_tol_floor and residual < 10.0 * tol:
            tol = max(tol * cfg.rkf_tol_factor, cfg.rkf_tol_floor)
        k1 = -_tangent_direction(nu, grad, P, grid)
        nu_norm = _l2(nu)
        while True:
            sigma, err = rkf45_step(rhs, nu, h, k1=k1)
            # error per unit step keeps stiff modes from parking at the tolerance level
            err /= nu_norm * h
            ok = err <= tol
            fac = 0.9 * (tol / err) ** 0.2 if err > 0 else 5.0
            if ok:
                drift = abs(grid.norm2(sigma) / N_target - 1.0)
                if drift <= cfg.max_norm_drift:
                    new_nu = renormalize(sigma, N_target, grid)
                    E_new, g_new = functional.value_and_gradient(new_nu)
                    evals += 1
                    if E_new <= E + 1e-10 * max(1.0, abs(E)):
                        break
                ok = False
                fac = 0.5
            h *= max(0.1, min(fac, 0.9))
            if h < cfg.rkf_min_step:
                status = "step_underflow"
                break
        if status == "step_underflow":
            break
        nu, E, grad = new_nu, E_new, g_new
        h *= min(5.0, max(1.0, fac))
        it += 1
    return ConvergenceReport(it, converged, status, trace, time.perf_counter() - t_start, nu, evals,
                             {"final_step": h, "final_tolerance": tol})


# ----------------------------------------------------------- steepest descent
class LineSearchFailure(RuntimeError):
    pass


def line_minimize(phi, t0: float, growth: float = 2.0, rel_width: float = 1e-4, max_evals: int = 50,
                  t_min: float = 1e-16):
    """Minimize ``phi`` on ``t > 0`` given ``phi(0) = 0``; returns ``(t, phi(t), evaluations)``.

    Bracketing by repeated scaling of ``t0`` by ``growth``, then golden-section
    refinement until the bracket is narrower than ``rel_width * t``.  Raises
    ``LineSearchFailure`` when no decrease is found down to ``t_min``.
    """
    n = 0

    def f(t):
        nonlocal n
        n += 1
        return phi(t)

    t = t0
    ft = f(t)
    if ft < 0:
        lo = 0.0
        while n < max_evals:
            hi = t * growth
            fh = f(hi)
            if fh >= ft:
                break
            lo, t, ft = t, hi, fh
        else:
            return t, ft, n
    else:
        hi = t
        t = t / growth
        ft = f(t)
        while not ft < 0:
            if t < t_min or n >= max_evals:
                raise LineSearchFailure(f"no decrease found down to step {t:.3e}")
            hi = t
            t /= growth
            ft = f(t)
        lo = 0.0
    # golden section on [lo, hi] with interior point t
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    while (b - a) > rel_width * t and n < max_evals:
        if (b - t) > (t - a):
            u = t + (1.0 - invphi) * (b - t)
            fu = f(u)
            if fu < ft:
                a, t, ft = t, u, fu
            else:
                b = u
        else:
            u = t - (1.0 - invphi) * (t - a)
            fu = f(u)
            if fu < ft:
                b, t, ft = t, u, fu
            else:
                a = u
    return t, ft, n


class _PlainFunctional:
    """Adapter for bare ``value``/``gradient`` callables (line restriction by direct differences)."""

    def __init__(self, value_fn, gradient_fn):
        self.value = value_fn
        self.gradient = gradient_fn

    def value_and_gradient(self, psi):
        return self.value(psi), self.gradient(psi)

    def line(self, psi, d):
        F0 = self.value(psi)
        return lambda t: self.value(psi - t * d) - F0


def steepest_descent_run(psi0, functional, P: Preconditioner, cfg: DescentConfig, gradient_fn=None,
                         observe=None, callback=None) -> ConvergenceReport:
    """Discrete preconditioned steepest descent with an exact-ish line search.

    ``functional`` is either an object with ``value_and_gradient`` and
    ``line`` (see ``functionals``) or a plain value callable, in which case
    ``gradient_fn`` must be given.  The residual is ``|grad F| / |psi|``.
    ``observe(psi, grad) -> (norms, mu)`` fills the per-iteration trace.
    """
    if gradient_fn is not None:
        functional = _PlainFunctional(functional, gradient_fn)
    grid = P.grid
    t_start = time.perf_counter()
    psi = np.array(psi0, dtype=complex)
    F, grad = functional.value_and_gradient(psi)
    evals = 1
    trace = []
    status = "max_iters"
    converged = False
    step = 1.0
    small = 0
    best_residual = math.inf
    it = 0
    sqrt_dv = math.sqrt(grid.cell_volume)
    while True:
        psi_norm = _l2(psi) * sqrt_dv
        residual = _l2(grad) * sqrt_dv / psi_norm if psi_norm > 0 else _l2(grad) * sqrt_dv
        if observe is None:
            norms, mu = (psi_norm**2,), float("nan")
        else:
            norms, mu = observe(psi, grad)
        row = TraceRow(it, F, residual, tuple(norms), mu, 1e3 * (time.perf_counter() - t_start))
        trace.append(row)
        if callback is not None:
            callback(row)
        if cfg.value_tol is not None:
            # squared-residual functionals: success is reaching the zero, a
            # vanishing gradient above it is a trap
            if F <= cfg.value_tol:
                converged, status = True, "converged"
                break
            if residual <= cfg.residual_tol:
                status = "trapped"
                break
        elif residual <= cfg.residual_tol or F == 0.0:
            converged, status = True, "converged"
            break
        if it >= cfg.max_iters:
            break
        if small >= cfg.stagnation_window:
            status = "stagnated"
            break
        d = P(grad)
        phi = functional.line(psi, d)
        d_norm = _l2(d) * sqrt_dv
        t_min = 1e-16 * max(psi_norm, 1e-300) / d_norm if d_norm > 0 else 1e-16
        try:
            t, dF, n = line_minimize(phi, step, cfg.bracket_growth, cfg.golden_rel_width, cfg.line_max_evals,
                                     t_min=t_min)
        except LineSearchFailure:
            status = "line_search_failed"
            break
        evals += n
        psi = psi - t * d
        F_new, grad = functional.value_and_gradient(psi)
        evals += 1
        # a stall needs both a negligible decrease and no progress in the residual;
        # near a minimum F moves like residual**2, so the decrease alone says little
        if residual < 0.999 * best_residual:
            best_residual = residual
            small = 0
        elif abs(F) > 0 and (F - F_new) < cfg.energy_tol * abs(F):
            small += 1
        else:
            small = 0
        F = F_new
        step = t
        it += 1
    return ConvergenceReport(it, converged, status, trace, time.perf_counter() - t_start, psi, evals)
