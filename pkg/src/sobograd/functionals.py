"""Energy, free-energy and error functionals with their L2 gradients.

Gradient convention: ``F(psi + d) = F(psi) + 2 Re<d, grad F(psi)> + O(|d|^2)``
with ``<f, g> = int conj(f) g``.

Every functional object exposes ``value``, ``gradient``, ``value_and_gradient``
and ``line(psi, d)``.  The latter returns ``phi(t) = F(psi - t d) - F(psi)``
evaluated without forming the (large, nearly cancelling) absolute values,
which is what lets the line search resolve decreases near machine precision.

Scalar fields are arrays of shape ``grid.shape``; two-component optical
fields have shape ``(2,) + grid.shape``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import Grid
from .operators import PotentialSpec, potential_field


class HermiticityError(ValueError):
    """A functional that must be real picked up a significant imaginary part."""


def _real(z: complex, what: str) -> float:
    if abs(z.imag) > 1e-10 * max(1.0, abs(z.real)):
        raise HermiticityError(f"{what} has imaginary part {z.imag:.3e}; grid too small or operator not hermitian")
    return float(z.real)


@dataclass(frozen=True)
class GpeParams:
    g: float = 100.0
    omega: float = 0.0
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    lam: float = 3.0
    N_target: float = 1.0

    def __post_init__(self):
        if self.g < 0:
            raise ValueError("g must be non-negative")
        if not 0.0 <= self.omega < 1.0:
            raise ValueError("omega must lie in [0, 1)")
        if self.lam <= 0 or self.N_target <= 0:
            raise ValueError("lambda and N_target must be positive")


@dataclass(frozen=True)
class OpticsParams:
    kappa: float = 0.5
    mu_u: float = 0.5
    mu_w: float = 1.0
    lambda_u: float = 30.0
    lambda_w: float = 30.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    @property
    def mu(self) -> np.ndarray:
        return np.array([self.mu_u, self.mu_w])

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([self.lambda_u, self.lambda_w])


def _flat(a):
    return np.ascontiguousarray(a, dtype=complex).reshape(a.shape[0], -1)


class _Cached:
    """Remembers the expensive linear image of the last field seen by ``value_and_gradient``."""

    def _remember(self, psi, image):
        self._last = (psi, image)

    def _recall(self, psi):
        last = getattr(self, "_last", None)
        if last is not None and last[0] is psi:
            return last[1]
        return None


# --------------------------------------------------------------------------- GPE
class GpeFunctional(_Cached):
    """Rotating Gross-Pitaevskii energy, optionally with the norm penalty.

    ``E = <psi, A psi> + g/2 int |psi|^4`` with ``A = -Lap/2 + V - Omega L_z``,
    so ``grad E = (A + g|psi|^2) psi``.  With ``free=True`` the penalty
    ``(N - lam)^2 / 2`` is added, contributing ``(N - lam) psi`` to the gradient.
    """

    def __init__(self, grid: Grid, params: GpeParams, free: bool = False):
        if grid.rank != 2 and params.omega != 0.0:
            raise ValueError("rotation needs a rank-2 grid")
        self.grid = grid
        self.params = params
        self.free = free
        self.V = potential_field(params.potential, grid)
        self._Vflat = np.ascontiguousarray(self.V.ravel())
        k = grid
        symbols = [0.5 * k.k_squared]
        if params.omega != 0.0:
            symbols += list(np.broadcast_arrays(*k._odd_derivative_symbols))
        self._symbols = np.stack([np.broadcast_to(s, grid.shape) for s in symbols])

    def kinetic_rotation(self, psi):
        """``(-Lap/2 - Omega L_z) psi`` from one forward and one batched inverse transform."""
        g = self.grid
        parts = g.ifft(self._symbols * g.fft(psi))
        out = parts[0]
        if self.params.omega != 0.0:
            x1, x2 = g.mesh
            # -Omega L_z psi = i Omega (x1 d2 - x2 d1) psi
            out = out + 1j * self.params.omega * (x1 * parts[2] - x2 * parts[1])
        return out

    def apply_linear(self, psi):
        """``A_Omega psi``."""
        return self.kinetic_rotation(psi) + self.V * psi

    def _evaluate(self, psi):
        g = self.grid
        K = self.kinetic_rotation(psi)
        nl, sv, s4, s2 = kernels.gpe_nonlinear(np.ascontiguousarray(psi, dtype=complex).ravel(), self._Vflat,
                                               self.params.g)
        dv = g.cell_volume
        quad = _real(g.inner(psi, K), "kinetic/rotation energy") + dv * sv
        E = quad + 0.5 * self.params.g * dv * s4
        grad = K + nl.reshape(g.shape)
        N = dv * s2
        self._remember(psi, K + self.V * psi)
        if self.free:
            E += 0.5 * (N - self.params.lam) ** 2
            grad = grad + (N - self.params.lam) * psi
        return E, grad

    def value(self, psi) -> float:
        return self._evaluate(psi)[0]

    def gradient(self, psi):
        return self._evaluate(psi)[1]

    def value_and_gradient(self, psi):
        return self._evaluate(psi)

    def chemical_potential(self, psi, grad=None) -> float:
        """Rayleigh quotient ``Re<psi, H psi> / N`` of the unconstrained operator."""
        if grad is None:
            grad = self.gradient(psi)
        N = self.grid.norm2(psi)
        if N == 0:
            raise ValueError("chemical potential of the zero field is undefined")
        mu = self.grid.inner(psi, grad).real / N
        if self.free:
            mu -= N - self.params.lam
        return mu

    def norms(self, psi):
        return (self.grid.norm2(psi),)

    def line(self, psi, d):
        """Exact quartic ``phi(t) = F(psi - t d) - F(psi)``."""
        g = self.grid
        dv = g.cell_volume
        Apsi = self._recall(psi)
        if Apsi is None:
            Apsi = self.apply_linear(psi)
        Ad = self.apply_linear(d)
        sa, sb, sar, sbr, saa, sab, sbb = kernels.line_moments(
            np.ascontiguousarray(psi, dtype=complex).ravel(), np.ascontiguousarray(d, dtype=complex).ravel())
        gh = 0.5 * self.params.g * dv
        c = np.zeros(5)
        c[1] = -2.0 * g.inner(d, Apsi).real - 4.0 * gh * sar
        c[2] = g.inner(d, Ad).real + gh * (2.0 * sbr + 4.0 * saa)
        c[3] = -4.0 * gh * sab
        c[4] = gh * sbb
        if self.free:
            N0 = dv * float(np.vdot(psi, psi).real)
            A, B = dv * sa, dv * sb
            # dN = -2tA + t^2 B ; dpen = dN^2/2 + dN (N0 - lam)
            m = N0 - self.params.lam
            c[1] += -2.0 * A * m
            c[2] += B * m + 2.0 * A * A
            c[3] += -2.0 * A * B
            c[4] += 0.5 * B * B
        return np.polynomial.Polynomial(c)


def gpe_energy(grid, psi, p: GpeParams) -> float:
    return GpeFunctional(grid, p).value(psi)


def gpe_gradient(grid, psi, p: GpeParams):
    return GpeFunctional(grid, p).gradient(psi)


def free_energy(grid, psi, p: GpeParams) -> float:
    return GpeFunctional(grid, p, free=True).value(psi)


def free_energy_gradient(grid, psi, p: GpeParams):
    return GpeFunctional(grid, p, free=True).gradient(psi)


# ----------------------------------------------------------------------- optics
class OpticsFunctional(_Cached):
    """Two-beam saturable energy ``int |grad u|^2 + |grad w|^2 + G(|u|^2 + |w|^2)``.

    ``G(rho) = (log(1 + kappa rho) - kappa rho) / kappa^2``; with ``free=True``
    each component gets the penalty ``(N_c - lambda_c)^2 / 2``.
    """

    def __init__(self, grid: Grid, params: OpticsParams, free: bool = True):
        self.grid = grid
        self.params = params
        self.free = free

    def _neg_lap(self, U):
        return self.grid.apply_symbol(U, self.grid.k_squared)

    def _evaluate(self, U):
        g = self.grid
        dv = g.cell_volume
        LU = self._neg_lap(U)
        nl, sG = kernels.saturable_terms(_flat(U), self.params.kappa)
        E = _real(g.inner(U, LU), "kinetic energy") + dv * sG
        grad = LU + nl.reshape(U.shape)
        self._remember(U, LU)
        if self.free:
            N = np.array(self.norms(U))
            dN = N - self.params.lambdas
            E += 0.5 * float(np.sum(dN**2))
            grad = grad + dN.reshape((2,) + (1,) * g.rank) * U
        return E, grad

    def value(self, U) -> float:
        return self._evaluate(U)[0]

    def gradient(self, U):
        return self._evaluate(U)[1]

    def value_and_gradient(self, U):
        return self._evaluate(U)

    def norms(self, U):
        return tuple(self.grid.norm2(U[c]) for c in range(U.shape[0]))

    def chemical_potentials(self, U, grad=None):
        """Per-component Rayleigh quotients of ``-Lap + G'(rho)``."""
        if grad is None:
            grad = self.gradient(U)
        out = []
        for c, N in enumerate(self.norms(U)):
            mu = self.grid.inner(U[c], grad[c]).real / N
            if self.free:
                mu -= N - self.params.lambdas[c]
            out.append(mu)
        return tuple(out)

    def line(self, U, d):
        g = self.grid
        dv = g.cell_volume
        LU = self._recall(U)
        if LU is None:
            LU = self._neg_lap(U)
        Ld = self._neg_lap(d)
        q1 = -2.0 * g.inner(d, LU).real
        q2 = g.inner(d, Ld).real
        rho0 = np.ascontiguousarray((U.real**2 + U.imag**2).sum(axis=0).ravel())
        alpha = np.ascontiguousarray((U.real * d.real + U.imag * d.imag).sum(axis=0).ravel())
        beta = np.ascontiguousarray((d.real**2 + d.imag**2).sum(axis=0).ravel())
        kappa = self.params.kappa
        pen = None
        if self.free:
            N0 = np.array(self.norms(U))
            A = np.array([g.inner(U[c], d[c]).real for c in range(U.shape[0])])
            B = np.array(self.norms(d))
            m = N0 - self.params.lambdas
            pen = (A, B, m)

        def phi(t):
            val = q1 * t + q2 * t * t + dv * kernels.saturable_line_delta(rho0, alpha, beta, t, kappa)
            if pen is not None:
                A, B, m = pen
                dN = t * (t * B - 2.0 * A)
                val += float(np.sum(0.5 * dN * dN + dN * m))
            return val

        return phi


def optics_energy(grid, U, p: OpticsParams) -> float:
    return OpticsFunctional(grid, p, free=False).value(U)


def optics_free_energy(grid, U, p: OpticsParams) -> float:
    return OpticsFunctional(grid, p, free=True).value(U)


def optics_free_energy_gradient(grid, U, p: OpticsParams):
    return OpticsFunctional(grid, p, free=True).gradient(U)


# ------------------------------------------------------------- error functional
class ErrorFunctional:
    """Squared residual ``F(U) = int |f(U)|^2`` of the stationary two-beam equations.

    ``f(U) = [-Lap + M + G'(|U|^2)] U`` with ``M = diag(mu_u, mu_w)``; its zeros
    are the stationary states ``exp(i M t) U`` of the dynamics generated by the
    saturable energy, ground or excited alike.
    """

    def __init__(self, grid: Grid, params: OpticsParams):
        self.grid = grid
        self.params = params
        self._mu = params.mu.reshape((2,) + (1,) * grid.rank)

    def apply_linear(self, U):
        """``(-Lap + M) U``."""
        return self.grid.apply_symbol(U, self.grid.k_squared) + self._mu * U

    def residual(self, U):
        f, s = kernels.error_residual(_flat(self.apply_linear(U)), _flat(U), self.params.kappa)
        return f.reshape(U.shape), s * self.grid.cell_volume

    def value(self, U) -> float:
        return self.residual(U)[1]

    def value_and_gradient(self, U):
        f, F = self.residual(U)
        Lf = self.apply_linear(f)
        grad = kernels.error_gradient_combine(_flat(Lf), _flat(U), _flat(f), self.params.kappa)
        return F, grad.reshape(U.shape)

    def gradient(self, U):
        return self.value_and_gradient(U)[1]

    def norms(self, U):
        return tuple(self.grid.norm2(U[c]) for c in range(U.shape[0]))

    def line(self, U, d):
        dv = self.grid.cell_volume
        kappa = self.params.kappa
        U_, d_ = _flat(U), _flat(d)
        LU, Ld = _flat(self.apply_linear(U)), _flat(self.apply_linear(d))
        F0 = kernels.error_line_value(LU, Ld, U_, d_, 0.0, kappa)

        def phi(t):
            return dv * (kernels.error_line_value(LU, Ld, U_, d_, t, kappa) - F0)

        return phi


def error_functional(grid, U, p: OpticsParams) -> float:
    return ErrorFunctional(grid, p).value(U)


def error_gradient(grid, U, p: OpticsParams):
    return ErrorFunctional(grid, p).gradient(U)
