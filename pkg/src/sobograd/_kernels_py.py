"""Pure-numpy pointwise kernels (fallback for the compiled ``_kernels`` module).

Every kernel takes flattened contiguous arrays: scalar fields as ``(n,)``,
multi-component fields as ``(C, n)``.  Sums are plain lattice sums; callers
multiply by the cell volume.
"""
import numpy as np

BACKEND = "python"


def gpe_nonlinear(psi, V, g):
    """Return ``(V + g|psi|^2) psi`` and the sums of ``V|psi|^2``, ``|psi|^4``, ``|psi|^2``."""
    rho = psi.real**2 + psi.imag**2
    out = (V + g * rho) * psi
    return out, float(np.dot(V, rho)), float(np.dot(rho, rho)), float(rho.sum())


def line_moments(psi, d):
    """Moments of ``rho(t) = |psi - t d|^2`` needed for an exact quartic line restriction.

    With ``a = Re(conj(psi) d)``, ``b = |d|^2``, ``r = |psi|^2`` returns
    ``(sum a, sum b, sum a r, sum b r, sum a^2, sum a b, sum b^2)``.
    """
    a = psi.real * d.real + psi.imag * d.imag
    b = d.real**2 + d.imag**2
    r = psi.real**2 + psi.imag**2
    return (float(a.sum()), float(b.sum()), float(np.dot(a, r)), float(np.dot(b, r)),
            float(np.dot(a, a)), float(np.dot(a, b)), float(np.dot(b, b)))


def saturable_terms(U, kappa):
    """Return ``G'(rho) U`` and ``sum G(rho)`` for ``rho = sum_c |U_c|^2``."""
    rho = (U.real**2 + U.imag**2).sum(axis=0)
    x = kappa * rho
    gp = -rho / (1.0 + x)
    G = (np.log1p(x) - x) / kappa**2
    return gp * U, float(G.sum())


def saturable_line_delta(rho0, alpha, beta, t, kappa):
    """``sum [G(rho0 - 2 t alpha + t^2 beta) - G(rho0)]`` without cancellation."""
    drho = t * (t * beta - 2.0 * alpha)
    y = kappa * drho
    return float(np.sum(np.log1p(y / (1.0 + kappa * rho0)) - y)) / kappa**2


def error_residual(LU, U, kappa):
    """``f = LU + G'(rho) U`` and ``sum |f|^2``."""
    rho = (U.real**2 + U.imag**2).sum(axis=0)
    f = LU - (rho / (1.0 + kappa * rho)) * U
    return f, float(np.vdot(f, f).real)


def error_line_value(LU, Ld, U, d, t, kappa):
    """``sum |f(U - t d)|^2`` given ``LU`` and ``Ld`` for the linear part."""
    Ut = U - t * d
    rho = (Ut.real**2 + Ut.imag**2).sum(axis=0)
    f = (LU - t * Ld) - (rho / (1.0 + kappa * rho)) * Ut
    return float(np.vdot(f, f).real)


def error_gradient_combine(Lf, U, f, kappa):
    """``Lf + G'(rho) f + G''(rho) (U^dag f + f^dag U) U``; ``Lf`` is the linear part only."""
    rho = (U.real**2 + U.imag**2).sum(axis=0)
    q = 1.0 + kappa * rho
    s = 2.0 * (U.real * f.real + U.imag * f.imag).sum(axis=0)
    return Lf - (rho / q) * f - (s / q**2) * U
