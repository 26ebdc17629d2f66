import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sobograd.functionals import (ErrorFunctional, GpeFunctional, GpeParams, HermiticityError, OpticsFunctional,
                                  OpticsParams, _real, error_functional, free_energy, gpe_energy, gpe_gradient,
                                  optics_energy)
from sobograd.grid import square_grid
from sobograd.oracle import analytic_directional_derivative, fd_directional_derivative

from conftest import smooth_field

G64 = square_grid(64, 16.0)


def ground_gaussian(grid, N=1.0):
    return np.sqrt(N / np.pi) * np.exp(-grid.r_squared / 2) + 0j


def test_linear_ground_energy_is_one():
    psi = ground_gaussian(G64)
    p = GpeParams(g=0.0)
    assert gpe_energy(G64, psi, p) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(gpe_gradient(G64, psi, p), psi, atol=1e-12)


def test_free_energy_closed_form():
    # E = N for the scaled linear ground state, plus the penalty
    psi = ground_gaussian(G64, N=1.5)
    p = GpeParams(g=0.0, lam=3.0)
    assert free_energy(G64, psi, p) == pytest.approx(1.5 + 0.5 * 1.5**2, abs=1e-12)


def test_quartic_term_closed_form():
    # int |psi|^4 = N^2 / (2 pi) for the normalized Gaussian
    psi = ground_gaussian(G64)
    p = GpeParams(g=10.0)
    assert gpe_energy(G64, psi, p) == pytest.approx(1.0 + 5.0 / (2 * np.pi), abs=1e-12)


def test_rotation_shifts_vortex_energy():
    x1, x2 = G64.mesh
    psi = (x1 + 1j * x2) * np.exp(-G64.r_squared / 2) / np.sqrt(np.pi)
    assert gpe_energy(G64, psi, GpeParams(g=0.0, omega=0.6)) == pytest.approx(2.0 - 0.6, abs=1e-12)


def test_chemical_potential():
    psi = ground_gaussian(G64, N=2.0)
    F = GpeFunctional(G64, GpeParams(g=0.0, lam=3.0), free=True)
    assert F.chemical_potential(psi) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        F.chemical_potential(np.zeros(G64.shape, complex))


def test_params_validation():
    with pytest.raises(ValueError):
        GpeParams(g=-1)
    with pytest.raises(ValueError):
        GpeParams(omega=1.0)
    with pytest.raises(ValueError):
        OpticsParams(kappa=0)


def test_real_guard():
    assert _real(2.0 + 1e-14j, "x") == 2.0
    with pytest.raises(HermiticityError):
        _real(1.0 + 1e-3j, "x")


def test_optics_zero_field():
    g = square_grid(16, 10.0)
    U = np.zeros((2,) + g.shape, complex)
    p = OpticsParams()
    assert optics_energy(g, U, p) == 0.0
    assert error_functional(g, U, p) == 0.0
    F = OpticsFunctional(g, p)
    assert F.value(U) == pytest.approx(0.5 * (30.0**2 + 30.0**2))


def test_error_functional_vanishes_on_linear_mode():
    # with U small the response is linear, so the residual of a plane wave is (k^2 + mu) U
    g = square_grid(16, 2 * np.pi)
    U = np.stack([np.exp(1j * g.mesh[0]), np.zeros(g.shape)]) * 1e-6
    f, F = ErrorFunctional(g, OpticsParams(mu_u=0.5)).residual(U)
    np.testing.assert_allclose(f[0], 1.5 * U[0], rtol=1e-10)
    assert F == pytest.approx(1.5**2 * g.norm2(U), rel=1e-10)


FUNCTIONALS = {
    "gpe": lambda g: GpeFunctional(g, GpeParams(g=50.0, omega=0.4)),
    "gpe_free": lambda g: GpeFunctional(g, GpeParams(g=50.0, omega=0.4, lam=2.0), free=True),
    "optics": lambda g: OpticsFunctional(g, OpticsParams(), free=False),
    "optics_free": lambda g: OpticsFunctional(g, OpticsParams(lambda_u=3.0, lambda_w=5.0)),
    "error": lambda g: ErrorFunctional(g, OpticsParams()),
}
VECTOR = {"optics", "optics_free", "error"}


@pytest.mark.parametrize("name", sorted(FUNCTIONALS))
def test_line_restriction_matches_direct(name, rng):
    g = square_grid(16, 8.0)
    F = FUNCTIONALS[name](g)
    ncomp = 2 if name in VECTOR else None
    psi, d = smooth_field(rng, g, ncomp), smooth_field(rng, g, ncomp)
    F.value_and_gradient(psi)  # primes the cached linear image
    phi = F.line(psi, d)
    for t in (1e-3, 0.1, 0.7):
        assert phi(t) == pytest.approx(F.value(psi - t * d) - F.value(psi), rel=1e-9, abs=1e-11)


@pytest.mark.parametrize("name", sorted(FUNCTIONALS))
def test_gradient_against_finite_differences(name, rng):
    g = square_grid(16, 8.0)
    F = FUNCTIONALS[name](g)
    ncomp = 2 if name in VECTOR else None
    psi, d = smooth_field(rng, g, ncomp), smooth_field(rng, g, ncomp)
    fd = fd_directional_derivative(F.value, psi, d)
    an = analytic_directional_derivative(g, F.gradient(psi), d)
    assert an == pytest.approx(fd, rel=1e-6)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.9))
def test_energy_real_and_gauge_invariant(seed, omega):
    rng = np.random.default_rng(seed)
    g = square_grid(16, 8.0)
    psi = smooth_field(rng, g)
    p = GpeParams(g=20.0, omega=omega)
    E = gpe_energy(g, psi, p)
    assert E == pytest.approx(gpe_energy(g, np.exp(0.7j) * psi, p), rel=1e-12)
