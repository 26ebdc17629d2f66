import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sobograd.grid import make_grid, square_grid, wavenumbers_1d


def test_wavenumbers_even_odd():
    np.testing.assert_allclose(wavenumbers_1d(4, 2 * np.pi), [0, 1, 2, -1])
    # odd sizes use the symmetric range
    np.testing.assert_allclose(wavenumbers_1d(3, 1.0), [0, 2 * np.pi, -2 * np.pi])


def test_make_grid_validation():
    with pytest.raises(ValueError):
        make_grid([1, 8], [1.0, 1.0])
    with pytest.raises(ValueError):
        make_grid([8, 8], [1.0, -1.0])
    with pytest.raises(ValueError):
        make_grid([8], [1.0, 2.0])


def test_grid_geometry():
    g = square_grid(8, 4.0)
    assert g.shape == (8, 8)
    assert g.spacings == (0.5, 0.5)
    assert g.origins == (-2.0, -2.0)
    assert g.mesh[0][0, 0] == -2.0
    assert g.volume == 16.0


def test_forward_inverse_roundtrip(rng, grid16):
    f = rng.standard_normal(grid16.shape) + 1j * rng.standard_normal(grid16.shape)
    back = grid16.inverse_transform(grid16.forward_transform(f))
    np.testing.assert_allclose(back, f, atol=1e-13)


def test_forward_transform_of_plane_wave():
    g = square_grid(8, 2 * np.pi)
    x1, x2 = g.mesh
    c = g.forward_transform(np.exp(1j * (2 * x1 - x2)))
    idx = np.unravel_index(np.argmax(abs(c)), c.shape)
    assert (g.wavenumbers[0][idx[0]], g.wavenumbers[1][idx[1]]) == (2.0, -1.0)
    assert abs(c[idx] - 1.0) < 1e-13


def test_laplacian_and_derivative_exact_on_modes():
    g = square_grid(16, 2 * np.pi)
    x1, x2 = g.mesh
    f = np.sin(3 * x1) * np.cos(2 * x2)
    np.testing.assert_allclose(g.laplacian(f), -13 * f, atol=1e-12)
    np.testing.assert_allclose(g.partial_derivative(f, 0), 3 * np.cos(3 * x1) * np.cos(2 * x2), atol=1e-12)
    np.testing.assert_allclose(g.partial_derivative(f, 1), -2 * np.sin(3 * x1) * np.sin(2 * x2), atol=1e-12)
    with pytest.raises(ValueError):
        g.partial_derivative(f, 2)


def test_derivative_of_nyquist_mode_is_zero():
    g = square_grid(8, 2 * np.pi)
    f = np.cos(4 * g.mesh[0])
    assert np.max(abs(g.partial_derivative(f, 0))) < 1e-12


def test_integrate_and_norm_of_gaussian():
    g = square_grid(64, 16.0)
    psi = np.exp(-g.r_squared / 2)
    assert abs(g.integrate(psi**2) - np.pi) < 1e-12
    assert abs(g.norm2(psi) - np.pi) < 1e-12


def test_shape_mismatch_rejected(grid16):
    with pytest.raises(ValueError):
        grid16.laplacian(np.zeros((8, 8)))


def test_fourier_interpolation_exact_for_band_limited(rng):
    coarse = square_grid(8, 2 * np.pi)
    fine = coarse.with_dims((24, 16))
    f = lambda x1, x2: np.exp(1j * x1) + 0.3 * np.cos(2 * x2) + 0.2 * np.sin(3 * x1 - x2)
    out = coarse.fourier_interpolate(f(*coarse.mesh), fine.dims)
    np.testing.assert_allclose(out, f(*fine.mesh), atol=1e-13)


def test_fourier_interpolation_keeps_real_fields_real(rng):
    g = square_grid(8, 3.0)
    f = rng.standard_normal(g.shape)
    out = g.fourier_interpolate(f, (16, 16))
    assert np.max(abs(out.imag)) < 1e-14
    # the interpolant passes through the original samples
    np.testing.assert_allclose(out[::2, ::2].real, f, atol=1e-13)


def test_fourier_interpolation_batched_and_errors(rng):
    g = square_grid(8, 3.0)
    f = rng.standard_normal((2,) + g.shape)
    out = g.fourier_interpolate(f, (16, 16))
    assert out.shape == (2, 16, 16)
    with pytest.raises(ValueError):
        g.fourier_interpolate(f, (4, 4))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (2, 6, 10), elements=st.floats(-1e3, 1e3)))
def test_roundtrip_property(a):
    g = make_grid([6, 10], [2.0, 3.5], [0.3, -1.0])
    f = a[0] + 1j * a[1]
    back = g.inverse_transform(g.forward_transform(f))
    assert np.allclose(back, f, atol=1e-10 * (1 + np.abs(f).max()))


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 12), st.integers(0, 8))
def test_interpolation_preserves_norm_property(n, extra):
    rng = np.random.default_rng(n * 31 + extra)
    g = square_grid(n, 5.0)
    f = rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)
    fine = g.fourier_interpolate(f, (n + extra, n + extra))
    # Parseval; the split Nyquist coefficient loses half its energy
    c = g.forward_transform(f)
    if n % 2 == 0 and extra:
        w = np.ones(n)
        w[n // 2] = 0.5
        expected = np.sum(np.abs(c) ** 2 * np.outer(w, w)) * g.volume
    else:
        expected = g.norm2(f)
    assert np.isclose(g.with_dims(fine.shape).norm2(fine), expected, rtol=1e-10)
