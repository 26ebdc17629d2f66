import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sobograd.grid import square_grid
from sobograd.operators import DiagonalOperatorSpec
from sobograd.sobolev import build_preconditioner, precondition

from conftest import random_field


def test_inverts_one_minus_laplacian(rng, grid16):
    P = build_preconditioner("sobolev", grid16)
    g = random_field(rng, grid16.shape)
    h = precondition(P, g)
    np.testing.assert_allclose(h - grid16.laplacian(h), g, atol=1e-12)


def test_identity_is_passthrough(rng, grid16):
    g = random_field(rng, grid16.shape)
    assert build_preconditioner("identity", grid16)(g) is g


def test_generalized_kind():
    grid = square_grid(16, 2 * np.pi)
    spec = DiagonalOperatorSpec.laplacian_power(grid, 2)
    P = build_preconditioner("generalized", grid, spec)
    f = np.cos(2 * grid.mesh[1])
    np.testing.assert_allclose(P(f), f / 17, atol=1e-13)
    with pytest.raises(ValueError):
        build_preconditioner("generalized", grid)
    with pytest.raises(ValueError):
        build_preconditioner("multigrid", grid)


def test_multiplier_monotone_in_k(grid16):
    P = build_preconditioner("sobolev", grid16)
    k = np.sqrt(grid16.k_squared).ravel()
    m = P.multiplier.ravel()
    order = np.argsort(k, kind="stable")
    assert np.all(np.diff(m[order]) <= 0)
    assert m.max() == 1.0 and m.min() > 0


def test_multiplier_read_only(grid16):
    with pytest.raises(ValueError):
        build_preconditioner("sobolev", grid16).multiplier[0, 0] = 2.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_self_adjoint_and_contraction(seed):
    rng = np.random.default_rng(seed)
    grid = square_grid(16, 16.0)
    P = build_preconditioner("sobolev", grid)
    f, g = random_field(rng, grid.shape), random_field(rng, grid.shape)
    lhs, rhs = grid.inner(f, P(g)), grid.inner(P(f), g)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))
    assert grid.norm2(P(f)) <= grid.norm2(f) * (1 + 1e-12)
    # positive definite
    assert grid.inner(f, P(f)).real > 0
