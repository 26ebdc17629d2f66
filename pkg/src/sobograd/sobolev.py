"""Sobolev-type preconditioners applied as cached Fourier multipliers.

The Sobolev gradient ``(1 - Laplacian)^{-1} grad E`` is diagonal in the
Fourier basis, so each kind reduces to a multiplier table ``m(k)`` with
``0 < m(k) <= 1``:

=============  ======================
identity       ``1``
sobolev        ``1 / (1 + |k|^2)``
generalized    ``1 / (1 + sigma(k))``
=============  ======================
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid
from .operators import DiagonalOperatorSpec

KINDS = ("identity", "sobolev", "generalized")


@dataclass(frozen=True)
class Preconditioner:
    kind: str
    grid: Grid
    multiplier: np.ndarray

    def __call__(self, g: np.ndarray) -> np.ndarray:
        return precondition(self, g)


def build_preconditioner(kind: str, grid: Grid, spec: DiagonalOperatorSpec | None = None) -> Preconditioner:
    if kind == "identity":
        m = np.ones(grid.shape)
    elif kind == "sobolev":
        m = 1.0 / (1.0 + grid.k_squared)
    elif kind == "generalized":
        if spec is None:
            raise ValueError("generalized preconditioner needs a DiagonalOperatorSpec")
        spec.check(grid)
        m = 1.0 / (1.0 + spec.table)
    else:
        raise ValueError(f"unknown preconditioner kind {kind!r}; expected one of {KINDS}")
    m.setflags(write=False)
    return Preconditioner(kind, grid, m)


def precondition(P: Preconditioner, g: np.ndarray) -> np.ndarray:
    P.grid.check(g)
    if P.kind == "identity":
        return g
    return P.grid.apply_symbol(g, P.multiplier)
