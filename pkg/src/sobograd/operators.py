"""Physical building blocks: trap potential, angular momentum, saturable response."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Grid


@dataclass(frozen=True)
class PotentialSpec:
    """``kind="harmonic"`` gives ``V = strength/2 * |x|^2``; ``kind="custom"`` passes ``samples`` through."""

    kind: str = "harmonic"
    strength: float = 1.0
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("harmonic", "custom"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "harmonic" and self.strength < 0:
            raise ValueError("harmonic strength must be non-negative")
        if self.kind == "custom" and self.samples is None:
            raise ValueError("custom potential needs samples")


def potential_field(spec: PotentialSpec, grid: Grid) -> np.ndarray:
    if spec.kind == "harmonic":
        return 0.5 * spec.strength * grid.r_squared
    samples = np.asarray(spec.samples)
    if samples.shape != grid.shape:
        raise ValueError(f"custom potential shape {samples.shape} does not match grid {grid.shape}")
    if np.iscomplexobj(samples):
        if np.max(np.abs(samples.imag)) > 0:
            raise ValueError("potential must be real")
        samples = samples.real
    return samples.astype(float, copy=True)


def apply_Lz(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Angular momentum ``-i (x1 d2 - x2 d1) f`` about the domain center.

    With this sign ``(x1 + i x2) exp(-r^2/2)`` has eigenvalue ``+1``.
    """
    if grid.rank != 2:
        raise ValueError("L_z needs a rank-2 grid")
    d1, d2 = grid.gradient_components(f)
    x1, x2 = grid.mesh
    return -1j * (x1 * d2 - x2 * d1)


def saturable_I(rho, kappa: float):
    """Saturable intensity response ``1 / (1 + kappa rho)``."""
    rho = np.asarray(rho)
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if np.any(rho < 0):
        raise ValueError("density must be non-negative")
    return 1.0 / (1.0 + kappa * rho)


def saturable_response(rho, kappa: float):
    """Derivative of the saturable energy density, ``G'(rho) = -rho / (1 + kappa rho)``."""
    return -rho * saturable_I(rho, kappa)


def saturable_energy_density(rho, kappa: float):
    """``G(rho) = (log(1 + kappa rho) - kappa rho) / kappa^2``."""
    rho = np.asarray(rho, dtype=float)
    x = kappa * rho
    return (np.log1p(x) - x) / kappa**2


@dataclass(frozen=True)
class DiagonalOperatorSpec:
    """Non-negative operator acting as ``sigma(k)`` on each Fourier mode."""

    table: np.ndarray

    @classmethod
    def from_symbol(cls, grid: Grid, symbol: Callable[..., np.ndarray]) -> "DiagonalOperatorSpec":
        """Sample ``symbol(k1, k2, ...)`` on the grid's wavenumber mesh."""
        return cls(np.broadcast_to(np.asarray(symbol(*grid.k_mesh), dtype=float), grid.shape).copy())

    @classmethod
    def laplacian_power(cls, grid: Grid, power: int = 1) -> "DiagonalOperatorSpec":
        return cls(grid.k_squared**power)

    def check(self, grid: Grid) -> None:
        if self.table.shape != grid.shape:
            raise ValueError(f"operator table {self.table.shape} does not match grid {grid.shape}")
        if np.any(self.table < 0) or not np.all(np.isfinite(self.table)):
            raise ValueError("operator symbol must be finite and non-negative")


def apply_A(spec: DiagonalOperatorSpec, grid: Grid, f: np.ndarray) -> np.ndarray:
    spec.check(grid)
    return grid.apply_symbol(f, spec.table)
