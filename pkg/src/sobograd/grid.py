"""Periodic rectangular grids and Fourier pseudospectral operators.

Fields are plain numpy arrays whose trailing axes match ``Grid.shape``.
Leading axes (e.g. the two components of a vector field) are treated as a
batch, so every operator here works unchanged on stacked fields.

Transform convention::

    f(x_m) = sum_n c_n exp(i k_n . x_m)
    c_n    = (1 / prod N_i) sum_m f(x_m) exp(-i k_n . x_m)

with ``x_m = origin + m * h``.  For even ``N`` the unpaired Nyquist mode is
stored at ``+N/2``; for odd ``N`` the table is symmetric.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft


def wavenumbers_1d(n: int, length: float) -> np.ndarray:
    """FFT-ordered wavenumbers ``2 pi j / L`` for ``j`` in ``-M+1..M`` (even) or ``-M..M`` (odd)."""
    j = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        j[n // 2] = n // 2
    return 2.0 * np.pi * j / length


@dataclass(frozen=True)
class Grid:
    dims: tuple[int, ...]
    lengths: tuple[float, ...]
    origins: tuple[float, ...]

    # --- geometry -----------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.dims)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.dims

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def axes(self) -> tuple[int, ...]:
        return tuple(range(-self.rank, 0))

    @cached_property
    def spacings(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.dims))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        return tuple(wavenumbers_1d(n, L) for n, L in zip(self.dims, self.lengths))

    @cached_property
    def k_mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.wavenumbers, indexing="ij"))

    @cached_property
    def k_squared(self) -> np.ndarray:
        return sum(k**2 for k in self.k_mesh)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Lattice coordinates ``origin + m h`` along each axis."""
        return tuple(a + h * np.arange(n) for a, h, n in zip(self.origins, self.spacings, self.dims))

    @cached_property
    def centered_coords(self) -> tuple[np.ndarray, ...]:
        """Coordinates measured from the domain center, in ``[-L/2, L/2)``."""
        return tuple(h * np.arange(n) - L / 2 for h, n, L in zip(self.spacings, self.dims, self.lengths))

    @cached_property
    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.centered_coords, indexing="ij"))

    @cached_property
    def r_squared(self) -> np.ndarray:
        return sum(x**2 for x in self.mesh)

    @cached_property
    def _origin_phase(self) -> np.ndarray:
        return np.exp(-1j * sum(k * a for k, a in zip(self.k_mesh, self.origins)))

    @cached_property
    def _odd_derivative_symbols(self) -> tuple[np.ndarray, ...]:
        out = []
        for axis, (n, k) in enumerate(zip(self.dims, self.wavenumbers)):
            k = k.copy()
            if n % 2 == 0:
                k[n // 2] = 0.0
            shape = [1] * self.rank
            shape[axis] = n
            out.append(1j * k.reshape(shape))
        return tuple(out)

    def with_dims(self, dims) -> "Grid":
        return make_grid(dims, self.lengths, self.origins)

    def check(self, f: np.ndarray) -> None:
        if tuple(f.shape[-self.rank:]) != self.dims:
            raise ValueError(f"field shape {f.shape} does not match grid {self.dims}")

    # --- raw transforms (no origin phase; what the operators use) -----------
    def fft(self, f):
        return sfft.fftn(f, axes=self.axes)

    def ifft(self, c):
        return sfft.ifftn(c, axes=self.axes)

    def apply_symbol(self, f, symbol):
        """Multiply the spectrum of ``f`` by ``symbol`` and transform back."""
        return self.ifft(symbol * self.fft(f))

    # --- public contract ----------------------------------------------------
    def forward_transform(self, f):
        self.check(f)
        return self.fft(f) * (self._origin_phase / self.size)

    def inverse_transform(self, c):
        self.check(c)
        return self.ifft(c * (self.size / self._origin_phase))

    def laplacian(self, f):
        self.check(f)
        return self.ifft(-self.k_squared * self.fft(f))

    def partial_derivative(self, f, axis: int):
        if not 0 <= axis < self.rank:
            raise ValueError(f"axis {axis} out of range for rank-{self.rank} grid")
        self.check(f)
        return self.ifft(self._odd_derivative_symbols[axis] * self.fft(f))

    def gradient_components(self, f):
        """All first partial derivatives of ``f`` from a single forward transform."""
        c = self.fft(f)
        return [self.ifft(s * c) for s in self._odd_derivative_symbols]

    def integrate(self, f):
        """Lattice quadrature ``prod(h) * sum f`` over the trailing grid axes."""
        return self.cell_volume * np.sum(f, axis=self.axes)

    def inner(self, f, g) -> complex:
        """L2 product ``int conj(f) g`` summed over all components."""
        return self.cell_volume * np.vdot(f, g)

    def norm2(self, f) -> float:
        """Squared L2 norm ``int |f|^2`` summed over all components."""
        return self.cell_volume * float(np.vdot(f, f).real)

    def fourier_interpolate(self, f, new_dims):
        """Evaluate the trigonometric interpolant of ``f`` on a finer lattice.

        The spectrum is zero-padded; an even-``N`` Nyquist coefficient is split
        equally between ``+k`` and ``-k`` so real fields stay real.
        """
        self.check(f)
        new_dims = tuple(int(n) for n in new_dims)
        if len(new_dims) != self.rank:
            raise ValueError("new_dims rank mismatch")
        if any(m < n for m, n in zip(new_dims, self.dims)):
            raise ValueError("fourier_interpolate cannot shrink a grid")
        c = self.fft(f) / self.size
        lead = f.ndim - self.rank
        for ax, (n, m) in enumerate(zip(self.dims, new_dims)):
            c = _pad_axis(c, lead + ax, n, m)
        return self.with_dims(new_dims).ifft(c) * int(np.prod(new_dims))


def _pad_axis(c, axis, n, m):
    if m == n:
        return c
    c = np.moveaxis(c, axis, -1)
    out = np.zeros(c.shape[:-1] + (m,), dtype=complex)
    half = (n + 1) // 2  # non-negative modes 0..half-1 (excludes Nyquist for even n)
    out[..., :half] = c[..., :half]
    neg = n - half - (1 if n % 2 == 0 else 0)  # strictly negative modes
    if neg:
        out[..., m - neg:] = c[..., n - neg:]
    if n % 2 == 0:
        nyq = c[..., n // 2]
        out[..., n // 2] += 0.5 * nyq
        out[..., m - n // 2] += 0.5 * nyq
    return np.moveaxis(out, -1, axis)


def make_grid(dims, lengths, origins=None) -> Grid:
    dims = tuple(int(n) for n in dims)
    lengths = tuple(float(L) for L in lengths)
    if origins is None:
        origins = tuple(-L / 2 for L in lengths)
    origins = tuple(float(a) for a in origins)
    if not (len(dims) == len(lengths) == len(origins)) or not dims:
        raise ValueError("dims, lengths and origins must have the same non-zero length")
    if any(n < 2 for n in dims):
        raise ValueError("every dimension needs at least 2 points")
    if any(not np.isfinite(L) or L <= 0 for L in lengths):
        raise ValueError("lengths must be positive")
    return Grid(dims, lengths, origins)


def square_grid(n: int, length: float, rank: int = 2) -> Grid:
    """Centered ``n^rank`` grid of side ``length``."""
    return make_grid([n] * rank, [length] * rank)
