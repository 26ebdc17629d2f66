"""Sobolev-preconditioned descent for nonlinear Schrodinger functionals on periodic grids."""
from .grid import Grid, make_grid, square_grid
from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["Grid", "make_grid", "square_grid", "BACKEND"]
