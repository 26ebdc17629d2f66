"""Coarse-to-fine continuation: converge on a coarse grid, Fourier-interpolate
the result onto the next grid and keep iterating there."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .descent import ConvergenceReport, DescentConfig, renormalize
from .grid import Grid, make_grid


@dataclass(frozen=True)
class RefinePlan:
    grids: tuple  # dims per stage, coarsest first
    lengths: tuple
    tolerances: tuple | None = None  # per-stage residual (or value) tolerance; None keeps the run config

    def __post_init__(self):
        if len(self.grids) < 2:
            raise ValueError("a refinement plan needs at least two grids")
        for a, b in zip(self.grids, self.grids[1:]):
            if len(a) != len(b) or not all(m > n for m, n in zip(b, a)):
                raise ValueError(f"grid dims must increase strictly: {a} -> {b}")
        if len(self.lengths) != len(self.grids[0]):
            raise ValueError("one length per axis expected")
        if self.tolerances is not None and len(self.tolerances) != len(self.grids):
            raise ValueError("one tolerance per stage expected")

    @classmethod
    def square(cls, sizes, length: float, tolerances=None) -> "RefinePlan":
        return cls(tuple((n, n) for n in sizes), (length, length), tolerances)

    def grid(self, stage: int) -> Grid:
        return make_grid(self.grids[stage], self.lengths)


def two_grid_solve(solve, seed, plan: RefinePlan, cfg: DescentConfig, tolerance_field: str = "residual_tol",
                   renorm_targets=None):
    """Run ``solve(seed, cfg, grid) -> ConvergenceReport`` on every stage of ``plan``.

    Stage ``i + 1`` starts from the Fourier interpolation of stage ``i``'s final
    state.  When ``renorm_targets`` is given, each interpolated start is
    rescaled to those L2 norms.  ``tolerance_field`` names the ``DescentConfig``
    field overridden by ``plan.tolerances``.  Stops at the first stage that does
    not converge; the reports gathered so far are returned either way.
    """
    reports: list[ConvergenceReport] = []
    start = np.asarray(seed)
    for i in range(len(plan.grids)):
        grid = plan.grid(i)
        if i > 0:
            coarse = plan.grid(i - 1)
            start = coarse.fourier_interpolate(reports[-1].final_state, grid.dims)
            if renorm_targets is not None:
                start = renormalize(start, renorm_targets, grid)
        elif start.shape[-grid.rank:] != grid.shape:
            raise ValueError(f"seed shape {start.shape} does not match the coarsest grid {grid.shape}")
        stage_cfg = cfg
        if plan.tolerances is not None:
            stage_cfg = cfg.with_(**{tolerance_field: plan.tolerances[i]})
        rep = solve(start, stage_cfg, grid)
        rep.extra["stage"] = i
        rep.extra["dims"] = tuple(grid.dims)
        reports.append(rep)
        if not rep.converged:
            break
    return reports
