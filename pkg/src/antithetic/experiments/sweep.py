"""(k, Kp) sweeps of the closed loop: SSA statistics next to the moment closure."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from ..controller import Feedback, closed_loop, ergodicity_guard, nominal_input
from ..crn import is_unimolecular, linearize_propensities
from ..errors import AnalysisError, EstimationError, NumericError
from ..moment import build_R_Q, is_hurwitz, solve_lyapunov
from ..ssa import SeedPlan, run_ensemble
from ..ssa.stats import estimate_beta, linear_growth, settling_time, stationary_stats


def cell_key(k, Kp):
    """Seed key of a sweep cell: the IEEE-754 bits of ``(k, Kp)``.

    Keying by value rather than by position keeps each cell's draws fixed
    when the grids are reordered or extended.
    """
    return tuple(int(np.float64(v).view(np.uint64)) for v in (k, Kp))


@dataclass
class Cell:
    k: float
    Kp: float
    feedback: str
    ssa_mean: float = math.nan
    ssa_var: float = math.nan
    formula_var: Optional[float] = None
    rel_error: Optional[float] = None
    beta: float = math.nan
    settling_time: Optional[float] = None
    mean_in_band: bool = False
    z2_slope: float = math.nan
    z2_growing: bool = False
    settled: bool = False
    guard_ok: Optional[bool] = None
    hurwitz: Optional[bool] = None
    error: str = ""

    @property
    def ergodic(self):
        return not self.z2_growing and not self.error

    def row(self):
        return [getattr(self, f.name) for f in fields(self)[:-1]] + [self.ergodic, self.error]


HEADER = [f.name for f in fields(Cell)][:-1] + ["ergodic", "error"]


@dataclass
class SweepResult:
    cells: list
    controlled: str
    set_point: float

    header = HEADER

    def rows(self):
        return [c.row() for c in self.cells]

    def cell(self, k, Kp):
        for c in self.cells:
            if c.k == k and c.Kp == Kp:
                return c
        raise KeyError((k, Kp))

    def settled(self):
        return [c for c in self.cells if c.settled]


def closure_variance(network, controller, beta):
    """Stationary Var(X_l) from the moment closure; (value or None, Hurwitz flag)."""
    if not is_unimolecular(network):
        return None, None
    lin = linearize_propensities(network)
    m = build_R_Q(lin, controller.controlled, controller.actuated, controller.mu,
                  controller.theta, controller.k, beta)
    if not is_hurwitz(m.R):
        return None, False
    sigma = solve_lyapunov(m.R, m.Q)
    return float(sigma[controller.controlled, controller.controlled]), True


def run_cell(cfg, k, Kp, kind, *, threads=1, keep_stats=False):
    """Simulate and analyse one (k, Kp) cell; failures are recorded on the cell."""
    ctrl = cfg.controller
    fb = Feedback(kind, Kp) if kind is not None and Kp > 0 else None
    ctrl = ctrl.with_(k=k, feedback=fb)
    cell = Cell(float(k), float(Kp), kind or "none")
    net = cfg.model
    xl = net.species[ctrl.controlled]
    sp = ctrl.set_point
    stats = None
    try:
        closed = closed_loop(net, ctrl)
        plan = SeedPlan(cfg.seed).child(*cell_key(k, Kp))
        stats = run_ensemble(closed, closed.initial_state(cfg.x0), cfg.grid, cfg.n, plan,
                             threads=threads, keep_blocks=True)
        st = stationary_stats(stats, cfg.window)
        cell.ssa_mean = st.get_mean(xl)
        cell.ssa_var = st.get_var(xl)
        cell.beta = estimate_beta(st, fb.kind if fb else None, xl)
        cell.settling_time = settling_time(stats.times, stats.series(xl), sp, cfg.band)
        cell.mean_in_band = bool(abs(cell.ssa_mean - sp) <= cfg.band * sp)
        growth = linear_growth(stats, "Z2", cfg.window)
        cell.z2_slope = growth.slope
        cell.z2_growing = bool(growth.growing)
        cell.settled = cell.mean_in_band and not cell.z2_growing
        if is_unimolecular(net):
            u_star = nominal_input(linearize_propensities(net), ctrl.controlled, ctrl.mu,
                                   ctrl.theta, ctrl.actuated)
            cell.guard_ok = ergodicity_guard(kind if Kp > 0 else None, Kp, u_star, ctrl.mu).ok
        cell.formula_var, cell.hurwitz = closure_variance(net, ctrl, cell.beta)
        if cell.formula_var is not None and cell.ssa_var > 0:
            cell.rel_error = abs(cell.ssa_var - cell.formula_var) / cell.ssa_var
    except (NumericError, EstimationError, AnalysisError) as exc:
        cell.error = f"{type(exc).__name__}: {exc}"
    return (cell, stats) if keep_stats else cell


def run_sweep(cfg, *, threads=1, keep_stats=False):
    """Every (k, Kp) cell of ``cfg``; cells run on a pool of ``threads`` workers.

    Each cell owns its seed stream, so the result is the same for any
    ``threads`` and any ordering of the grids.
    """
    if cfg.controller is None:
        raise AnalysisError("a sweep needs a controller block")
    grid = [(k, Kp) for k in cfg.k_values for Kp in cfg.Kp_values]

    def work(kk):
        return run_cell(cfg, kk[0], kk[1], cfg.feedback_kind, keep_stats=keep_stats)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(work, grid))
    else:
        out = [work(kk) for kk in grid]
    cells = [o[0] for o in out] if keep_stats else out
    result = SweepResult(cells, cfg.model.species[cfg.controller.controlled],
                         cfg.controller.set_point)
    if keep_stats:
        result.stats = {(o[0].k, o[0].Kp): o[1] for o in out}
    return result
