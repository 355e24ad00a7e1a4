"""Catalog of figure datasets and the code that regenerates each one.

Figure ids are ``<model>-<feedback>-<quantity>``:

* model: ``gene``, ``mat`` (maturation) or ``dimer`` (dimerization)
* feedback: ``prop`` (ON/OFF proportional) or ``hill``
* quantity: ``E``/``V`` (mean/variance trajectories at k=3), ``VS`` (stationary
  variance surface), ``ST`` (settling times), ``RE`` (relative error of the
  moment closure, unimolecular models only) and ``Beta`` (effective gain).

Maturation additionally has ``mat-NM`` (closed-form variance against beta)
and ``mat-prop-{E,V,Z1,Z2}-NM`` (trajectories at gains large enough to lose
ergodicity).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..moment import (
    gene_openloop_variance,
    maturation_beta_interval,
    maturation_openloop_variance,
    maturation_variance_closed_form,
)
from ..presets import GENE, MATURATION, PRESETS, preset
from ..ssa import TimeGrid
from .config import DESK_N, ExperimentConfig
from .io import write_csv
from .sweep import run_cell, run_sweep

MODELS = {"gene": "gene", "mat": "maturation", "dimer": "dimerization"}
FEEDBACK = {"prop": "on_off", "hill": "hill"}

K_GRID = (1.0, 3.0, 5.0, 7.0)
TRAJECTORY_K = 3.0
KP_GRIDS = {
    ("gene", "prop"): (0.0, 5.0, 10.0, 20.0),
    ("gene", "hill"): (0.0, 5.0, 10.0, 20.0),
    ("mat", "prop"): (0.0, 1.0, 2.0, 4.0, 8.0),
    ("mat", "hill"): (0.0, 3.0, 6.0, 9.0, 12.0),
    ("dimer", "prop"): (0.0, 5.0, 10.0, 20.0),
    ("dimer", "hill"): (0.0, 5.0, 10.0, 20.0),
}
NM_KP = (0.0, 2.0, 5.0, 10.0, 20.0)
T_END, N_POINTS = 40.0, 161

_SWEEP_COLUMNS = {
    "VS": ("ssa_var", "formula_var", "settled"),
    "ST": ("settling_time", "settled"),
    "RE": ("ssa_var", "formula_var", "rel_error", "beta", "settled"),
    "Beta": ("beta",),
}


@dataclass(frozen=True)
class Figure:
    id: str
    model: str
    feedback: str
    quantity: str
    description: str


def _catalog():
    out = {}
    for m in MODELS:
        for f in FEEDBACK:
            for q in ("E", "V", "VS", "ST", "RE", "Beta"):
                if m == "dimer" and q == "RE":
                    continue  # no closed form for a bimolecular network
                fid = f"{m}-{f}-{q}"
                out[fid] = Figure(fid, m, f, q, _describe(m, f, q))
    out["mat-NM"] = Figure("mat-NM", "mat", "prop", "NM",
                           "closed-form Var(X3) against beta for each k, with the open-loop value")
    for q, what in (("E", "mean X3"), ("V", "variance of X3"), ("Z1", "mean Z1"),
                    ("Z2", "mean Z2")):
        fid = f"mat-prop-{q}-NM"
        out[fid] = Figure(fid, "mat", "prop", f"{q}-NM",
                          f"{what} trajectories at k=3 for ON/OFF gains {list(NM_KP)}")
    return out


def _describe(m, f, q):
    what = {"E": "mean trajectories of the controlled species at k=3",
            "V": "variance trajectories of the controlled species at k=3",
            "VS": "stationary variance over the (k, Kp) grid",
            "ST": "settling time of the mean over the (k, Kp) grid",
            "RE": "relative error |SSA - closure| / SSA over the (k, Kp) grid",
            "Beta": "effective proportional gain over the (k, Kp) grid"}[q]
    return f"{MODELS[m]}, {FEEDBACK[f]} feedback: {what}"


CATALOG = _catalog()


def catalog_text():
    return "\n".join(f"  {fid:<18} {fig.description}" for fid, fig in CATALOG.items())


def lookup(figure_id):
    try:
        return CATALOG[figure_id]
    except KeyError:
        raise ConfigError(f"unknown figure id {figure_id!r}; available figures:\n"
                          f"{catalog_text()}") from None


def figure_config(figure_id, n=DESK_N, seed=1):
    """Experiment config that regenerates ``figure_id``."""
    fig = lookup(figure_id)
    name = MODELS[fig.model]
    network, ctrl = preset(name)
    if fig.quantity == "NM":
        k_values, kp_values = K_GRID, (0.0,)
    elif fig.quantity.endswith("-NM"):
        k_values, kp_values = (TRAJECTORY_K,), NM_KP
    elif fig.quantity in ("E", "V"):
        k_values, kp_values = (TRAJECTORY_K,), KP_GRIDS[fig.model, fig.feedback]
    else:
        k_values, kp_values = K_GRID, KP_GRIDS[fig.model, fig.feedback]
    return ExperimentConfig(
        model=network, controller=ctrl, n=n, grid=TimeGrid.uniform(T_END, N_POINTS),
        seed=seed, k_values=k_values, Kp_values=kp_values,
        feedback_kind=FEEDBACK[fig.feedback], figure=figure_id, preset=name,
        params=preset_params(name), model_spec={"preset": name})


def preset_params(name):
    return PRESETS[name][1]


def _kp_label(Kp):
    return f"Kp={Kp:g}"


def _trajectories(cfg, what, threads):
    """One ensemble per Kp at a single k; returns (header, rows)."""
    ctrl = cfg.controller
    species = cfg.model.species
    obs = {"E": species[ctrl.controlled], "V": species[ctrl.controlled],
           "Z1": "Z1", "Z2": "Z2"}[what]
    stat = "var" if what == "V" else "mean"
    k = cfg.k_values[0]

    def work(Kp):
        return run_cell(cfg, k, Kp, cfg.feedback_kind, keep_stats=True)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, cfg.Kp_values))
    else:
        results = [work(Kp) for Kp in cfg.Kp_values]

    t = cfg.grid.points
    header = ["time"] + [_kp_label(Kp) for Kp in cfg.Kp_values]
    cols = [t]
    for cell, stats in results:
        if stats is None:
            raise ConfigError(f"Kp={cell.Kp:g}: {cell.error}")
        cols.append(stats.series(obs, stat))
    reference = _reference(cfg, what)
    if reference is not None:
        header.append(reference[0])
        cols.append(np.full(t.size, reference[1]))
    return header, list(zip(*cols))


def _reference(cfg, what):
    """Dotted reference line drawn on E and V figures, when one is known."""
    if what == "E":
        return "set_point", cfg.controller.set_point
    mu, theta = cfg.controller.mu, cfg.controller.theta
    if what == "V":
        if cfg.preset == "gene":
            return "open_loop_var", gene_openloop_variance(cfg.params or GENE, mu, theta)
        if cfg.preset == "maturation":
            return "open_loop_var", maturation_openloop_variance(cfg.params or MATURATION,
                                                                 mu, theta)
    return None


def _non_monotone(cfg, points=400):
    p = cfg.params or MATURATION
    ctrl = cfg.controller
    open_var = maturation_openloop_variance(p, ctrl.mu, ctrl.theta)
    rows = []
    for k in cfg.k_values:
        interval = maturation_beta_interval(p, ctrl.theta, k)
        if interval is None:
            continue
        lo, hi = interval
        # stay strictly inside the open interval, where the closure is finite
        pad = 1e-3 * (hi - lo)
        for beta in np.linspace(lo + pad, hi - pad, points):
            v = maturation_variance_closed_form(p, ctrl.mu, ctrl.theta, k, beta)
            rows.append((k, beta, v, np.log(v), np.log(open_var)))
    return ["k", "beta", "variance", "log_variance", "log_open_loop_variance"], rows


def run_figure(cfg, out_dir, *, threads=1):
    """Write the CSV for ``cfg.figure`` into ``out_dir``; returns its path."""
    fig = lookup(cfg.figure)
    path = Path(out_dir) / f"{fig.id}.csv"
    q = fig.quantity
    if q == "NM":
        header, rows = _non_monotone(cfg)
    elif q in ("E", "V"):
        header, rows = _trajectories(cfg, q, threads)
    elif q.endswith("-NM"):
        header, rows = _trajectories(cfg, q[:-3], threads)
    else:
        result = run_sweep(cfg, threads=threads)
        cols = [c for c in _SWEEP_COLUMNS[q]
                if not (c == "formula_var" and fig.model == "dimer")]
        header = ["k", "Kp", *cols, "error"]
        rows = [[getattr(c, name) for name in ["k", "Kp", *cols, "error"]]
                for c in result.cells]
    write_csv(path, header, rows)
    return path
