"""Command-line front end.

Every command writes its CSV output plus ``<name>.manifest.json`` into
``--out``.  A manifest can be passed back with ``--config`` to regenerate
the same bytes.

Exit codes: 0 success, 2 configuration error, 3 numeric or domain error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from ..controller import closed_loop, ergodicity_guard, nominal_input
from ..crn import is_unimolecular, linearize_propensities
from ..errors import (
    AnalysisError,
    ConfigError,
    EstimationError,
    NumericError,
    StructuralError,
    UnsupportedStructureError,
)
from ..mean_ode import integrate_mean, linear_closed_loop, pi_zero
from ..moment import (
    analysis_matrices,
    gene_variance_closed_form,
    is_hurwitz,
    lyapunov_residual,
    maturation_variance_closed_form,
    solve_lyapunov,
    spectral_abscissa,
)
from ..ssa import SeedPlan, run_ensemble
from ..ssa.stats import invariant_report, stationary_stats
from .config import FULL_N, load_config
from .io import write_csv, write_json, write_manifest
from .reproduce import catalog_text, figure_config, lookup, run_figure
from .sweep import run_sweep

log = logging.getLogger("antithetic")


def _apply_overrides(cfg, args):
    changes = {}
    if args.paper_scale:
        changes["n"] = FULL_N
    if args.n is not None:
        changes["n"] = args.n
    if args.seed is not None:
        changes["seed"] = args.seed
    return cfg.replace(**changes) if changes else cfg


def _require_config(args):
    if args.config is None:
        raise ConfigError(f"{args.command}: --config <file> is required")
    return _apply_overrides(load_config(args.config), args)


def _simulated_network(cfg):
    if cfg.controller is None:
        return cfg.model
    return closed_loop(cfg.model, cfg.controller)


def _finish(args, cfg, name, outputs, extra=None):
    out = Path(args.out)
    manifest = write_manifest(out / f"{name}.manifest.json", args.command, cfg, outputs,
                              cfg.model.digest(), extra)
    for p in outputs:
        print(f"wrote {p}")
    print(f"wrote {manifest}")


def cmd_simulate(args):
    cfg = _require_config(args)
    net = _simulated_network(cfg)
    stats = run_ensemble(net, cfg.initial_state(), cfg.grid, cfg.n, SeedPlan(cfg.seed),
                         threads=args.threads, higher_moments=cfg.higher_moments)
    header = ["time"] + [f"mean:{o}" for o in stats.names] + [f"var:{o}" for o in stats.names]
    cols = [stats.times, *stats.mean.T, *stats.var.T]
    cov = stats.cov
    for a, b in cfg.pairs:
        header.append(f"cov:{a}:{b}")
        cols.append(cov[:, stats.index(a), stats.index(b)])
    path = write_csv(Path(args.out) / "simulate.csv", header, zip(*cols))
    st = stationary_stats(stats, cfg.window)
    for name in stats.names[:cfg.model.dim]:
        print(f"{name:>8}  mean {st.get_mean(name):.6g}  var {st.get_var(name):.6g}")
    _finish(args, cfg, "simulate", [path])
    return 0


def cmd_sweep(args):
    cfg = _require_config(args)
    if not cfg.k_values:
        raise ConfigError("sweep: the config needs a 'sweep' block with k and Kp grids")
    if cfg.controller is None:
        raise ConfigError("sweep: the config needs a controller block")
    result = run_sweep(cfg, threads=args.threads)
    path = write_csv(Path(args.out) / "sweep.csv", result.header, result.rows())
    for c in result.cells:
        flag = "settled" if c.settled else "NOT settled"
        rel = "" if c.rel_error is None else f"  rel.err {c.rel_error:.3f}"
        err = f"  [{c.error}]" if c.error else ""
        print(f"k={c.k:<6g} Kp={c.Kp:<6g} var {c.ssa_var:.4g}  beta {c.beta:.4g}{rel}  {flag}{err}")
        if c.guard_ok is False:
            log.warning("k=%g Kp=%g: feedback exceeds the sufficient ergodicity bound", c.k, c.Kp)
    _finish(args, cfg, "sweep", [path])
    return 0


def cmd_reproduce(args):
    if args.list:
        print(catalog_text())
        return 0
    if args.config is not None:
        cfg = _require_config(args)
        if cfg.figure is None:
            raise ConfigError("reproduce: the config does not name a figure")
        if args.figure is not None and args.figure != cfg.figure:
            raise ConfigError(f"reproduce: config is for {cfg.figure!r}, not {args.figure!r}")
    else:
        if args.figure is None:
            raise ConfigError(f"reproduce: give a figure id; available figures:\n{catalog_text()}")
        lookup(args.figure)
        cfg = _apply_overrides(figure_config(args.figure), args)
    path = run_figure(cfg, args.out, threads=args.threads)
    _finish(args, cfg, cfg.figure, [path])
    return 0


def cmd_invariants(args):
    cfg = _require_config(args)
    if cfg.controller is None:
        raise ConfigError("invariants: the antithetic controller must be attached "
                          "(add a controller block)")
    net = _simulated_network(cfg)
    stats = run_ensemble(net, cfg.initial_state(), cfg.grid, cfg.n, SeedPlan(cfg.seed),
                         threads=args.threads, higher_moments=True)
    st = stationary_stats(stats, cfg.window)
    ctrl = cfg.controller
    rows = invariant_report(st, ctrl.mu, ctrl.theta, ctrl.eta,
                            cfg.model.species[ctrl.controlled])
    path = write_csv(Path(args.out) / "invariants.csv",
                     ["invariant", "measured", "predicted", "deviation"],
                     [(r.name, r.measured, r.predicted, r.deviation) for r in rows])
    for r in rows:
        print(f"{r.name:<18} measured {r.measured:<12.6g} predicted {r.predicted:<12.6g} "
              f"deviation {r.deviation:.2%}")
    _finish(args, cfg, "invariants", [path])
    return 0


def _closed_forms(cfg, beta):
    ctrl = cfg.controller
    out = {}
    try:
        if cfg.preset == "gene":
            out["variance"] = gene_variance_closed_form(cfg.params, ctrl.mu, ctrl.theta,
                                                        ctrl.k, beta)
        elif cfg.preset == "maturation":
            out["variance"] = maturation_variance_closed_form(cfg.params, ctrl.mu, ctrl.theta,
                                                              ctrl.k, beta)
    except AnalysisError as exc:
        out["error"] = str(exc)
    return out


def cmd_analyze(args):
    cfg = _require_config(args)
    if cfg.controller is None:
        raise ConfigError("analyze: the config needs a controller block")
    if not is_unimolecular(cfg.model):
        raise UnsupportedStructureError(
            f"analyze: {cfg.model.name or 'model'} has reactions of order > 1 or "
            "non-mass-action rate laws; the moment closure only covers unimolecular "
            "mass-action networks (use 'simulate' or 'sweep' instead)")
    ctrl = cfg.controller
    beta = cfg.beta
    m = analysis_matrices(cfg.model, ctrl, beta)
    alpha, lam = spectral_abscissa(m.R)
    hurwitz = is_hurwitz(m.R)
    sigma = residual = None
    if hurwitz:
        sigma = solve_lyapunov(m.R, m.Q)
        res, scale = lyapunov_residual(m.R, sigma, m.Q)
        residual = res / scale
    u_star = nominal_input(linearize_propensities(cfg.model), ctrl.controlled, ctrl.mu,
                           ctrl.theta, ctrl.actuated)
    guard = ergodicity_guard(ctrl.feedback.kind if ctrl.feedback else None,
                             ctrl.feedback.Kp if ctrl.feedback else 0.0, u_star, ctrl.mu)
    report = {
        "inputs": {"model": cfg.model_spec, "controller": ctrl.to_dict(cfg.model.species),
                   "beta": beta},
        "species": list(cfg.model.species) + ["I"],
        "nominal_input": m.c,
        "stationary_mean": m.stationary_mean,
        "R": m.R, "Q": m.Q,
        "eigenvalues_R": np.linalg.eigvals(m.R),
        "spectral_abscissa": alpha,
        "Sigma": sigma,
        "variance_controlled": None if sigma is None else sigma[ctrl.controlled, ctrl.controlled],
        "lyapunov_residual": residual,
        "closed_form": _closed_forms(cfg, beta),
        "pi_zero": pi_zero(ctrl.k, beta, ctrl.theta),
        "validity": {"unimolecular": True, "hurwitz": bool(hurwitz),
                     "ergodicity_guard": guard.ok, "guard_message": guard.message},
    }
    out = Path(args.out)
    report_path = write_json(out / "analysis.json", report)
    outputs = [report_path]
    if hurwitz:
        sys_ = linear_closed_loop(linearize_propensities(cfg.model), ctrl.controlled,
                                  ctrl.actuated, ctrl.mu, ctrl.theta, ctrl.k, beta)
        traj = integrate_mean(sys_, cfg.grid.points)
        header = ["time", *cfg.model.species, "I", "error"]
        rows = zip(traj.times, *traj.states.T, traj.error)
        outputs.append(write_csv(out / "mean.csv", header, rows))
        print(f"Var({cfg.model.species[ctrl.controlled]}) = {report['variance_controlled']:.10g}")
    _finish(args, cfg, "analyze", outputs)
    if not hurwitz:
        print(f"R is not Hurwitz (eigenvalue {lam:.6g}); the closure is outside its "
              "validity domain", file=sys.stderr)
        return 3
    return 0


COMMANDS = {"simulate": cmd_simulate, "sweep": cmd_sweep, "reproduce": cmd_reproduce,
            "invariants": cmd_invariants, "analyze": cmd_analyze}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config or manifest (JSON)")
    common.add_argument("--n", type=int, help="ensemble size (default 10000)")
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--paper-scale", action="store_true",
                        help="use 10^6 trajectories instead of the desk-scale 10^4")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="antithetic",
                                     description="Antithetic integral control experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="ensemble statistics over time")
    sub.add_parser("sweep", parents=[common], help="(k, Kp) sweep against the closure")
    rp = sub.add_parser("reproduce", parents=[common], help="regenerate a figure dataset")
    rp.add_argument("figure", nargs="?", help="figure id (see --list)")
    rp.add_argument("--list", action="store_true", help="print the figure catalog")
    sub.add_parser("invariants", parents=[common], help="stationary controller identities")
    sub.add_parser("analyze", parents=[common], help="moment closure report (no simulation)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    if args.n is not None and args.n < 2:
        print("error: --n must be >= 2", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UnsupportedStructureError, AnalysisError, NumericError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
