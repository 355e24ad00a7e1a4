"""Acceptance suite: one check per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion
is printed in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from antithetic.controller import Feedback, closed_loop, nominal_input
from antithetic.crn import is_unimolecular, linearize_propensities
from antithetic.errors import UnsupportedStructureError
from antithetic.experiments import parse_config, run_sweep
from antithetic.experiments.cli import main as cli_main
from antithetic.mean_ode import integrate_mean, linear_closed_loop, settling_time_ode
from antithetic.moment import (
    build_R_Q,
    gene_variance_closed_form,
    gene_variance_limit,
    is_hurwitz,
    lyapunov_residual,
    maturation_beta_interval,
    maturation_openloop_variance,
    maturation_variance_closed_form,
    solve_lyapunov,
    spectral_abscissa,
)
from antithetic.presets import (
    GENE,
    MATURATION,
    GeneExpressionParams,
    MaturationParams,
    gene_expression,
    maturation,
    preset,
)
from antithetic.ssa import SeedPlan, TimeGrid, run_ensemble, stationary_stats
from antithetic.ssa.stats import invariant_report

MU, THETA, ETA = 10.0, 2.0, 100.0
N_DESK = 10_000
SWEEP_GRID = {"k": [1, 3, 5, 7], "Kp": [0, 5, 10, 20]}

RESULTS = {}  # criterion number -> (passed, one-line detail)


def record(number, title, passed, detail):
    RESULTS[number] = (bool(passed), f"{title}: {detail}")
    assert passed, f"criterion {number} ({title}) failed: {detail}"


def gene_sweep(kind):
    cfg = parse_config({"model": {"preset": "gene"}, "n": N_DESK,
                        "grid": {"t_end": 40, "n_points": 161}, "seed": 2024,
                        "sweep": {**SWEEP_GRID, "feedback": kind}})
    return run_sweep(cfg)


def sweep_detail(result, bound):
    worst = None
    lines = []
    for c in result.cells:
        tag = f"k={c.k:g},Kp={c.Kp:g}:"
        if not c.settled:
            lines.append(f"{tag}unsettled")
            continue
        lines.append(f"{tag}{c.rel_error:.3f}")
        if worst is None or c.rel_error > worst.rel_error:
            worst = c
    over = [c for c in result.settled() if c.rel_error > bound]
    head = (f"max rel.err {worst.rel_error:.3f} at k={worst.k:g},Kp={worst.Kp:g}; "
            f"{len(result.settled())}/16 settled; {len(over)} settled cells above {bound:.0%}")
    return not over and result.settled(), head + " [" + " ".join(lines) + "]"


# 1 -----------------------------------------------------------------------------

def test_criterion_01_invariants():
    start = time.perf_counter()
    net, cfg = preset("gene", k=3)
    closed = closed_loop(net, cfg)
    stats = run_ensemble(closed, closed.initial_state(), TimeGrid.uniform(20.0, 81), N_DESK,
                         SeedPlan(1), higher_moments=True)
    st = stationary_stats(stats)
    rows = invariant_report(st, MU, THETA, ETA, "X2")
    elapsed = time.perf_counter() - start
    cov, ez, inv3, inv4 = rows
    ok = (cov.deviation <= 0.05 and ez.deviation <= 0.10 and inv3.deviation <= 0.15
          and inv4.deviation <= 0.15 and elapsed <= 120)
    record(1, "invariant suite", ok,
           f"Cov(X2,Z1-Z2)={cov.measured:.3f} ({cov.deviation:.1%}), "
           f"E[Z1Z2]={ez.measured:.4f} ({ez.deviation:.1%}), "
           f"3rd-moment identities {inv3.deviation:.1%} / {inv4.deviation:.1%}, "
           f"{elapsed:.1f}s")


# 2, 3 --------------------------------------------------------------------------

def test_criterion_02_on_off_formula_vs_ssa():
    ok, detail = sweep_detail(gene_sweep("on_off"), 0.20)
    record(2, "ON/OFF closure vs SSA (<=20%)", ok, detail)


def test_criterion_03_hill_formula_vs_ssa():
    ok, detail = sweep_detail(gene_sweep("hill"), 0.10)
    record(3, "Hill closure vs SSA (<=10%)", ok, detail)


# 4 -----------------------------------------------------------------------------

def test_criterion_04_variance_below_constitutive():
    net, cfg = preset("gene", k=3, feedback="on_off", Kp=25.0)
    closed = closed_loop(net, cfg)
    stats = run_ensemble(closed, closed.initial_state(), TimeGrid.uniform(40.0, 161), N_DESK,
                         SeedPlan(4))
    var = stationary_stats(stats).get_var("X2")
    record(4, "variance below constitutive at Kp=25", var < 55 / 9,
           f"Var(X2)={var:.3f} vs 55/9={55 / 9:.3f}")


# 5 -----------------------------------------------------------------------------

def _gene_draw(rng):
    while True:
        p = GeneExpressionParams(*rng.uniform(0.2, 5.0, size=3))
        theta, k, beta = rng.uniform(0.2, 4.0), rng.uniform(0.05, 20.0), rng.uniform(0, 10)
        if is_hurwitz(build_R_Q(linearize_propensities(gene_expression(p)), 1, 0, MU, theta,
                                k, beta).R):
            return p, theta, k, beta


def _maturation_draw(rng):
    while True:
        p = MaturationParams(*rng.uniform(0.2, 5.0, size=5))
        theta, k = rng.uniform(0.2, 4.0), rng.uniform(0.05, 10.0)
        interval = maturation_beta_interval(p, theta, k)
        if interval is None:
            continue
        lo, hi = interval
        return p, theta, k, rng.uniform(lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo))


def test_criterion_05_closed_forms_equal_lyapunov():
    rng = np.random.default_rng(5)
    worst_rel, worst_res = 0.0, 0.0
    for _ in range(100):
        p, theta, k, beta = _gene_draw(rng)
        m = build_R_Q(linearize_propensities(gene_expression(p)), 1, 0, MU, theta, k, beta)
        S = solve_lyapunov(m.R, m.Q)
        res, scale = lyapunov_residual(m.R, S, m.Q)
        v = gene_variance_closed_form(p, MU, theta, k, beta)
        worst_rel = max(worst_rel, abs(S[1, 1] - v) / abs(v))
        worst_res = max(worst_res, res / scale)

        p, theta, k, beta = _maturation_draw(rng)
        m = build_R_Q(linearize_propensities(maturation(p)), 2, 0, MU, theta, k, beta)
        S = solve_lyapunov(m.R, m.Q)
        res, scale = lyapunov_residual(m.R, S, m.Q)
        v = maturation_variance_closed_form(p, MU, theta, k, beta)
        worst_rel = max(worst_rel, abs(S[2, 2] - v) / abs(v))
        worst_res = max(worst_res, res / scale)
    record(5, "closed forms equal Lyapunov", worst_rel <= 1e-9 and worst_res <= 1e-10,
           f"max rel. diff {worst_rel:.2e}, max scaled residual {worst_res:.2e} "
           "(100 gene + 100 maturation draws)")


# 6 -----------------------------------------------------------------------------

def test_criterion_06_maturation_stability_region():
    lin = linearize_propensities(maturation(MATURATION))
    ks = np.linspace(0.05, 9.0, 50)
    betas = np.linspace(0.05, 35.0, 50)
    disagree = 0
    for k in ks:
        for b in betas:
            stated = b < 30 and 9 * b * b - 246 * b + 294 * k - 720 < 0
            if k < 49 / 6:
                r = math.sqrt(49 - 6 * k)
                interval = max((41 - 7 * r) / 3, 0.0) < b < (41 + 7 * r) / 3
            else:
                interval = False
            numeric = is_hurwitz(build_R_Q(lin, 2, 0, MU, THETA, k, b).R)
            disagree += (numeric != stated) + (stated != interval)
    boundary = 0.0
    for k in np.linspace(0.1, 49 / 6 - 0.05, 25):
        r = math.sqrt(49 - 6 * k)
        for b in ((41 - 7 * r) / 3, (41 + 7 * r) / 3):
            if b <= 0:
                continue
            alpha, _ = spectral_abscissa(build_R_Q(lin, 2, 0, MU, THETA, k, b).R)
            boundary = max(boundary, abs(alpha))
    record(6, "maturation stability region", disagree == 0 and boundary <= 1e-6,
           f"{disagree} disagreements on 50x50 grid; max |Re lambda| on boundary "
           f"{boundary:.1e}")


# 7 -----------------------------------------------------------------------------

def test_criterion_07_maturation_open_loop():
    exact = maturation_openloop_variance(MATURATION, MU, THETA)
    u = nominal_input(linearize_propensities(maturation(MATURATION)), 2, MU, THETA)
    net = maturation(MATURATION, k_r=u)
    stats = run_ensemble(net, [0, 0, 0], TimeGrid.uniform(30.0, 121), N_DESK, SeedPlan(7))
    var = stationary_stats(stats).get_var("X3")
    rel = abs(var - exact) / exact
    ok = abs(exact - 37 / 6) <= 1e-12 and abs(u - 40 / 3) < 1e-12 and rel <= 0.10
    record(7, "maturation open-loop variance", ok,
           f"formula {exact:.15g} (37/6 diff {abs(exact - 37 / 6):.1e}), "
           f"SSA at u*={u:.4f}: {var:.3f} ({rel:.1%})")


# 8 -----------------------------------------------------------------------------

def test_criterion_08_non_monotone_in_beta():
    lo, hi = maturation_beta_interval(MATURATION, THETA, 3.0)
    betas = np.linspace(lo, hi, 302)[1:-1]
    v = np.array([maturation_variance_closed_form(MATURATION, MU, THETA, 3.0, b)
                  for b in betas])
    i = int(np.argmin(v))
    ok = 0 < i < v.size - 1 and np.all(np.diff(v[:i + 1]) < 0) and np.all(np.diff(v[i:]) > 0)
    record(8, "maturation variance non-monotone in beta", ok,
           f"beta in ({lo:.3f}, {hi:.3f}); minimum {v[i]:.3f} at beta={betas[i]:.2f}; "
           f"ends {v[0]:.1f} / {v[-1]:.1f}")


# 9 -----------------------------------------------------------------------------

def test_criterion_09_gene_monotone_in_beta():
    rng = np.random.default_rng(9)
    bad_mono, worst_limit, worst_k, over = 0, 0.0, 0.0, 0
    betas = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 60)])
    for _ in range(1000):
        p = GeneExpressionParams(*rng.uniform(0.2, 5.0, size=3))
        theta = rng.uniform(0.2, 4.0)
        k_max = p.gamma_r * p.gamma_p * (p.gamma_r + p.gamma_p) / (theta * p.k_p)
        k = rng.uniform(0.001, 0.999) * k_max
        v = np.array([gene_variance_closed_form(p, MU, theta, k, b) for b in betas])
        bad_mono += not np.all(np.diff(v) < 0)
        limit = gene_variance_limit(p, MU, theta)
        gap = abs(gene_variance_closed_form(p, MU, theta, k, 1e6) - limit) / limit
        over += gap > 1e-3
        if gap > worst_limit:
            worst_limit, worst_k = gap, k
    record(9, "gene variance decreasing in beta", bad_mono == 0 and over == 0,
           f"{bad_mono}/1000 non-monotone draws; beta=1e6 gap to the limit above 0.1% in "
           f"{over}/1000 draws, worst {worst_limit:.2e} at k={worst_k:.1f} "
           "(the gap decays like k/beta)")


# 10 ----------------------------------------------------------------------------

def test_criterion_10_dimerization_qualitative():
    net, _ = preset("dimerization")
    values, errors = [], []
    for Kp in (0.0, 10.0, 20.0):
        _, cfg = preset("dimerization", k=3, feedback="on_off" if Kp else None, Kp=Kp)
        closed = closed_loop(net, cfg)
        stats = run_ensemble(closed, closed.initial_state(), TimeGrid.uniform(40.0, 161),
                             N_DESK, SeedPlan(10).child(int(Kp)), keep_blocks=True)
        values.append(stationary_stats(stats).get_var("X3"))
        per_block = [stationary_stats(b).get_var("X3") for b in stats.blocks]
        errors.append(np.std(per_block, ddof=1) / math.sqrt(len(per_block)))
    gaps = [(values[i] - values[i + 1]) / math.hypot(errors[i], errors[i + 1])
            for i in range(2)]
    refused = not is_unimolecular(net)
    try:
        linearize_propensities(net)
    except UnsupportedStructureError:
        pass
    else:
        refused = False
    ok = refused and min(gaps) > 3.0
    record(10, "dimerization variance decreasing in Kp", ok,
           "Var(X3)=" + ", ".join(f"{v:.3f}+-{e:.3f}" for v, e in zip(values, errors))
           + f" for Kp=0,10,20; gaps {gaps[0]:.1f}/{gaps[1]:.1f} s.e.; closure refused={refused}")


# 11 ----------------------------------------------------------------------------

def test_criterion_11_determinism(tmp_path):
    cfg = {"model": {"preset": "gene"},
           "controller": {"k": 3, "feedback": {"kind": "on_off", "Kp": 5}},
           "n": 2000, "grid": {"t_end": 20, "n_points": 81}, "seed": 11,
           "sweep": {"k": [1, 3], "Kp": [0, 5]}, "pairs": [["X2", "Z1-Z2"]], "beta": 1.0}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    runs = [("simulate", ["simulate", "--config", str(path)], ["simulate.csv"]),
            ("sweep", ["sweep", "--config", str(path)], ["sweep.csv"]),
            ("invariants", ["invariants", "--config", str(path)], ["invariants.csv"]),
            ("analyze", ["analyze", "--config", str(path)], ["analysis.json", "mean.csv"]),
            ("gene-prop-E", ["reproduce", "gene-prop-E", "--n", "1000"], ["gene-prop-E.csv"])]
    mismatched = []
    for name, args, outputs in runs:
        first, second = tmp_path / f"{name}-1", tmp_path / f"{name}-8"
        assert cli_main(args + ["--out", str(first), "--threads", "1"]) == 0
        manifest = first / f"{name}.manifest.json"
        command = args[0]
        assert cli_main([command, "--config", str(manifest), "--out", str(second),
                         "--threads", "8"]) == 0
        for f in outputs + [f"{name}.manifest.json"]:
            if (first / f).read_bytes() != (second / f).read_bytes():
                mismatched.append(f)
    record(11, "byte-identical reruns from manifests (1 vs 8 threads)", not mismatched,
           f"{len(runs)} commands compared; mismatches: {mismatched or 'none'}")


# 12 ----------------------------------------------------------------------------

def test_criterion_12_mean_ode():
    worst = 0.0
    cases = [(gene_expression(GENE), 1, k, b) for k in (1, 3, 7) for b in (0, 1, 10)]
    cases += [(maturation(MATURATION), 2, 3.0, b) for b in (2.0, 8.0, 20.0)]
    for net, ell, k, b in cases:
        sys_ = linear_closed_loop(net, ell, 0, MU, THETA, k, b)
        assert is_hurwitz(sys_.A)
        alpha, _ = spectral_abscissa(sys_.A)
        t_end = 60.0 / -alpha
        traj = integrate_mean(sys_, np.linspace(0, t_end, 2001))
        worst = max(worst, abs(traj.output[-1] - MU / THETA) / (MU / THETA))
    betas = (0.0, 1.0, 4.0, 16.0, 64.0)
    st = [settling_time_ode(linear_closed_loop(gene_expression(GENE), 1, 0, MU, THETA, 3.0, b))
          for b in betas]
    i = int(np.argmin(st))
    shape = (0 < i < len(st) - 1 and all(a > c for a, c in zip(st[:i], st[1:i + 1]))
             and all(a < c for a, c in zip(st[i:], st[i + 1:])))
    record(12, "deterministic PI consistency", worst <= 1e-9 and shape,
           f"max steady-output error {worst:.1e}; settling times "
           + ", ".join(f"b={b:g}:{t:.2f}" for b, t in zip(betas, st)))


def summary_lines():
    lines = []
    for number in sorted(RESULTS):
        passed, detail = RESULTS[number]
        lines.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2} {detail}")
    return lines


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
