"""
Gene expression under antithetic integral control
==================================================

Simulate the closed loop with the stochastic simulation algorithm, then
compare the stationary statistics with the moment closure and with the
identities the controller enforces exactly.
"""

import numpy as np

from antithetic import SeedPlan, TimeGrid, closed_loop, preset, run_ensemble
from antithetic.moment import gene_integral_variance, gene_openloop_variance
from antithetic.presets import GENE
from antithetic.ssa import stationary_stats
from antithetic.ssa.stats import invariant_report

# Preset network (mRNA X1, protein X2) with the controller at k=3, no
# proportional term.  The set point is mu/theta = 5.
net, cfg = preset("gene", k=3)
closed = closed_loop(net, cfg)
print(closed.network.species)

# 2000 trajectories up to t=20; the last quarter of the grid is the
# stationary window.
grid = TimeGrid.uniform(20.0, 81)
stats = run_ensemble(closed, closed.initial_state(), grid, 2000, SeedPlan(7),
                     higher_moments=True)
st = stationary_stats(stats)

print("E[X2]   =", round(st.get_mean("X2"), 3), " set point", cfg.mu / cfg.theta)
print("Var[X2] =", round(st.get_var("X2"), 3))
print("closure  ", round(gene_integral_variance(GENE, cfg.mu, cfg.theta, cfg.k), 3))
print("open loop", round(gene_openloop_variance(GENE, cfg.mu, cfg.theta), 3))

# Exact stationary identities of the controller species
for row in invariant_report(st, cfg.mu, cfg.theta, cfg.eta, "X2"):
    print(f"{row.name:<16} {row.measured:9.4f} vs {row.predicted:9.4f}")

# the mean converges, the variance settles too
print(np.round(stats.series("X2")[::10], 2))
