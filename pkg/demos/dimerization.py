"""
A bimolecular network
=====================

Dimerization has a second-order reaction, so the moment equations do not
close.  Simulation still works; the closure refuses the network.
"""

from antithetic import SeedPlan, TimeGrid, closed_loop, is_unimolecular, preset, run_ensemble
from antithetic.crn import linearize_propensities
from antithetic.errors import UnsupportedStructureError
from antithetic.ssa import stationary_stats

net, _ = preset("dimerization")
print("unimolecular:", is_unimolecular(net))
try:
    linearize_propensities(net)
except UnsupportedStructureError as exc:
    print("closure refused:", exc)

grid = TimeGrid.uniform(40.0, 161)
for Kp in (0.0, 10.0, 20.0):
    _, cfg = preset("dimerization", k=3, feedback="on_off" if Kp else None, Kp=Kp)
    closed = closed_loop(net, cfg)
    stats = run_ensemble(closed, closed.initial_state(), grid, 1000, SeedPlan(5).child(int(Kp)))
    st = stationary_stats(stats)
    print(f"Kp={Kp:4g}  E[X3]={st.get_mean('X3'):.3f}  Var[X3]={st.get_var('X3'):.3f}")
