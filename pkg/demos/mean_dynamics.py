"""
Deterministic mean dynamics
===========================

The linear closed loop for the means behaves like a PI controller with
proportional gain beta and integral gain k*theta.  Its output always reaches
the set point; how fast depends on beta.
"""

import numpy as np

from antithetic.mean_ode import integrate_mean, linear_closed_loop, pi_zero, settling_time_ode
from antithetic.presets import GENE, gene_expression

mu, theta, k = 10.0, 2.0, 3.0
net = gene_expression(GENE)

t = np.linspace(0, 15, 61)
for beta in (0.0, 1.0, 16.0):
    sys = linear_closed_loop(net, 1, 0, mu, theta, k, beta)
    traj = integrate_mean(sys, t)
    zero = pi_zero(k, beta, theta)  # None without a proportional term
    print(f"beta={beta:5g}  zero at {zero if zero is None else round(zero, 3)}  "
          f"output(15)={traj.output[-1]:.6f}  settling {settling_time_ode(sys):.2f}")

# Settling time against beta: a little proportional action speeds things up,
# too much slows the slow mode down again.
for beta in (0, 0.5, 1, 2, 4, 8, 16, 32, 64):
    sys = linear_closed_loop(net, 1, 0, mu, theta, k, beta)
    print(beta, round(settling_time_ode(sys), 2))
