"""
Protein maturation: where proportional feedback helps
=====================================================

For the three-species maturation network the closure gives the variance in
closed form.  The loop is only stable for a window of beta, and inside it the
variance first drops and then rises again.
"""

import numpy as np

from antithetic.crn import linearize_propensities
from antithetic.moment import (
    build_R_Q,
    is_hurwitz,
    maturation_beta_interval,
    maturation_openloop_variance,
    maturation_variance_closed_form,
    solve_lyapunov,
)
from antithetic.presets import MATURATION, maturation

mu, theta = 10.0, 2.0
print("open loop variance", maturation_openloop_variance(MATURATION, mu, theta))  # 37/6

for k in (1.0, 3.0, 5.0, 8.0, 9.0):
    interval = maturation_beta_interval(MATURATION, theta, k)
    print(f"k={k}: stable for beta in {interval}" if interval else f"k={k}: never stable")

# Non-monotone variance at k=3
lo, hi = maturation_beta_interval(MATURATION, theta, 3.0)
betas = np.linspace(lo, hi, 12)[1:-1]
v = [maturation_variance_closed_form(MATURATION, mu, theta, 3.0, b) for b in betas]
for b, x in zip(betas, v):
    print(f"beta={b:6.2f}  Var(X3)={x:8.3f}")

# The closed form is just the (3,3) entry of the Lyapunov solution
lin = linearize_propensities(maturation(MATURATION))
m = build_R_Q(lin, 2, 0, mu, theta, 3.0, 10.0)
assert is_hurwitz(m.R)
print(solve_lyapunov(m.R, m.Q)[2, 2], maturation_variance_closed_form(MATURATION, mu, theta,
                                                                      3.0, 10.0))
