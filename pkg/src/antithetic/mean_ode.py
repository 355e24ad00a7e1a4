"""Deterministic PI counterpart of the stochastic closed loop.

The linear system ``dx/dt = SW x + e_a u``, ``y = x_l`` under the PI law
``u = (beta/theta)(mu - theta y) + k * integral(mu - theta y)`` has the
closed-loop matrix ``R`` of the moment analysis and input ``[beta/theta e_a; 1] mu``.
Networks with basal production add ``S w0`` to the open-loop rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .crn import linearize_propensities
from .errors import DomainError
from .moment import is_hurwitz, spectral_abscissa
from .ssa.stats import settling_time

__all__ = [
    "LinearClosedLoop",
    "MeanTrajectory",
    "linear_closed_loop",
    "integrate_mean",
    "steady_state",
    "pi_zero",
    "settling_time_ode",
]


@dataclass(frozen=True)
class LinearClosedLoop:
    A: np.ndarray
    b: np.ndarray
    mu: float
    theta: float
    controlled: int
    offset: np.ndarray = None
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        n = self.A.shape[0]
        if self.offset is None:
            object.__setattr__(self, "offset", np.zeros(n))
        if self.x0 is None:
            object.__setattr__(self, "x0", np.zeros(n))

    @property
    def set_point(self):
        return self.mu / self.theta

    def rhs(self, z):
        return self.A @ z + self.b * self.mu + self.offset


def linear_closed_loop(lin, controlled, actuated, mu, theta, k, beta, x0=None):
    """Assemble the deterministic closed loop from linear propensity structure."""
    if not hasattr(lin, "SW"):
        lin = linearize_propensities(lin)
    SW = lin.SW
    d = SW.shape[0]
    A = np.zeros((d + 1, d + 1))
    A[:d, :d] = SW
    A[actuated, controlled] -= beta
    A[actuated, d] = k
    A[d, controlled] = -theta
    b = np.zeros(d + 1)
    b[actuated] = beta / theta
    b[d] = 1.0
    offset = np.zeros(d + 1)
    offset[:d] = lin.S @ lin.w0
    z0 = None if x0 is None else np.asarray(x0, dtype=float)
    return LinearClosedLoop(A, b, float(mu), float(theta), int(controlled), offset, z0)


class MeanTrajectory(NamedTuple):
    times: np.ndarray
    states: np.ndarray  # (T, d+1): open-loop species then integrator
    output: np.ndarray
    error: np.ndarray  # set point minus output


def integrate_mean(sys, times, substeps=10):
    """Fixed-step RK4 with ``substeps`` steps per grid interval (at least 10)."""
    times = np.asarray(times, dtype=float)
    substeps = max(int(substeps), 10)
    z = np.array(sys.x0, dtype=float)
    out = np.empty((times.size, z.size))
    out[0] = z
    f = sys.rhs
    for i in range(1, times.size):
        h = (times[i] - times[i - 1]) / substeps
        for _ in range(substeps):
            k1 = f(z)
            k2 = f(z + 0.5 * h * k1)
            k3 = f(z + 0.5 * h * k2)
            k4 = f(z + h * k3)
            z = z + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i] = z
    y = out[:, sys.controlled]
    return MeanTrajectory(times, out, y, sys.set_point - y)


def steady_state(sys):
    """Fixed point ``A z + b mu + offset = 0``."""
    return np.linalg.solve(sys.A, -(sys.b * sys.mu + sys.offset))


def pi_zero(k, beta, theta):
    """Zero of the PI law ``(beta/theta) s + k``; None without proportional action."""
    if beta == 0:
        return None
    return -k * theta / beta


def settling_time_ode(sys, band_fraction=0.02, t_end=None, n_points=4001):
    """Settling time of the deterministic output under the same band rule as the SSA.

    The horizon defaults to 40 time constants of the slowest mode.
    """
    if not is_hurwitz(sys.A):
        _, lam = spectral_abscissa(sys.A)
        raise DomainError(f"closed-loop matrix is not Hurwitz (eigenvalue {lam:.6g})",
                          eigenvalue=lam)
    if t_end is None:
        alpha, _ = spectral_abscissa(sys.A)
        t_end = 40.0 / -alpha
    times = np.linspace(0.0, t_end, n_points)
    traj = integrate_mean(sys, times)
    t = settling_time(times, traj.output, sys.set_point, band_fraction)
    return math.inf if t is None else t
