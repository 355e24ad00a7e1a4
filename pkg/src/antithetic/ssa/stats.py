"""Streaming ensemble statistics and derived stationary quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from ..errors import ConfigError, EstimationError

__all__ = [
    "EnsembleStats",
    "StationaryStats",
    "stationary_stats",
    "estimate_beta",
    "settling_time",
    "invariant_report",
    "InvariantRow",
    "linear_growth",
]


@dataclass
class EnsembleStats:
    """Per-time-point mean and co-moment accumulators over observables.

    ``comoment[t]`` is the sum of outer products of deviations from the running
    mean (Welford/Chan form); the covariance is ``comoment / (n - 1)``.
    """

    names: tuple
    times: np.ndarray
    n: int = 0
    mean: np.ndarray = None
    comoment: np.ndarray = None
    blocks: Optional[list] = field(default=None, repr=False)

    def __post_init__(self):
        self.names = tuple(self.names)
        self.times = np.asarray(self.times, dtype=float)
        T, m = self.times.size, len(self.names)
        if self.mean is None:
            self.mean = np.zeros((T, m))
        if self.comoment is None:
            self.comoment = np.zeros((T, m, m))

    @classmethod
    def empty_like(cls, other):
        return cls(other.names, other.times)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"observable {name!r} not tracked; have {self.names}") from None

    def push(self, sample):
        """Welford update with one trajectory sample of shape (T, m)."""
        x = np.asarray(sample, dtype=float)
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self.comoment += delta[:, :, None] * (x - self.mean)[:, None, :]

    def push_batch(self, samples):
        """Add trajectories of shape (b, T, m): batch moments, then a Chan merge."""
        x = np.asarray(samples, dtype=float)
        if x.shape[0] == 0:
            return
        part = EnsembleStats(self.names, self.times, n=x.shape[0])
        part.mean = x.mean(axis=0)
        dev = x - part.mean
        part.comoment = np.einsum("btm,btk->tmk", dev, dev)
        self.merge(part)

    def merge(self, other):
        """Combine another accumulator in place (Chan et al. pairwise update)."""
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.comoment = other.n, other.mean.copy(), other.comoment.copy()
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        self.comoment = (self.comoment + other.comoment
                         + delta[:, :, None] * delta[:, None, :] * (self.n * other.n / n))
        self.mean = self.mean + delta * (other.n / n)
        self.n = n
        return self

    @property
    def cov(self):
        if self.n < 2:
            raise EstimationError("covariance needs at least two trajectories")
        c = self.comoment / (self.n - 1)
        return 0.5 * (c + np.swapaxes(c, 1, 2))

    @property
    def var(self):
        return np.diagonal(self.cov, axis1=1, axis2=2).copy()

    def series(self, name, what="mean"):
        i = self.index(name)
        if what == "mean":
            return self.mean[:, i]
        if what == "var":
            return self.var[:, i]
        raise ValueError(what)


class StationaryStats(NamedTuple):
    names: tuple
    mean: np.ndarray
    cov: np.ndarray
    n: int
    window: tuple

    def index(self, name):
        return self.names.index(name)

    def get_mean(self, name):
        return float(self.mean[self.index(name)])

    def get_var(self, name):
        i = self.index(name)
        return float(self.cov[i, i])

    def get_cov(self, a, b):
        return float(self.cov[self.index(a), self.index(b)])


def _tail(times, window):
    if not 0 < window <= 1:
        raise ConfigError(f"window must lie in (0, 1], got {window}")
    T = times.size
    count = int(math.ceil(window * T))
    if count < 2:
        raise ConfigError(f"window {window} selects {count} grid point(s); need at least 2")
    return slice(T - count, T)


def stationary_stats(stats, window=0.25):
    """Average ensemble means and covariances over the final ``window`` of the grid."""
    sl = _tail(stats.times, window)
    return StationaryStats(stats.names, stats.mean[sl].mean(axis=0), stats.cov[sl].mean(axis=0),
                           stats.n, (float(stats.times[sl][0]), float(stats.times[sl][-1])))


def estimate_beta(stationary, feedback_kind, controlled, feedback_name="F"):
    """Effective proportional gain ``-Cov(F(X_l), X_l) / Var(X_l)``.

    ``controlled`` is the observable name of X_l.  With no feedback the gain
    is zero by definition.
    """
    var = stationary.get_var(controlled)
    if not var > 0:
        raise EstimationError(f"Var({controlled}) is zero in the stationary window")
    if feedback_kind is None:
        return 0.0
    return -stationary.get_cov(feedback_name, controlled) / var


def settling_time(times, mean, set_point, band_fraction=0.02):
    """First grid time after which ``mean`` stays inside ``set_point*(1 +- band)``."""
    if not band_fraction > 0:
        raise ConfigError("band_fraction must be positive")
    times = np.asarray(times, dtype=float)
    inside = np.abs(np.asarray(mean, dtype=float) - set_point) <= band_fraction * abs(set_point)
    if not inside[-1]:
        return None
    outside = np.flatnonzero(~inside)
    if outside.size == 0:
        return float(times[0])
    return float(times[outside[-1] + 1])


class InvariantRow(NamedTuple):
    name: str
    measured: float
    predicted: float

    @property
    def deviation(self):
        return abs(self.measured - self.predicted) / abs(self.predicted)


def invariant_report(stationary, mu, theta, eta, controlled):
    """The four stationary identities of the antithetic motif.

    ``controlled`` is the observable name of X_l; the stats must have been
    collected with the higher-moment observables enabled.
    """
    s = stationary
    xl = controlled
    ez1 = s.get_mean("Z1")
    return [
        InvariantRow("Cov(X_l, Z1-Z2)", s.get_cov(xl, "Z1-Z2"), mu / theta),
        InvariantRow("E[Z1*Z2]", s.get_mean("Z1*Z2"), mu / eta),
        InvariantRow("E[Z1^2*Z2]", s.get_mean("Z1^2*Z2"), mu / eta * (1 + ez1)),
        InvariantRow("E[Z1*Z2^2]", s.get_mean("Z1*Z2^2"),
                     (mu + theta * s.get_mean(f"{xl}*Z2")) / eta),
    ]


class GrowthTest(NamedTuple):
    slope: float
    stderr: float
    growing: bool


def linear_growth(stats, name, window=0.25, threshold=3.0):
    """Least-squares slope of the ensemble mean of ``name`` over the tail window.

    ``growing`` is set when the slope exceeds ``threshold`` standard errors.
    The standard error is the larger of the residual-based OLS error and the
    Monte Carlo error of the slope.  With per-block accumulators on
    ``stats.blocks`` the latter is a batch-means estimate over block slopes,
    which accounts for the time correlation inside each trajectory; otherwise
    it is propagated from the per-point variances as if points were independent.
    """
    sl = _tail(stats.times, window)
    t = stats.times[sl]
    tc = t - t.mean()
    sxx = float(tc @ tc)

    def fit(s):
        y = s.series(name)[sl]
        return float(tc @ (y - y.mean()) / sxx), y

    slope, y = fit(stats)
    resid = y - y.mean() - slope * tc
    dof = max(t.size - 2, 1)
    se_ols = math.sqrt(float(resid @ resid) / dof / sxx)
    blocks = stats.blocks or []
    if len(blocks) >= 8:
        w = np.array([b.n for b in blocks], dtype=float)
        w /= w.sum()
        slopes = np.array([fit(b)[0] for b in blocks])
        B = len(blocks)
        se_mc = math.sqrt(float(w * w @ (slopes - slope) ** 2) * B / (B - 1))
    else:
        v = stats.series(name, "var")[sl] / max(stats.n, 1)
        se_mc = math.sqrt(float((tc * tc) @ v)) / sxx
    se = max(se_ols, se_mc)
    return GrowthTest(slope, se, slope > threshold * se and slope > 0)
