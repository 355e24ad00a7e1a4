"""Gillespie simulation of single trajectories and of parallel ensembles."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..controller import ClosedLoopNetwork
from ..crn import Hill, OnOffProportional, State
from ..errors import ConfigError, NumericError
from . import _kernel
from .stats import EnsembleStats

__all__ = ["TimeGrid", "SeedPlan", "Trajectory", "Observables", "simulate", "run_ensemble"]

BLOCK_SIZE = 250


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size == 0:
            raise ConfigError("time grid needs at least one point")
        if pts[0] != 0.0:
            raise ConfigError("time grid must start at 0")
        if np.any(np.diff(pts) <= 0):
            raise ConfigError("time grid must be strictly increasing")
        if pts[-1] > self.t_end:
            raise ConfigError("last grid point exceeds t_end")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, t_end, n_points):
        return cls(float(t_end), np.linspace(0.0, float(t_end), int(n_points)))

    def to_dict(self):
        return {"t_end": self.t_end, "n_points": int(self.points.size)}


@dataclass(frozen=True)
class SeedPlan:
    """Trajectory ``i`` draws from a stream keyed by ``(base_seed, *key, i)``.

    Stream states come from :class:`numpy.random.SeedSequence`, which makes the
    draws of a trajectory independent of thread count and scheduling.
    """

    base_seed: int
    key: tuple = ()

    def child(self, *key):
        return SeedPlan(self.base_seed, self.key + tuple(key))

    def states(self, start, stop):
        out = np.empty((stop - start, 4), dtype=np.uint64)
        for row, i in enumerate(range(start, stop)):
            ss = np.random.SeedSequence(self.base_seed, spawn_key=self.key + (i,))
            s = ss.generate_state(4, np.uint64)
            if not s.any():  # pragma: no cover - probability 2**-256
                s[0] = 1
            out[row] = s
        return out

    def to_dict(self):
        return {"base_seed": self.base_seed, "key": list(self.key),
                "derivation": "numpy.random.SeedSequence(base_seed, spawn_key=(*key, i))"
                              ".generate_state(4, uint64)",
                "generator": _kernel.RNG_NAME}


class Trajectory(NamedTuple):
    times: np.ndarray
    states: np.ndarray
    reactions: np.ndarray
    t_end: float

    def at(self, t):
        """State at the last jump <= t (left-continuous sampling)."""
        i = np.searchsorted(self.times, t, side="right") - 1
        return self.states[i]


def _network(obj):
    return obj.network if isinstance(obj, ClosedLoopNetwork) else obj


def _x0(network, x0):
    counts = x0.counts if isinstance(x0, State) else np.asarray(x0, dtype=np.int64)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    if counts.shape != (network.dim,):
        raise ConfigError(f"initial state has shape {counts.shape}, expected ({network.dim},)")
    if np.any(counts < 0):
        raise ConfigError("initial state must be nonnegative")
    return counts


def simulate(network, x0, t_end, seed):
    """Exact jump sequence of one trajectory on ``[0, t_end]``.

    ``seed`` is an integer or a :class:`SeedPlan` (trajectory index 0 is used).
    """
    net = _network(network)
    if not t_end > 0:
        raise ConfigError("t_end must be positive")
    plan = seed if isinstance(seed, SeedPlan) else SeedPlan(int(seed))
    arrays = _kernel.compile_network(net)
    status, times, states, reactions, x = _kernel.ssa_path(
        *arrays, _x0(net, x0), float(t_end), plan.states(0, 1)[0], 1024)
    if status != _kernel.OK:
        raise NumericError(f"non-finite total propensity at state {x.tolist()}", state=x)
    return Trajectory(times.copy(), states.copy(), reactions.copy(), float(t_end))


class Observables:
    """Maps sampled species counts to the tracked observables.

    For a closed loop this adds ``Z1-Z2``, ``F`` (when feedback is attached)
    and ``Z1*Z2``; with ``higher_moments`` also ``Z1^2*Z2``, ``Z1*Z2^2`` and
    ``<X_l>*Z2`` used by the invariant harness.
    """

    def __init__(self, network, higher_moments=False):
        self.closed = network if isinstance(network, ClosedLoopNetwork) else None
        net = _network(network)
        names = list(net.species)
        self.law = None
        if self.closed is not None:
            names += ["Z1-Z2"]
            self.law = self.closed.feedback_law()
            if self.law is not None:
                names += ["F"]
            names += ["Z1*Z2"]
            if higher_moments:
                xl = net.species[self.closed.config.controlled]
                names += ["Z1^2*Z2", "Z1*Z2^2", f"{xl}*Z2"]
        self.higher_moments = higher_moments and self.closed is not None
        self.names = tuple(names)

    def __call__(self, counts):
        """``counts`` has shape (..., d); returns float array (..., m)."""
        x = counts.astype(float)
        cols = [x]
        if self.closed is not None:
            z1 = x[..., self.closed.z1]
            z2 = x[..., self.closed.z2]
            xl = x[..., self.closed.config.controlled]
            extra = [z1 - z2]
            law = self.law
            if isinstance(law, OnOffProportional):
                extra.append(law.Kp * np.maximum(0.0, law.mu - law.theta * xl))
            elif isinstance(law, Hill):
                extra.append(law.Kp / (1.0 + xl))
            extra.append(z1 * z2)
            if self.higher_moments:
                extra += [z1 * z1 * z2, z1 * z2 * z2, xl * z2]
            cols.append(np.stack(extra, axis=-1))
        return np.concatenate(cols, axis=-1)


def _run_block(arrays, x0, grid, seeds, start):
    n = seeds.shape[0]
    out = np.empty((n, grid.size, x0.size), dtype=np.int64)
    status, bad, events = _kernel.ssa_block(*arrays, x0, grid, seeds, out)
    if status != _kernel.OK:
        state = out[bad, -1].copy()
        raise NumericError(
            f"trajectory {start + bad}: non-finite or overflowing propensity at state "
            f"{state.tolist()}", state=state, trajectory=start + bad)
    return out, events


def run_ensemble(network, x0, grid, n, plan, *, threads=1, higher_moments=False,
                 block_size=BLOCK_SIZE, keep_blocks=False):
    """Simulate ``n`` trajectories and accumulate per-grid-point statistics.

    Trajectories are processed in fixed blocks whose partial accumulators are
    merged in block order, so the result does not depend on ``threads``.
    With ``keep_blocks`` the per-block accumulators are kept on
    ``stats.blocks`` for batch-means error estimates.
    """
    if n < 2:
        raise ConfigError("an ensemble needs n >= 2 trajectories")
    if isinstance(grid, (int, float)):
        raise ConfigError("grid must be a TimeGrid")
    net = _network(network)
    obs = Observables(network, higher_moments=higher_moments)
    arrays = _kernel.compile_network(net)
    x0 = _x0(net, x0)
    points = np.ascontiguousarray(grid.points)
    starts = list(range(0, n, block_size))

    def work(start):
        stop = min(start + block_size, n)
        samples, _ = _run_block(arrays, x0, points, plan.states(start, stop), start)
        part = EnsembleStats(obs.names, points)
        part.push_batch(obs(samples))
        return part

    total = EnsembleStats(obs.names, points)
    blocks = [] if keep_blocks else None
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = map(work, starts)
    for part in parts:
        if keep_blocks:
            blocks.append(part)
        total.merge(part)
    total.blocks = blocks
    return total
