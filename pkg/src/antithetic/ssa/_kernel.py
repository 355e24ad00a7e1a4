"""JIT-compiled Gillespie direct method.

Networks are flattened into dense arrays (see :func:`compile_network`).  The
random stream of each trajectory is a xoshiro256** generator whose 256-bit
state is supplied by the caller, so draws never depend on scheduling.
"""

import numpy as np
from numba import njit

from ..crn import Hill, MassAction, OnOffProportional

MASS_ACTION, ON_OFF, HILL = 0, 1, 2

OK, NON_FINITE, OVERFLOW = 0, 1, 2

RNG_NAME = "xoshiro256**"


def compile_network(network):
    """Flatten a :class:`~antithetic.crn.Network` into sparse kernel arrays.

    Returns ``(r_idx, r_cnt, c_idx, c_val, kind, par, target)``: per reaction,
    the reactant species/counts and the changed species/net changes, padded
    with ``-1`` indices.
    """
    K = network.n_reactions
    kind = np.zeros(K, dtype=np.int64)
    par = np.zeros((K, 3), dtype=np.float64)
    target = np.zeros(K, dtype=np.int64)
    reactants = [np.flatnonzero(r.reactants) for r in network.reactions]
    changes = [np.flatnonzero(r.net) for r in network.reactions]
    width_r = max(1, max(len(v) for v in reactants))
    width_c = max(1, max(len(v) for v in changes))
    r_idx = np.full((K, width_r), -1, dtype=np.int64)
    r_cnt = np.zeros((K, width_r), dtype=np.int64)
    c_idx = np.full((K, width_c), -1, dtype=np.int64)
    c_val = np.zeros((K, width_c), dtype=np.int64)
    for k, r in enumerate(network.reactions):
        r_idx[k, :len(reactants[k])] = reactants[k]
        r_cnt[k, :len(reactants[k])] = r.reactants[reactants[k]]
        c_idx[k, :len(changes[k])] = changes[k]
        c_val[k, :len(changes[k])] = r.net[changes[k]]
        law = r.rate
        if isinstance(law, MassAction):
            kind[k] = MASS_ACTION
            par[k, 0] = law.rate
        elif isinstance(law, OnOffProportional):
            kind[k] = ON_OFF
            par[k] = (law.Kp, law.mu, law.theta)
            target[k] = law.target
        elif isinstance(law, Hill):
            kind[k] = HILL
            par[k, 0] = law.Kp
            target[k] = law.target
        else:  # pragma: no cover - guarded by Reaction
            raise TypeError(f"unsupported rate law {law!r}")
    return r_idx, r_cnt, c_idx, c_val, kind, par, target


@njit(inline="always")
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(inline="always")
def _next(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(inline="always")
def _uniform(s):
    # 53 random mantissa bits, value in [0, 1)
    return (_next(s) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(inline="always")
def _propensities(r_idx, r_cnt, kind, par, target, x, a):
    K, R = r_idx.shape
    total = 0.0
    for k in range(K):
        v = 1.0
        for q in range(R):
            i = r_idx[k, q]
            if i < 0:
                break
            n = r_cnt[k, q]
            xi = x[i]
            if xi < n:
                v = 0.0
                break
            for j in range(n):
                v *= xi - j
        if v != 0.0:
            kk = kind[k]
            if kk == MASS_ACTION:
                v *= par[k, 0]
            elif kk == ON_OFF:
                e = par[k, 1] - par[k, 2] * x[target[k]]
                v = v * par[k, 0] * e if e > 0.0 else 0.0
            else:
                v *= par[k, 0] / (1.0 + x[target[k]])
        a[k] = v
        total += v
    return total


@njit(inline="always")
def _fire(c_idx, c_val, k, x):
    """Apply reaction ``k``; returns False if a count overflows."""
    for q in range(c_idx.shape[1]):
        i = c_idx[k, q]
        if i < 0:
            break
        x[i] += c_val[k, q]
        if x[i] > 4611686018427387904:
            return False
    return True


@njit(inline="always")
def _select(a, total, u):
    r = u * total
    acc = 0.0
    K = a.shape[0]
    for k in range(K):
        acc += a[k]
        if r < acc:
            return k
    # round-off at the upper end: last reaction with positive propensity
    for k in range(K - 1, -1, -1):
        if a[k] > 0.0:
            return k
    return K - 1


@njit(nogil=True, cache=True)
def ssa_on_grid(r_idx, r_cnt, c_idx, c_val, kind, par, target, x0, grid, seed, out):
    """Simulate one trajectory and write the state at each grid time into ``out``.

    Returns ``(status, n_events)``; on failure ``out[-1]`` holds the offending state.
    """
    K = r_idx.shape[0]
    s = seed.copy()
    x = x0.copy()
    a = np.empty(K)
    t = 0.0
    j = 0
    T = grid.shape[0]
    events = 0
    while j < T:
        total = _propensities(r_idx, r_cnt, kind, par, target, x, a)
        if not (total < np.inf):
            out[T - 1, :] = x
            return NON_FINITE, events
        if total <= 0.0:
            while j < T:
                out[j, :] = x
                j += 1
            break
        tau = -np.log(1.0 - _uniform(s)) / total
        t_next = t + tau
        while j < T and grid[j] < t_next:
            out[j, :] = x
            j += 1
        if j >= T:
            break
        k = _select(a, total, _uniform(s))
        if not _fire(c_idx, c_val, k, x):
            out[T - 1, :] = x
            return OVERFLOW, events
        t = t_next
        events += 1
    return OK, events


@njit(nogil=True, cache=True)
def ssa_block(r_idx, r_cnt, c_idx, c_val, kind, par, target, x0, grid, seeds, out):
    """Run ``seeds.shape[0]`` trajectories; ``out`` has shape (n, T, d)."""
    n = seeds.shape[0]
    events = 0
    for i in range(n):
        status, ev = ssa_on_grid(r_idx, r_cnt, c_idx, c_val, kind, par, target, x0, grid,
                                 seeds[i], out[i])
        events += ev
        if status != OK:
            return status, i, events
    return OK, -1, events


@njit(nogil=True, cache=True)
def ssa_path(r_idx, r_cnt, c_idx, c_val, kind, par, target, x0, t_end, seed, capacity):
    """Full jump sequence up to ``t_end``; arrays grow by doubling."""
    K = r_idx.shape[0]
    d = x0.shape[0]
    s = seed.copy()
    x = x0.copy()
    a = np.empty(K)
    times = np.empty(capacity)
    states = np.empty((capacity, d), dtype=np.int64)
    reactions = np.empty(capacity, dtype=np.int64)
    times[0] = 0.0
    states[0, :] = x
    reactions[0] = -1
    m = 1
    t = 0.0
    while True:
        total = _propensities(r_idx, r_cnt, kind, par, target, x, a)
        if not (total < np.inf):
            return NON_FINITE, times[:m], states[:m], reactions[:m], x
        if total <= 0.0:
            break
        t += -np.log(1.0 - _uniform(s)) / total
        if t > t_end:
            break
        k = _select(a, total, _uniform(s))
        if not _fire(c_idx, c_val, k, x):
            return OVERFLOW, times[:m], states[:m], reactions[:m], x
        if m == times.shape[0]:
            cap = 2 * m
            nt = np.empty(cap)
            nt[:m] = times
            ns = np.empty((cap, d), dtype=np.int64)
            ns[:m] = states
            nr = np.empty(cap, dtype=np.int64)
            nr[:m] = reactions
            times, states, reactions = nt, ns, nr
        times[m] = t
        states[m, :] = x
        reactions[m] = k
        m += 1
    return OK, times[:m], states[:m], reactions[:m], x
