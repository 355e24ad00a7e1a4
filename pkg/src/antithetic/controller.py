"""Antithetic integral controller and negative feedback composition.

The controller adds two species, the actuator ``Z1`` and the sensor ``Z2``,
always appended after the open-loop species, and four mass-action reactions::

    0 --mu--> Z1                  (reference)
    X_l --theta--> X_l + Z2       (measurement, propensity theta * x_l)
    Z1 + Z2 --eta--> 0            (comparison)
    Z1 --k--> Z1 + X_a            (actuation, propensity k * z1)

An optional feedback reaction ``0 -> X_a`` with propensity ``F(x_l)`` is added
by :func:`attach_feedback`.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .crn import Hill, MassAction, Network, OnOffProportional, Reaction
from .errors import AnalysisError, StructuralError

__all__ = [
    "FEEDBACK_KINDS",
    "Feedback",
    "ClosedLoopConfig",
    "ClosedLoopNetwork",
    "attach_antithetic",
    "attach_feedback",
    "closed_loop",
    "nominal_input",
    "ergodicity_guard",
    "GuardResult",
]

FEEDBACK_KINDS = ("on_off", "hill")


@dataclass(frozen=True)
class Feedback:
    kind: str
    Kp: float

    def __post_init__(self):
        if self.kind not in FEEDBACK_KINDS:
            raise StructuralError(f"feedback kind must be one of {FEEDBACK_KINDS}, got {self.kind!r}")
        if not self.Kp >= 0:
            raise StructuralError(f"Kp must be >= 0, got {self.Kp}")


@dataclass(frozen=True)
class ClosedLoopConfig:
    """Controller parameters.

    ``controlled`` and ``actuated`` are 0-based indices into the open-loop
    species.  ``z0`` is the initial (Z1, Z2) count used by simulations.
    """

    mu: float
    theta: float
    eta: float
    k: float
    controlled: int
    actuated: int = 0
    feedback: Optional[Feedback] = None
    z0: tuple = (0, 0)

    def __post_init__(self):
        for name in ("mu", "theta", "eta", "k"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise StructuralError(f"{name} must be finite and > 0, got {value}")

    @property
    def set_point(self):
        return self.mu / self.theta

    def with_(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self, species=None):
        def name(i):
            return species[i] if species is not None else i

        out = {"mu": self.mu, "theta": self.theta, "eta": self.eta, "k": self.k,
               "controlled": name(self.controlled), "actuated": name(self.actuated)}
        if self.feedback is not None:
            out["feedback"] = {"kind": self.feedback.kind, "Kp": self.feedback.Kp}
        if tuple(self.z0) != (0, 0):
            out["z0"] = list(self.z0)
        return out

    @classmethod
    def from_dict(cls, data, species):
        """Parse a controller block; species may be referenced by name or index."""

        def resolve(ref, what):
            if isinstance(ref, int) and 0 <= ref < len(species):
                return ref
            if ref in species:
                return species.index(ref)
            raise StructuralError(f"controller: unknown {what} species {ref!r}")

        fb = data.get("feedback")
        feedback = None
        if fb and fb.get("kind") not in (None, "none"):
            feedback = Feedback(fb["kind"], float(fb.get("Kp", 0.0)))
        try:
            return cls(mu=float(data["mu"]), theta=float(data["theta"]),
                       eta=float(data["eta"]), k=float(data["k"]),
                       controlled=resolve(data["controlled"], "controlled"),
                       actuated=resolve(data.get("actuated", 0), "actuated"),
                       feedback=feedback, z0=tuple(data.get("z0", (0, 0))))
        except KeyError as exc:
            raise StructuralError(f"controller block is missing {exc}") from None


@dataclass(frozen=True)
class ClosedLoopNetwork:
    network: Network
    config: ClosedLoopConfig
    open_loop: Network

    @property
    def open_loop_dim(self):
        return self.open_loop.dim

    @property
    def z1(self):
        return self.open_loop_dim

    @property
    def z2(self):
        return self.open_loop_dim + 1

    @property
    def has_feedback(self):
        return self.network.n_reactions > self.open_loop.n_reactions + 4

    def feedback_law(self):
        """The feedback rate law, or None when no feedback reaction is attached."""
        if not self.has_feedback:
            return None
        return self.network.reactions[-1].rate

    def initial_state(self, x0=None):
        """Open-loop initial counts (default zeros) followed by ``config.z0``."""
        x0 = np.zeros(self.open_loop_dim, dtype=np.int64) if x0 is None else np.asarray(x0)
        if x0.size == self.network.dim:
            return x0.astype(np.int64)
        return np.concatenate([x0.astype(np.int64), np.asarray(self.config.z0, dtype=np.int64)])


def _pad(vec, extra=2):
    return np.concatenate([np.asarray(vec, dtype=np.int64), np.zeros(extra, dtype=np.int64)])


def attach_antithetic(network, config):
    d = network.dim
    for name, idx in (("controlled", config.controlled), ("actuated", config.actuated)):
        if not 0 <= idx < d:
            raise StructuralError(f"{name} index {idx} out of range for {d} species")
    if "Z1" in network.species or "Z2" in network.species:
        raise StructuralError("open-loop network already uses the names Z1/Z2")

    def unit(i):
        v = np.zeros(d + 2, dtype=np.int64)
        v[i] = 1
        return v

    zero = np.zeros(d + 2, dtype=np.int64)
    z1, z2, xl, xa = unit(d), unit(d + 1), unit(config.controlled), unit(config.actuated)
    controller = (
        Reaction(zero, z1, MassAction(config.mu), "reference"),
        Reaction(xl, xl + z2, MassAction(config.theta), "measurement"),
        Reaction(z1 + z2, zero, MassAction(config.eta), "comparison"),
        Reaction(z1, z1 + xa, MassAction(config.k), "actuation"),
    )
    # open-loop reactions keep their own rate laws; functional targets are unchanged
    lifted = tuple(Reaction(_pad(r.reactants), _pad(r.products), r.rate, r.label)
                   for r in network.reactions)
    closed = Network(network.species + ("Z1", "Z2"), lifted + controller,
                     name=f"{network.name}+antithetic" if network.name else "antithetic",
                     description=network.description)
    return ClosedLoopNetwork(closed, config.with_(feedback=None), network)


def attach_feedback(closed, kind, Kp):
    if closed.has_feedback:
        raise StructuralError("a feedback reaction is already attached")
    fb = Feedback(kind, float(Kp))
    cfg = closed.config
    if kind == "on_off":
        law = OnOffProportional(fb.Kp, cfg.mu, cfg.theta, cfg.controlled)
    else:
        law = Hill(fb.Kp, cfg.controlled)
    d = closed.network.dim
    product = np.zeros(d, dtype=np.int64)
    product[cfg.actuated] = 1
    rxn = Reaction(np.zeros(d, dtype=np.int64), product, law, "feedback")
    net = dataclasses.replace(closed.network, reactions=closed.network.reactions + (rxn,))
    return ClosedLoopNetwork(net, cfg.with_(feedback=fb), closed.open_loop)


def closed_loop(network, config):
    """Antithetic controller plus ``config.feedback`` (if any) in one call."""
    closed = attach_antithetic(network, config)
    if config.feedback is not None:
        closed = attach_feedback(closed, config.feedback.kind, config.feedback.Kp)
    return dataclasses.replace(closed, config=config)


def nominal_input(lin, controlled, mu, theta, actuated=0):
    """Constant production rate of the actuated species giving mean ``mu/theta``.

    This is ``c = -(mu/theta + e_l' (SW)^-1 S w0) / (e_l' (SW)^-1 e_a)``.
    """
    SW = lin.SW
    d = SW.shape[0]
    if np.linalg.matrix_rank(SW) < d:
        raise AnalysisError("open loop has no unique stationary mean (SW is singular)")
    e_a = np.zeros(d)
    e_a[actuated] = 1.0
    gain = np.linalg.solve(SW, e_a)[controlled]
    if gain == 0:
        raise AnalysisError("the actuated species does not reach the controlled species")
    basal = np.linalg.solve(SW, lin.S @ lin.w0)[controlled]
    return -(mu / theta + basal) / gain


class GuardResult(NamedTuple):
    ok: bool
    message: str = ""


def ergodicity_guard(kind, Kp, u_star, mu):
    """Conservative sufficient ergodicity check for the feedback strength.

    The worst-case mean feedback is ``Kp * mu`` (ON/OFF) or ``Kp`` (Hill); it
    must stay below the nominal input ``u_star``.  A failed check is a warning,
    the closed loop may still be simulated.
    """
    if kind is None or Kp == 0:
        return GuardResult(True)
    bound = u_star / mu if kind == "on_off" else u_star
    if Kp < bound:
        return GuardResult(True)
    return GuardResult(False, f"{kind} feedback with Kp={Kp:g} exceeds the sufficient "
                              f"ergodicity bound Kp < {bound:g}")
