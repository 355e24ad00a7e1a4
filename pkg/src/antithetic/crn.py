"""Reaction networks with integer states, propensities and linear structure.

A network is a list of species names plus reactions.  Each reaction carries
its reactant and product stoichiometry as integer vectors and one of three
rate laws:

* :class:`MassAction` -- combinatorial mass action, ``rho * prod x_i!/(x_i - n_i)!``
* :class:`OnOffProportional` -- ``Kp * max(0, mu - theta * x_target)``
* :class:`Hill` -- ``Kp / (1 + x_target)``

Functional laws carry their own parameters so that a network is
self-contained and can be serialised to JSON.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import StructuralError, UnsupportedStructureError

__all__ = [
    "MassAction",
    "OnOffProportional",
    "Hill",
    "Reaction",
    "Network",
    "State",
    "LinearPropensityStructure",
    "propensity",
    "propensities",
    "stoichiometric_matrix",
    "is_unimolecular",
    "linearize_propensities",
    "reaction",
]


@dataclass(frozen=True)
class MassAction:
    rate: float

    def __post_init__(self):
        if not self.rate >= 0:
            raise StructuralError(f"mass-action rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class OnOffProportional:
    """ON/OFF proportional feedback ``Kp * max(0, mu - theta * x[target])``."""

    Kp: float
    mu: float
    theta: float
    target: int

    def __post_init__(self):
        if not self.Kp >= 0:
            raise StructuralError(f"Kp must be >= 0, got {self.Kp}")

    def __call__(self, x_target):
        return self.Kp * max(0.0, self.mu - self.theta * x_target)


@dataclass(frozen=True)
class Hill:
    """Non-cooperative repressing Hill feedback ``Kp / (1 + x[target])``."""

    Kp: float
    target: int

    def __post_init__(self):
        if not self.Kp >= 0:
            raise StructuralError(f"Kp must be >= 0, got {self.Kp}")

    def __call__(self, x_target):
        return self.Kp / (1.0 + x_target)


RateLaw = Union[MassAction, OnOffProportional, Hill]


def _int_vector(values, name):
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 1:
        raise StructuralError(f"{name} must be a vector")
    if np.any(arr < 0):
        raise StructuralError(f"{name} must be nonnegative, got {arr.tolist()}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Reaction:
    reactants: np.ndarray
    products: np.ndarray
    rate: RateLaw
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "reactants", _int_vector(self.reactants, "reactants"))
        object.__setattr__(self, "products", _int_vector(self.products, "products"))
        if self.reactants.shape != self.products.shape:
            raise StructuralError("reactant and product vectors differ in length")
        target = getattr(self.rate, "target", None)
        if target is not None and not 0 <= target < self.reactants.size:
            raise StructuralError(f"rate-law target {target} out of range")

    @property
    def net(self):
        return self.products - self.reactants

    @property
    def order(self):
        return int(self.reactants.sum())

    def __eq__(self, other):
        if not isinstance(other, Reaction):
            return NotImplemented
        return (
            np.array_equal(self.reactants, other.reactants)
            and np.array_equal(self.products, other.products)
            and self.rate == other.rate
        )

    def __hash__(self):
        return hash((tuple(self.reactants), tuple(self.products), self.rate))


@dataclass(frozen=True)
class Network:
    species: tuple
    reactions: tuple
    name: str = ""
    description: str = ""

    def __post_init__(self):
        species = tuple(self.species)
        reactions = tuple(self.reactions)
        object.__setattr__(self, "species", species)
        object.__setattr__(self, "reactions", reactions)
        if len(set(species)) != len(species):
            raise StructuralError(f"duplicate species names in {species}")
        if not reactions:
            raise StructuralError("a network needs at least one reaction")
        d = len(species)
        for k, r in enumerate(reactions):
            if r.reactants.size != d:
                raise StructuralError(
                    f"reaction {k} has stoichiometry of length {r.reactants.size}, expected {d}"
                )

    @property
    def dim(self):
        return len(self.species)

    @property
    def n_reactions(self):
        return len(self.reactions)

    def index(self, name):
        try:
            return self.species.index(name)
        except ValueError:
            raise StructuralError(f"unknown species {name!r}") from None

    # -- serialisation ----------------------------------------------------

    def to_dict(self):
        def stoich(vec):
            return {self.species[i]: int(v) for i, v in enumerate(vec) if v}

        reactions = []
        for r in self.reactions:
            law = r.rate
            if isinstance(law, MassAction):
                rate = {"kind": "mass_action", "value": law.rate}
            elif isinstance(law, OnOffProportional):
                rate = {"kind": "on_off", "Kp": law.Kp, "mu": law.mu,
                        "theta": law.theta, "target": self.species[law.target]}
            else:
                rate = {"kind": "hill", "Kp": law.Kp, "target": self.species[law.target]}
            entry = {"reactants": stoich(r.reactants), "products": stoich(r.products), "rate": rate}
            if r.label:
                entry["label"] = r.label
            reactions.append(entry)
        out = {"species": list(self.species), "reactions": reactions}
        if self.name:
            out["name"] = self.name
        if self.description:
            out["description"] = self.description
        return out

    @classmethod
    def from_dict(cls, data):
        try:
            species = list(data["species"])
            raw_reactions = data["reactions"]
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"model needs 'species' and 'reactions' keys ({exc})") from None
        index = {s: i for i, s in enumerate(species)}

        def vec(mapping, where):
            v = np.zeros(len(species), dtype=np.int64)
            for name, count in (mapping or {}).items():
                if name not in index:
                    raise StructuralError(f"{where}: unknown species {name!r}")
                v[index[name]] = int(count)
            return v

        reactions = []
        for k, entry in enumerate(raw_reactions):
            where = f"reaction {k}"
            rate = entry.get("rate")
            if not isinstance(rate, dict) or "kind" not in rate:
                raise StructuralError(f"{where}: rate must be an object with a 'kind'")
            kind = rate["kind"]
            if kind == "mass_action":
                law = MassAction(float(rate["value"]))
            elif kind in ("on_off", "hill"):
                target = rate.get("target")
                if target not in index:
                    raise StructuralError(f"{where}: unknown target species {target!r}")
                if kind == "on_off":
                    law = OnOffProportional(float(rate["Kp"]), float(rate["mu"]),
                                            float(rate["theta"]), index[target])
                else:
                    law = Hill(float(rate["Kp"]), index[target])
            else:
                raise StructuralError(f"{where}: unknown rate kind {kind!r}")
            reactions.append(Reaction(vec(entry.get("reactants"), where),
                                      vec(entry.get("products"), where), law,
                                      entry.get("label", "")))
        return cls(tuple(species), tuple(reactions), data.get("name", ""),
                   data.get("description", ""))

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def digest(self):
        """SHA-256 of the canonical JSON form, used in manifests."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class State:
    counts: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64).copy()
        if np.any(self.counts < 0):
            raise StructuralError("molecule counts must be nonnegative")
        if self.time < 0:
            raise StructuralError("time must be nonnegative")


@dataclass(frozen=True)
class LinearPropensityStructure:
    """``lambda(x) = W x + w0`` together with the stoichiometric matrix ``S``."""

    W: np.ndarray
    w0: np.ndarray
    S: np.ndarray

    @property
    def SW(self):
        return self.S @ self.W

    def __call__(self, x):
        return self.W @ np.asarray(x, dtype=float) + self.w0


def _counts(state):
    return state.counts if isinstance(state, State) else np.asarray(state, dtype=np.int64)


def propensity(reaction, state):
    """Firing rate of ``reaction`` at ``state`` (a :class:`State` or count vector)."""
    x = _counts(state)
    if x.shape != reaction.reactants.shape:
        raise StructuralError(
            f"state has dimension {x.shape}, reaction expects {reaction.reactants.shape}")
    combinations = 1
    for xi, ni in zip(x.tolist(), reaction.reactants.tolist()):
        if ni:
            if xi < ni:
                return 0.0
            combinations *= math.perm(xi, ni)
    law = reaction.rate
    if isinstance(law, MassAction):
        return float(law.rate * combinations)
    return float(combinations * law(int(x[law.target])))


def propensities(network, state):
    return np.array([propensity(r, state) for r in network.reactions])


def stoichiometric_matrix(network):
    """The d x K matrix whose k-th column is the net change of reaction k."""
    return np.stack([r.net for r in network.reactions], axis=1)


def is_unimolecular(network):
    return all(isinstance(r.rate, MassAction) and r.order <= 1 for r in network.reactions)


def linearize_propensities(network):
    if not is_unimolecular(network):
        raise UnsupportedStructureError(
            "propensities are affine only for unimolecular mass-action networks")
    K, d = network.n_reactions, network.dim
    W = np.zeros((K, d))
    w0 = np.zeros(K)
    for k, r in enumerate(network.reactions):
        if r.order == 0:
            w0[k] = r.rate.rate
        else:
            W[k, int(np.argmax(r.reactants))] = r.rate.rate
    return LinearPropensityStructure(W, w0, stoichiometric_matrix(network))


def reaction(species, reactants, products, rate, label=""):
    """Build a :class:`Reaction` from name->count mappings over ``species``."""
    idx = {s: i for i, s in enumerate(species)}

    def vec(mapping):
        v = np.zeros(len(species), dtype=np.int64)
        for name, count in mapping.items():
            v[idx[name]] = count
        return v

    return Reaction(vec(reactants), vec(products), rate, label)
