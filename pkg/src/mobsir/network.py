"""
Mobility networks: locations, origin-destination flows, strength ranking,
seed selection and quarantine interventions.

Flow orientation follows the model equations: ``flows[i, j]`` is the number
of individuals moving per day *from* location ``j`` *to* location ``i``.
A location's out-strength is therefore a column sum.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import ConfigurationError

__all__ = [
    "Location",
    "MobilityNetwork",
    "SeedVariant",
    "SeedStrategy",
    "QuarantineIntervention",
    "generate_random_network",
    "out_strength",
    "in_strength",
    "rank_by_strength",
    "select_seed",
    "quarantined_locations",
    "apply_quarantine",
]


@dataclass(frozen=True)
class Location:
    id: int
    name: str
    population: float

    def __post_init__(self):
        if not self.population > 0:
            raise ConfigurationError(
                f"location {self.id} ({self.name!r}) has non-positive population {self.population}")


@dataclass(frozen=True, eq=False)
class MobilityNetwork:
    """
    A set of locations coupled by a dense daily OD flow matrix.

    Parameters
    ----------
    locations : sequence of Location
        Ordered with ids ``0 .. n-1``.
    flows : array_like, shape (n, n)
        ``flows[i, j]`` is the daily flow from ``j`` to ``i``. Must be
        nonnegative with a zero diagonal.

    The flow matrix is copied and marked read-only, so networks can be
    shared freely.
    """

    locations: tuple
    flows: np.ndarray = field(repr=False)

    def __post_init__(self):
        locs = tuple(self.locations)
        for k, loc in enumerate(locs):
            if loc.id != k:
                raise ConfigurationError(
                    f"location ids must be contiguous from 0; position {k} has id {loc.id}")
        flows = np.array(self.flows, dtype=float, copy=True)
        n = len(locs)
        if flows.shape != (n, n):
            raise ConfigurationError(f"flow matrix has shape {flows.shape}, expected {(n, n)}")
        if not np.all(np.isfinite(flows)):
            raise ConfigurationError("flow matrix contains non-finite entries")
        if np.any(flows < 0):
            raise ConfigurationError("flow matrix contains negative entries")
        if n and np.any(np.diag(flows) != 0):
            raise ConfigurationError("flow matrix must have a zero diagonal (no self-mobility)")
        flows.setflags(write=False)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "flows", flows)

    @classmethod
    def from_arrays(cls, populations, flows, names=None):
        """Build a network from a population vector and a flow matrix."""
        populations = np.asarray(populations, dtype=float)
        if names is None:
            names = [f"loc{k}" for k in range(len(populations))]
        locs = tuple(Location(k, str(nm), float(p))
                     for k, (nm, p) in enumerate(zip(names, populations)))
        return cls(locs, flows)

    @property
    def n(self) -> int:
        return len(self.locations)

    @property
    def populations(self) -> np.ndarray:
        return np.array([loc.population for loc in self.locations], dtype=float)

    @property
    def names(self) -> list:
        return [loc.name for loc in self.locations]

    def index_of(self, name: str) -> int:
        for loc in self.locations:
            if loc.name == name:
                return loc.id
        raise KeyError(name)

    def with_flows(self, flows) -> "MobilityNetwork":
        return MobilityNetwork(self.locations, flows)

    def permuted(self, order: Sequence[int]) -> "MobilityNetwork":
        """Relabel locations so that new location ``k`` is old ``order[k]``."""
        order = np.asarray(order, dtype=int)
        locs = tuple(Location(k, self.locations[o].name, self.locations[o].population)
                     for k, o in enumerate(order))
        return MobilityNetwork(locs, self.flows[np.ix_(order, order)])

    def fingerprint(self) -> str:
        """SHA-256 over names, populations and flows."""
        h = hashlib.sha256()
        h.update("\x1f".join(self.names).encode("utf-8"))
        h.update(np.ascontiguousarray(self.populations).tobytes())
        h.update(np.ascontiguousarray(self.flows).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, MobilityNetwork):
            return NotImplemented
        return (self.locations == other.locations
                and np.array_equal(self.flows, other.flows))

    __hash__ = None


class SeedVariant(str, enum.Enum):
    RANDOM = "random"
    WEAKEST = "weakest"
    STRONGEST = "strongest"


@dataclass(frozen=True)
class SeedStrategy:
    variant: SeedVariant = SeedVariant.RANDOM
    rng_seed: int = 0

    def __post_init__(self):
        try:
            object.__setattr__(self, "variant", SeedVariant(self.variant))
        except ValueError:
            raise ConfigurationError(f"unknown seed strategy {self.variant!r}") from None
        if int(self.rng_seed) < 0:
            raise ConfigurationError("rng_seed must be nonnegative")


@dataclass(frozen=True)
class QuarantineIntervention:
    """Remove all mobility of the top ``percentile`` % strongest locations."""

    percentile: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.percentile <= 100.0:
            raise ConfigurationError(f"quarantine percentile {self.percentile} outside [0, 100]")


def generate_random_network(n, population_range=(1e4, 1e6), flow_fraction=0.01, rng_seed=0):
    """
    Synthetic network with uniform populations and uniform OD flows.

    Each off-diagonal ``flows[i, j]`` is drawn from ``U[0, flow_fraction * N_j]``,
    i.e. bounded by a fixed share of the origin's population.

    Parameters
    ----------
    n : int
        Number of locations, at least 1.
    population_range : (float, float)
        Bounds of the uniform population draw, ``0 < min <= max``.
    flow_fraction : float
        In ``(0, 1]``.
    rng_seed : int
        Seed for :func:`numpy.random.default_rng`; output is a pure function
        of the arguments.
    """
    n = int(n)
    lo, hi = (float(v) for v in population_range)
    if n < 1:
        raise ConfigurationError("network needs at least one location")
    if not (0 < lo <= hi) or not math.isfinite(hi):
        raise ConfigurationError(f"invalid population range ({lo}, {hi})")
    if not 0 < flow_fraction <= 1:
        raise ConfigurationError(f"flow_fraction {flow_fraction} outside (0, 1]")

    rng = np.random.default_rng(int(rng_seed))
    populations = rng.uniform(lo, hi, size=n)
    flows = rng.uniform(0.0, 1.0, size=(n, n)) * (flow_fraction * populations[np.newaxis, :])
    np.fill_diagonal(flows, 0.0)
    return MobilityNetwork.from_arrays(populations, flows)


def _check_id(net, j):
    if not (isinstance(j, (int, np.integer)) and 0 <= j < net.n):
        raise IndexError(f"location id {j!r} out of range for {net.n} locations")


def out_strength(net: MobilityNetwork, j: int) -> float:
    """Total daily outflow from location ``j`` (column sum)."""
    _check_id(net, j)
    return float(net.flows[:, j].sum())


def in_strength(net: MobilityNetwork, i: int) -> float:
    """Total daily inflow into location ``i``. Diagnostic only; not used for ranking."""
    _check_id(net, i)
    return float(net.flows[i, :].sum())


def rank_by_strength(net: MobilityNetwork) -> list:
    """Location ids by descending out-strength, ties broken by ascending id."""
    strengths = net.flows.sum(axis=0)
    # lexsort uses the last key as primary
    return [int(k) for k in np.lexsort((np.arange(net.n), -strengths))]


def select_seed(net: MobilityNetwork, strategy: SeedStrategy) -> int:
    if net.n == 0:
        raise ConfigurationError("cannot select a seed in an empty network")
    if strategy.variant is SeedVariant.RANDOM:
        return int(np.random.default_rng(int(strategy.rng_seed)).integers(net.n))
    ranking = rank_by_strength(net)
    if strategy.variant is SeedVariant.STRONGEST:
        return ranking[0]
    return ranking[-1]


def quarantined_locations(net: MobilityNetwork, q: QuarantineIntervention) -> list:
    """Ids whose mobility ``q`` removes: the first ``ceil(X/100 * n)`` by strength."""
    # 1e-9 slack keeps e.g. 30% of 10 at 3 despite rounding
    m = math.ceil(q.percentile * net.n / 100.0 - 1e-9)
    m = min(max(m, 0), net.n)
    return rank_by_strength(net)[:m]


def apply_quarantine(net: MobilityNetwork, q: QuarantineIntervention) -> MobilityNetwork:
    """
    Zero every inbound and outbound flow of the strongest locations.

    Returns a new network; ``net`` is left untouched.
    """
    chosen = quarantined_locations(net, q)
    flows = net.flows.copy()
    flows[chosen, :] = 0.0
    flows[:, chosen] = 0.0
    return net.with_flows(flows)
