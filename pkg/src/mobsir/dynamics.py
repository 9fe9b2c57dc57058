"""
Mean-field dynamics of the mobility-coupled SIR model and fixed-step
integration.

For location ``i`` with population ``N_i``::

    force_i = beta*I_i/N_i + alpha*beta*(sum_j c_ij I_j/N_j) / (N_i + sum_j c_ij)
    dS_i/dt = -S_i * force_i
    dI_i/dt = S_i * force_i - rec_i
    dR_i/dt = rec_i

with ``rec_i = mu*I_i`` (``RecoveryMode.COUNT``, the default) or
``rec_i = mu*I_i/N_i`` (``RecoveryMode.NORMALIZED``). Only the count form
collapses to the classical SIR model when ``alpha = 0``.

States are head counts; divide by ``N_i`` for fractions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigurationError, ShapeError, StiffnessError
from .network import MobilityNetwork

__all__ = [
    "RecoveryMode",
    "Scheme",
    "EpidemicParams",
    "CompartmentState",
    "IntegratorConfig",
    "Trajectory",
    "derivatives",
    "step",
    "simulate",
    "classical_sir",
    "seed_state",
    "CLAMP_TOL",
]

# undershoot below -CLAMP_TOL is an error, anything in [-CLAMP_TOL, 0) is clamped
CLAMP_TOL = 1e-9


class RecoveryMode(str, enum.Enum):
    COUNT = "count"
    NORMALIZED = "normalized"


class Scheme(str, enum.Enum):
    EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class EpidemicParams:
    """
    Epidemic rates.

    Parameters
    ----------
    beta : float
        Local transmission rate per day, in [0, 1].
    mu : float
        Recovery rate per day, in [0, 1].
    alpha : float
        Social connectivity, in [0, 1]; scales transmission imported via mobility.
    recovery_mode : RecoveryMode
        ``COUNT`` recovers ``mu*I`` per day, ``NORMALIZED`` recovers ``mu*I/N``.
    """

    beta: float
    mu: float
    alpha: float = 1.0
    recovery_mode: RecoveryMode = RecoveryMode.COUNT

    def __post_init__(self):
        for name in ("beta", "mu", "alpha"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating)) and 0.0 <= v <= 1.0):
                raise ConfigurationError(f"{name}={v!r} outside [0, 1]")
        try:
            object.__setattr__(self, "recovery_mode", RecoveryMode(self.recovery_mode))
        except ValueError:
            raise ConfigurationError(f"unknown recovery mode {self.recovery_mode!r}") from None


@dataclass(frozen=True, eq=False)
class CompartmentState:
    t: float
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        arrs = []
        for name in ("S", "I", "R"):
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise ShapeError(f"{name} must be one-dimensional")
            a.setflags(write=False)
            arrs.append(a)
        if not arrs[0].shape == arrs[1].shape == arrs[2].shape:
            raise ShapeError("S, I and R must have equal length")
        for name, a in zip("SIR", arrs):
            object.__setattr__(self, name, a)
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @property
    def totals(self) -> np.ndarray:
        return self.S + self.I + self.R


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: Scheme = Scheme.RK4
    dt: float = 0.1
    horizon: float = 300.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "scheme", Scheme(self.scheme))
        except ValueError:
            raise ConfigurationError(f"unknown integration scheme {self.scheme!r}") from None
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt={self.dt} must be positive")
        if not self.horizon >= self.dt:
            raise ConfigurationError(f"horizon={self.horizon} shorter than dt={self.dt}")

    @property
    def n_steps(self) -> int:
        # tolerate horizon/dt landing a hair under an integer
        return int(math.floor(self.horizon / self.dt + 1e-9))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Compartment counts sampled every ``dt`` from ``t = 0``.

    ``S``, ``I`` and ``R`` have shape ``(len(t), n_locations)``.
    """

    t: np.ndarray
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    populations: np.ndarray
    params: object = None
    network_fingerprint: str = ""
    names: tuple = field(default=())

    def __len__(self):
        return self.t.shape[0]

    def __getitem__(self, k) -> CompartmentState:
        return CompartmentState(self.t[k], self.S[k], self.I[k], self.R[k])

    @property
    def states(self) -> list:
        return [self[k] for k in range(len(self))]

    @property
    def n_locations(self) -> int:
        return self.S.shape[1]

    @property
    def final(self) -> CompartmentState:
        return self[-1]

    def totals(self):
        """Aggregate ``(S, I, R)`` summed over locations, each of shape ``(T,)``."""
        return self.S.sum(axis=1), self.I.sum(axis=1), self.R.sum(axis=1)

    def fractions(self):
        """Per-location fractions ``S/N, I/N, R/N``."""
        N = self.populations[np.newaxis, :]
        return self.S / N, self.I / N, self.R / N

    def cumulative_cases(self) -> np.ndarray:
        """Aggregate ever-infected count ``sum(I + R)`` per sample."""
        return (self.I + self.R).sum(axis=1)


class _Coupling:
    """Per-network constants reused by every right-hand-side evaluation."""

    __slots__ = ("N", "flows", "denom", "isolated")

    def __init__(self, net: MobilityNetwork):
        self.N = net.populations
        if np.any(self.N <= 0):
            raise ConfigurationError("all populations must be positive")
        self.flows = net.flows
        self.denom = self.N + self.flows.sum(axis=1)
        self.isolated = not np.any(self.flows)


def _rhs(y, coup: _Coupling, params: EpidemicParams):
    S, I = y[0], y[1]
    N = coup.N
    local = params.beta * S * I / N
    if params.alpha == 0.0 or coup.isolated:
        imported = 0.0
    else:
        imported = params.alpha * S * (coup.flows @ (I / N)) * params.beta / coup.denom
    dS = -local - imported
    if params.recovery_mode is RecoveryMode.COUNT:
        rec = params.mu * I
    else:
        rec = params.mu * I / N
    dI = -dS - rec
    return np.stack((dS, dI, rec))


def _advance(f, y, dt, scheme):
    if scheme is Scheme.EULER:
        return y + dt * f(y)
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _clamp(y, t):
    low = y.min()
    if low < 0.0:
        if low < -CLAMP_TOL:
            raise StiffnessError(
                f"compartment fell to {low:.3g} at t={t:g}; reduce the time step dt")
        y = np.where(y < 0.0, 0.0, y)
    return y


def _check_dims(state, net):
    if state.n != net.n:
        raise ShapeError(f"state has {state.n} locations, network has {net.n}")


def derivatives(state: CompartmentState, net: MobilityNetwork, params: EpidemicParams):
    """
    Time derivatives of every compartment.

    Returns
    -------
    dS, dI, dR : ndarray
        Per-location rates in individuals per day; ``dS + dI + dR`` is zero
        per location.
    """
    _check_dims(state, net)
    y = np.stack((state.S, state.I, state.R))
    d = _rhs(y, _Coupling(net), params)
    return d[0], d[1], d[2]


def step(state: CompartmentState, net: MobilityNetwork, params: EpidemicParams,
         integ: IntegratorConfig) -> CompartmentState:
    """Advance ``state`` by one ``integ.dt`` with the configured scheme."""
    _check_dims(state, net)
    coup = _Coupling(net)
    y = np.stack((state.S, state.I, state.R))
    t = state.t + integ.dt
    y = _clamp(_advance(lambda v: _rhs(v, coup, params), y, integ.dt, integ.scheme), t)
    return CompartmentState(t, y[0], y[1], y[2])


def _integrate(f, y0, integ):
    steps = integ.n_steps
    out = np.empty((steps + 1,) + y0.shape)
    out[0] = y0
    y = y0
    for k in range(1, steps + 1):
        y = _clamp(_advance(f, y, integ.dt, integ.scheme), k * integ.dt)
        out[k] = y
    return np.arange(steps + 1) * integ.dt, out


def simulate(net: MobilityNetwork, params: EpidemicParams, initial: CompartmentState,
             integ: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """
    Integrate the coupled system from ``initial`` over ``integ.horizon`` days.

    The trajectory holds ``floor(horizon/dt) + 1`` samples starting at
    ``t = 0``. Raises :class:`StiffnessError` when a step drives any
    compartment below ``-CLAMP_TOL``.
    """
    _check_dims(initial, net)
    N = net.populations
    if np.any(np.abs(initial.totals - N) > 1e-9 * N):
        raise ConfigurationError("initial state does not satisfy S + I + R = N")
    if np.any(initial.S < 0) or np.any(initial.I < 0) or np.any(initial.R < 0):
        raise ConfigurationError("initial state has negative compartments")
    coup = _Coupling(net)
    y0 = np.stack((initial.S, initial.I, initial.R))
    t, ys = _integrate(lambda v: _rhs(v, coup, params), y0, integ)
    return Trajectory(t, ys[:, 0], ys[:, 1], ys[:, 2], populations=N, params=params,
                      network_fingerprint=net.fingerprint(), names=tuple(net.names))


def classical_sir(s0, i0, r0, beta, mu, integ: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """
    Single-population SIR model in fractions::

        ds/dt = -beta*s*i,  di/dt = beta*s*i - mu*i,  dr/dt = mu*i

    Implemented independently of :func:`derivatives` so it can serve as a
    reference for the uncoupled metapopulation system.

    ``s0``, ``i0`` and ``r0`` may be equal-length arrays, in which case each
    entry is integrated as its own isolated population (one column of the
    returned trajectory).
    """
    y0 = np.stack(np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float))
                                        for v in (s0, i0, r0))))
    if y0.ndim != 2:
        raise ShapeError("classical SIR initial fractions must be scalars or 1-D")
    if np.any(np.abs(y0.sum(axis=0) - 1.0) > 1e-12):
        raise ConfigurationError("classical SIR fractions must sum to 1")
    if y0.min() < -1e-12:
        raise ConfigurationError("classical SIR fractions must be nonnegative")

    def f(y):
        s, i = y[0], y[1]
        inf = beta * s * i
        return np.stack((-inf, inf - mu * i, mu * i))

    t, ys = _integrate(f, y0, integ)
    return Trajectory(t, ys[:, 0], ys[:, 1], ys[:, 2], populations=np.ones(y0.shape[1]),
                      params={"beta": beta, "mu": mu}, network_fingerprint="classical")


def seed_state(net: MobilityNetwork, seed_location: int, seed_fraction: float = 0.001) -> CompartmentState:
    """Fully susceptible network with ``seed_fraction`` of one location infected."""
    if not (isinstance(seed_location, (int, np.integer)) and 0 <= seed_location < net.n):
        raise IndexError(f"seed location {seed_location!r} out of range for {net.n} locations")
    if not 0.0 < seed_fraction < 1.0:
        raise ConfigurationError(f"seed_fraction={seed_fraction} outside (0, 1)")
    N = net.populations
    I = np.zeros(net.n)
    I[seed_location] = seed_fraction * N[seed_location]
    return CompartmentState(0.0, N - I, I, np.zeros(net.n))
