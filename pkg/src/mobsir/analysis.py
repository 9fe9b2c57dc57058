"""
Analytic results for the homogeneous network and summary metrics for
simulated scenarios.

The homogeneous reduction assumes every location has population ``N``,
the same infected count, ``k`` connected neighbours and total inbound
mobility ``n*N``. It gives an effective reproduction number

    R0 = (beta/mu) * (1 + (1 + alpha*k)*n) / (1 + n)

which feeds the final-size relation ``r = 1 - exp(-R0*r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .dynamics import (EpidemicParams, IntegratorConfig, Trajectory, seed_state,
                       simulate)
from .exceptions import ConfigurationError, DivergenceError, DomainError
from .network import (MobilityNetwork, QuarantineIntervention, SeedStrategy,
                      apply_quarantine, select_seed)

__all__ = [
    "HomogeneousParams",
    "SummaryMetrics",
    "SweepResult",
    "reproduction_number",
    "final_size",
    "homogeneous_susceptible",
    "homogeneous_time_of",
    "summarize",
    "compare",
    "sweep",
]


@dataclass(frozen=True)
class HomogeneousParams:
    beta: float
    mu: float
    alpha: float = 1.0
    k: int = 0
    n: float = 0.0

    def __post_init__(self):
        if self.k < 0 or int(self.k) != self.k:
            raise ConfigurationError(f"k={self.k} must be a nonnegative integer")
        if self.n < 0:
            raise ConfigurationError(f"n={self.n} must be nonnegative")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigurationError(f"alpha={self.alpha} outside [0, 1]")

    @property
    def mobility_factor(self) -> float:
        """``(1 + (1 + alpha*k)*n) / (1 + n)``, equal to 1 without coupling."""
        return (1.0 + (1.0 + self.alpha * self.k) * self.n) / (1.0 + self.n)


@dataclass(frozen=True)
class SummaryMetrics:
    """
    Aggregate outcome of one simulated scenario.

    ``peak_day`` has the resolution of the sampling step; ``attack_rate``
    is the final recovered share of the total population.
    ``reduction_vs_baseline`` is a percentage and is NaN until a baseline
    is attached.
    """

    peak_infected_fraction: float
    peak_day: float
    attack_rate: float
    reduction_vs_baseline: float = float("nan")


def reproduction_number(hp: HomogeneousParams) -> float:
    if hp.mu == 0:
        raise ZeroDivisionError("reproduction number undefined for mu = 0")
    return hp.beta / hp.mu * hp.mobility_factor


def final_size(r0: float, tol: float = 1e-9) -> float:
    """
    Final epidemic size ``r`` solving ``r = 1 - exp(-r0*r)``.

    Returns 0 for ``r0 <= 1``. Otherwise the unique positive root is
    bracketed on ``[tol, 1]`` and bisected until the bracket is narrower
    than ``tol``.

    Examples
    --------
    >>> round(final_size(2.0), 6)
    0.796812
    """
    if not math.isfinite(r0):
        raise DomainError(f"r0={r0!r} is not finite")
    if r0 < 0:
        raise DomainError(f"r0={r0} must be nonnegative")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if r0 <= 1.0:
        return 0.0

    def g(r):
        return r - 1.0 + math.exp(-r0 * r)

    lo, hi = tol, 1.0
    # for r0 barely above 1 the root may sit below tol
    if g(lo) >= 0.0:
        lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def homogeneous_susceptible(R, hp: HomogeneousParams, S0, N):
    """
    Susceptibles remaining once ``R`` individuals have recovered::

        S = S0 * exp(-R0 * R / N)

    ``R`` may be an array. The exponent is scaled by ``N`` so counts and
    fractions (``N = 1``) give consistent answers.
    """
    R = np.asarray(R, dtype=float)
    if np.any(R < 0) or np.any(R > N):
        raise DomainError("recovered count must lie in [0, N]")
    out = S0 * np.exp(-reproduction_number(hp) * R / N)
    return float(out) if out.ndim == 0 else out


def _steady_state_recovered(r0eff, S0, N):
    """Root of ``N - R - S0*exp(-r0eff*R/N)`` on ``(0, N]``: the final recovered count."""
    def f(R):
        return N - R - S0 * math.exp(-r0eff * R / N)

    lo, hi = 0.0, float(N)
    if f(hi) >= 0.0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * N:
            break
    return 0.5 * (lo + hi)


def homogeneous_time_of(R_target, hp: HomogeneousParams, S0, N, quad_steps=10_000):
    """
    Days until ``R_target`` individuals have recovered in the homogeneous model.

    Evaluates ``(1/mu) * integral_0^R_target dR / (N - R - S(R))`` with
    composite Simpson (``quad_steps`` subintervals, rounded up to even) in
    the variable ``u = log(1 + R/I0)``, ``I0 = N - S0``.

    Requires ``S0 < N`` (at least one initial infection), otherwise the
    integrand is singular at ``R = 0``. Raises :class:`DivergenceError` if
    ``R_target`` is within 0.1% of the steady-state recovered count, where
    the integrand blows up.
    """
    if hp.mu <= 0:
        raise ZeroDivisionError("time course undefined for mu = 0")
    if not S0 < N:
        raise DomainError("need S0 < N: no initial infections means no epidemic")
    if R_target < 0:
        raise DomainError("R_target must be nonnegative")
    if R_target == 0:
        return 0.0
    r0eff = reproduction_number(hp)
    R_inf = _steady_state_recovered(r0eff, S0, N)
    if R_target >= 0.999 * R_inf:
        raise DivergenceError(
            f"R_target={R_target:g} at or beyond steady state R_inf={R_inf:g}; dR/dt -> 0")

    m = int(quad_steps)
    if m < 2:
        raise ConfigurationError("quad_steps must be at least 2")
    m += m % 2
    # R = I0*(exp(u) - 1) spreads the initial layer of width ~I0 over many panels
    I0 = N - S0
    u = np.linspace(0.0, math.log1p(R_target / I0), m + 1)
    R = I0 * np.expm1(u)
    f = (I0 + R) / (N - R - S0 * np.exp(-r0eff * R / N))
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    h = u[-1] / m
    return float(h / 3.0 * np.dot(w, f) / hp.mu)


def summarize(traj: Trajectory) -> SummaryMetrics:
    if len(traj) == 0:
        raise ValueError("cannot summarize an empty trajectory")
    total = float(traj.populations.sum())
    infected = traj.I.sum(axis=1) / total
    k = int(np.argmax(infected))
    return SummaryMetrics(
        peak_infected_fraction=float(infected[k]),
        peak_day=float(traj.t[k]),
        attack_rate=float(traj.R[-1].sum() / total),
    )


def compare(baseline: SummaryMetrics, scenario: SummaryMetrics) -> float:
    """Percent reduction in attack rate relative to ``baseline``; negative if worse."""
    if not baseline.attack_rate > 0:
        raise DomainError("baseline attack rate must be positive")
    return 100.0 * (baseline.attack_rate - scenario.attack_rate) / baseline.attack_rate


@dataclass(frozen=True)
class SweepResult:
    """Metrics for every ``(alpha, percentile)`` pair, row-major over alpha."""

    alphas: tuple
    percentiles: tuple
    cells: tuple  # cells[a][p] -> SummaryMetrics

    def __iter__(self):
        for a, row in zip(self.alphas, self.cells):
            for p, m in zip(self.percentiles, row):
                yield a, p, m

    def __getitem__(self, idx) -> SummaryMetrics:
        a, p = idx
        return self.cells[a][p]

    def table(self, attr: str) -> np.ndarray:
        """2-D array of one metric, rows = alphas, columns = percentiles."""
        return np.array([[getattr(m, attr) for m in row] for row in self.cells])


def _run_cell(net, params, percentile, seed_id, seed_fraction, integ):
    qnet = apply_quarantine(net, QuarantineIntervention(percentile))
    return summarize(simulate(qnet, params, seed_state(qnet, seed_id, seed_fraction), integ))


def sweep(net: MobilityNetwork, base_params: EpidemicParams, alphas: Sequence[float],
          percentiles: Sequence[float], seed_strategy: SeedStrategy,
          integ: IntegratorConfig = IntegratorConfig(), seed_fraction: float = 0.001) -> SweepResult:
    """
    Simulate every combination of social connectivity and quarantine level.

    The seed location is chosen once on the unmodified network, so every
    cell shares the same pandemic origin. ``reduction_vs_baseline`` in each
    cell compares against the zero-quarantine run at the same alpha; that
    run is added internally if 0 is not among ``percentiles``.
    """
    alphas = tuple(float(a) for a in alphas)
    percentiles = tuple(float(p) for p in percentiles)
    if not alphas or not percentiles:
        raise ConfigurationError("sweep needs at least one alpha and one percentile")
    seed_id = select_seed(net, seed_strategy)

    rows = []
    for a in alphas:
        params = replace(base_params, alpha=a)
        row = [_run_cell(net, params, p, seed_id, seed_fraction, integ) for p in percentiles]
        if 0.0 in percentiles:
            base = row[percentiles.index(0.0)]
        else:
            base = _run_cell(net, params, 0.0, seed_id, seed_fraction, integ)
        red = [compare(base, m) if base.attack_rate > 0 else float("nan") for m in row]
        rows.append(tuple(replace(m, reduction_vs_baseline=r) for m, r in zip(row, red)))
    return SweepResult(alphas, percentiles, tuple(rows))
