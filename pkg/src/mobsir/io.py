"""
File formats: networks, case counts, scenario configs and simulation output.

All tables are plain CSV with a header row. Simulation outputs are written
with 12 significant digits; network files use the shortest repr that
round-trips a float exactly, so ``load_network(write_network(net))`` is an
identity.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .analysis import SummaryMetrics, SweepResult
from .dynamics import (CompartmentState, EpidemicParams, IntegratorConfig, RecoveryMode,
                       Trajectory, seed_state)
from .exceptions import ConfigurationError, InputError
from .network import (Location, MobilityNetwork, QuarantineIntervention, SeedStrategy,
                      generate_random_network, select_seed)

__all__ = [
    "load_network",
    "write_network",
    "load_initial_cases",
    "load_case_series",
    "params_from_r0",
    "calls_to_flows",
    "write_trajectory",
    "write_aggregate",
    "read_trajectory",
    "write_sweep",
    "read_sweep",
    "write_peak_days",
    "write_json",
    "ScenarioConfig",
    "SyntheticSource",
    "FileSource",
    "load_scenario",
    "scenario_from_dict",
    "fixture_path",
]

SIG = 12
TRAJECTORY_HEADER = ["t", "location_id", "S", "I", "R"]
AGGREGATE_HEADER = ["t", "S_total", "I_total", "R_total", "s_frac", "i_frac", "r_frac"]
SWEEP_HEADER = ["alpha", "percentile", "peak_fraction", "peak_day", "attack_rate", "reduction_pct"]


def fmt(x) -> str:
    return format(float(x), f".{SIG}g")


def fixture_path(name: str) -> Path:
    """Path of a bundled data file, e.g. ``fixture_path("estonia_population.csv")``."""
    return Path(str(resources.files("mobsir") / "data" / name))


@contextmanager
def atomic_open(path):
    """Write to a sibling temp file and rename over ``path`` on success."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _rows(path, header):
    """Yield ``(line_number, row_dict)`` after checking the header."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise InputError("file is empty, expected a header row", path, 1) from None
        if [h.strip() for h in first] != header:
            raise InputError(f"header {first} does not match {header}", path, 1)
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise InputError(f"expected {len(header)} fields, got {len(row)}", path, reader.line_num)
            yield reader.line_num, dict(zip(header, (c.strip() for c in row)))


def _number(text, path, line, what):
    try:
        v = float(text)
    except ValueError:
        raise InputError(f"{what} {text!r} is not a number", path, line) from None
    if not math.isfinite(v):
        raise InputError(f"{what} {text!r} is not finite", path, line)
    return v


# ---------------------------------------------------------------- networks

def _load_population(pop_path):
    by_id = {}
    names = {}
    for line, row in _rows(pop_path, ["id", "name", "population"]):
        try:
            i = int(row["id"])
        except ValueError:
            raise InputError(f"id {row['id']!r} is not an integer", pop_path, line) from None
        if i in by_id:
            raise InputError(f"duplicate id {i}", pop_path, line)
        if row["name"] in names:
            raise InputError(f"duplicate name {row['name']!r}", pop_path, line)
        pop = _number(row["population"], pop_path, line, "population")
        if pop <= 0:
            raise InputError(f"population {pop} must be positive", pop_path, line)
        by_id[i] = (row["name"], pop)
        names[row["name"]] = i
    if sorted(by_id) != list(range(len(by_id))):
        raise InputError("ids must be contiguous from 0", pop_path)
    return tuple(Location(i, *by_id[i]) for i in range(len(by_id)))


def load_network(od_path, pop_path) -> MobilityNetwork:
    """
    Read ``population.csv`` (``id,name,population``) and ``od.csv``
    (``from,to,flow``).

    OD rows name locations; a row ``A,B,50`` means 50 people per day travel
    from A to B and is stored at ``flows[id(B), id(A)]``. Pairs absent from
    the file have zero flow.
    """
    locs = _load_population(pop_path)
    ids = {loc.name: loc.id for loc in locs}
    flows = np.zeros((len(locs), len(locs)))
    seen = {}
    for line, row in _rows(od_path, ["from", "to", "flow"]):
        for key in ("from", "to"):
            if row[key] not in ids:
                raise InputError(f"unknown location {row[key]!r}", od_path, line)
        j, i = ids[row["from"]], ids[row["to"]]
        if i == j:
            raise InputError(f"self-mobility row for {row['from']!r}", od_path, line)
        if (i, j) in seen:
            raise InputError(
                f"duplicate pair {row['from']!r} -> {row['to']!r} (first on line {seen[(i, j)]})",
                od_path, line)
        flow = _number(row["flow"], od_path, line, "flow")
        if flow < 0:
            raise InputError(f"negative flow {flow}", od_path, line)
        seen[(i, j)] = line
        flows[i, j] = flow
    return MobilityNetwork(locs, flows)


def write_network(net: MobilityNetwork, od_path, pop_path):
    with atomic_open(pop_path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "name", "population"])
        for loc in net.locations:
            w.writerow([loc.id, loc.name, repr(float(loc.population))])
    with atomic_open(od_path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["from", "to", "flow"])
        names = net.names
        for j in range(net.n):
            for i in range(net.n):
                if net.flows[i, j] != 0:
                    w.writerow([names[j], names[i], repr(float(net.flows[i, j]))])


def calls_to_flows(calls, populations, commuter_share=0.1):
    """
    Convert a call-count matrix into daily mobility.

    ``calls[i, j]`` counts calls from residents of ``j`` to ``i``. Each
    origin's outgoing calls are normalised to shares and scaled by the
    travelling part of its population::

        flow[i, j] = calls[i, j] / sum_i' calls[i', j] * commuter_share * N_j

    This is an illustrative conversion, not a calibrated mobility model.
    """
    calls = np.array(calls, dtype=float)
    N = np.asarray(populations, dtype=float)
    if calls.shape != (N.size, N.size):
        raise ConfigurationError("calls matrix must be square and match populations")
    if np.any(calls < 0):
        raise ConfigurationError("call counts must be nonnegative")
    if not 0 <= commuter_share <= 1:
        raise ConfigurationError("commuter_share must lie in [0, 1]")
    np.fill_diagonal(calls, 0.0)
    out = calls.sum(axis=0)
    share = np.divide(calls, out[np.newaxis, :], out=np.zeros_like(calls), where=out > 0)
    return share * (commuter_share * N)[np.newaxis, :]


# ---------------------------------------------------------------- cases

def _parse_date(text, path=None, line=None):
    if isinstance(text, _dt.date):
        return text
    try:
        return _dt.date.fromisoformat(str(text).strip())
    except ValueError:
        raise InputError(f"date {text!r} is not ISO-8601 (YYYY-MM-DD)", path, line) from None


def _case_records(cases_path):
    """Rows of ``cases.csv`` as ``(line, date, location, cumulative)`` with monotonicity checked."""
    records = []
    last = {}
    for line, row in _rows(cases_path, ["date", "location", "cumulative_cases"]):
        date = _parse_date(row["date"], cases_path, line)
        try:
            count = int(row["cumulative_cases"])
        except ValueError:
            raise InputError(
                f"cumulative_cases {row['cumulative_cases']!r} is not an integer", cases_path, line) from None
        if count < 0:
            raise InputError(f"negative case count {count}", cases_path, line)
        loc = row["location"]
        records.append((line, date, loc, count))
    for line, date, loc, count in sorted(records, key=lambda r: (r[2], r[1], r[0])):
        if loc in last:
            pdate, pcount = last[loc]
            if date == pdate:
                raise InputError(f"duplicate record for {loc!r} on {date}", cases_path, line)
            if count < pcount:
                raise InputError(
                    f"cumulative cases for {loc!r} decrease from {pcount} to {count}", cases_path, line)
        last[loc] = (date, count)
    return records


def load_initial_cases(cases_path, cutoff_date, net: MobilityNetwork) -> CompartmentState:
    """
    Initial state from reported cumulative cases at ``cutoff_date``.

    Each named location starts with ``I`` equal to its latest cumulative
    count on or before the cutoff; unnamed locations start at zero. ``R``
    is zero everywhere and ``S = N - I``.
    """
    cutoff = _parse_date(cutoff_date)
    records = _case_records(cases_path)
    if records and cutoff < min(r[1] for r in records):
        raise InputError(f"cutoff {cutoff} precedes the first record in the file", cases_path)
    ids = {nm: k for k, nm in enumerate(net.names)}
    latest = {}
    for line, date, loc, count in records:
        if loc not in ids:
            raise InputError(f"unknown location {loc!r}", cases_path, line)
        if date <= cutoff and (loc not in latest or date > latest[loc][0]):
            latest[loc] = (date, count, line)
    N = net.populations
    I = np.zeros(net.n)
    for loc, (_, count, line) in latest.items():
        if count > N[ids[loc]]:
            raise InputError(f"{count} cases exceed population of {loc!r}", cases_path, line)
        I[ids[loc]] = count
    return CompartmentState(0.0, N - I, I, np.zeros(net.n))


def load_case_series(cases_path):
    """
    National cumulative totals per reporting date.

    Returns a list of ``(date, total)``; locations missing on a date carry
    their last reported count forward.
    """
    records = _case_records(cases_path)
    dates = sorted({r[1] for r in records})
    current = {}
    by_date = {}
    for _, date, loc, count in records:
        by_date.setdefault(date, {})[loc] = count
    out = []
    for d in dates:
        current.update(by_date[d])
        out.append((d, sum(current.values())))
    return out


def params_from_r0(r0_target, mu, alpha=1.0, recovery_mode=RecoveryMode.COUNT) -> EpidemicParams:
    """Local transmission rate chosen so that ``beta/mu == r0_target``."""
    if not mu > 0:
        raise ConfigurationError(f"mu={mu} must be positive")
    beta = r0_target * mu
    if not 0 <= beta <= 1:
        raise ConfigurationError(f"r0={r0_target} with mu={mu} needs beta={beta:g}, outside [0, 1]")
    return EpidemicParams(beta=beta, mu=mu, alpha=alpha, recovery_mode=recovery_mode)


# ---------------------------------------------------------------- outputs

def write_trajectory(traj: Trajectory, path, aggregate_path=None):
    """Long-format ``t,location_id,S,I,R``; optionally also the aggregate table."""
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for k in range(len(traj)):
            t = fmt(traj.t[k])
            for i in range(traj.n_locations):
                w.writerow([t, i, fmt(traj.S[k, i]), fmt(traj.I[k, i]), fmt(traj.R[k, i])])
    if aggregate_path is not None:
        write_aggregate(traj, aggregate_path)


def write_aggregate(traj: Trajectory, path):
    """One row per sample: totals and whole-population fractions (clipped to [0, 1])."""
    S, I, R = traj.totals()
    total = float(traj.populations.sum())
    fr = np.clip(np.stack((S, I, R)) / total, 0.0, 1.0)
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGGREGATE_HEADER)
        for k in range(len(traj)):
            w.writerow([fmt(traj.t[k]), fmt(S[k]), fmt(I[k]), fmt(R[k]),
                        fmt(fr[0, k]), fmt(fr[1, k]), fmt(fr[2, k])])


def read_trajectory(path) -> Trajectory:
    """Inverse of :func:`write_trajectory`; populations are taken from the first sample."""
    times, rows = [], {}
    for line, row in _rows(path, TRAJECTORY_HEADER):
        t = _number(row["t"], path, line, "t")
        if not times or times[-1] != t:
            times.append(t)
        rows.setdefault(t, []).append(
            (int(row["location_id"]), _number(row["S"], path, line, "S"),
             _number(row["I"], path, line, "I"), _number(row["R"], path, line, "R")))
    if not times:
        raise InputError("trajectory file has no rows", path)
    n = len(rows[times[0]])
    arr = np.zeros((len(times), 3, n))
    for k, t in enumerate(times):
        block = sorted(rows[t])
        if [b[0] for b in block] != list(range(n)):
            raise InputError(f"incomplete location block at t={t}", path)
        arr[k] = np.array([b[1:] for b in block]).T
    S, I, R = arr[:, 0], arr[:, 1], arr[:, 2]
    return Trajectory(np.array(times), S, I, R, populations=S[0] + I[0] + R[0])


def write_sweep(result: SweepResult, path):
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for a, p, m in result:
            w.writerow([fmt(a), fmt(p), fmt(m.peak_infected_fraction), fmt(m.peak_day),
                        fmt(m.attack_rate), fmt(m.reduction_vs_baseline)])


def read_sweep(path) -> SweepResult:
    cells = {}
    alphas, percentiles = [], []
    for line, row in _rows(path, SWEEP_HEADER):
        a = _number(row["alpha"], path, line, "alpha")
        p = _number(row["percentile"], path, line, "percentile")
        red = float(row["reduction_pct"])
        m = SummaryMetrics(_number(row["peak_fraction"], path, line, "peak_fraction"),
                           _number(row["peak_day"], path, line, "peak_day"),
                           _number(row["attack_rate"], path, line, "attack_rate"), red)
        if a not in alphas:
            alphas.append(a)
        if p not in percentiles:
            percentiles.append(p)
        cells[(a, p)] = m
    grid = tuple(tuple(cells[(a, p)] for p in percentiles) for a in alphas)
    return SweepResult(tuple(alphas), tuple(percentiles), grid)


def write_peak_days(result: SweepResult, path):
    """Days to the aggregate infection peak, rows = alpha, columns = quarantine percentile."""
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha"] + [fmt(p) for p in result.percentiles])
        for a, row in zip(result.alphas, result.cells):
            w.writerow([fmt(a)] + [fmt(m.peak_day) for m in row])


def write_json(obj, path):
    with atomic_open(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


# ---------------------------------------------------------------- scenario config

@dataclass(frozen=True)
class SyntheticSource:
    n: int
    population_range: tuple = (1e4, 1e6)
    flow_fraction: float = 0.01
    rng_seed: int = 0


@dataclass(frozen=True)
class FileSource:
    od: str
    population: str


@dataclass(frozen=True)
class ScenarioConfig:
    """
    One fully specified experiment.

    ``seed`` is either a :class:`SeedStrategy` (combined with
    ``seed_fraction``) or a mapping of location name to initial infected
    count.
    """

    network_source: object
    params: EpidemicParams
    seed: object = field(default_factory=SeedStrategy)
    seed_fraction: float = 0.001
    quarantine: QuarantineIntervention = field(default_factory=QuarantineIntervention)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    outputs: tuple = ("trajectory.csv", "aggregate.csv", "metrics.json")
    classical_reference: bool = False

    def build_network(self) -> MobilityNetwork:
        src = self.network_source
        if isinstance(src, SyntheticSource):
            return generate_random_network(src.n, src.population_range, src.flow_fraction, src.rng_seed)
        return load_network(src.od, src.population)

    def initial_state(self, net: MobilityNetwork) -> CompartmentState:
        if isinstance(self.seed, SeedStrategy):
            return seed_state(net, select_seed(net, self.seed), self.seed_fraction)
        N = net.populations
        I = np.zeros(net.n)
        for name, count in self.seed.items():
            try:
                k = net.index_of(name)
            except KeyError:
                raise ConfigurationError(f"initial counts name unknown location {name!r}") from None
            if not 0 <= count <= N[k]:
                raise ConfigurationError(f"initial count {count} for {name!r} outside [0, {N[k]:g}]")
            I[k] = count
        return CompartmentState(0.0, N - I, I, np.zeros(net.n))


OUTPUT_NAMES = ("trajectory.csv", "aggregate.csv", "metrics.json")


def _take(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigurationError(f"{where} must be a JSON object")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigurationError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")
    return d


def scenario_from_dict(d: dict) -> ScenarioConfig:
    """Validate a decoded ``scenario.json`` document; unknown keys are errors."""
    _take(d, {"network", "params", "seed", "quarantine", "integrator", "outputs",
              "classical_reference"}, "scenario")
    for req in ("network", "params"):
        if req not in d:
            raise ConfigurationError(f"scenario is missing required key {req!r}")

    net = _take(d["network"], {"synthetic", "od", "population"}, "network")
    if ("synthetic" in net) == ("od" in net or "population" in net):
        raise ConfigurationError("network needs exactly one source: 'synthetic' or 'od'+'population'")
    if "synthetic" in net:
        syn = _take(net["synthetic"], {"n", "population_range", "flow_fraction", "rng_seed"},
                    "network.synthetic")
        if "n" not in syn:
            raise ConfigurationError("network.synthetic needs 'n'")
        source = SyntheticSource(int(syn["n"]), tuple(syn.get("population_range", (1e4, 1e6))),
                                 float(syn.get("flow_fraction", 0.01)), int(syn.get("rng_seed", 0)))
    else:
        if not ("od" in net and "population" in net):
            raise ConfigurationError("file network source needs both 'od' and 'population'")
        source = FileSource(str(net["od"]), str(net["population"]))

    p = _take(d["params"], {"beta", "mu", "alpha", "recovery_mode"}, "params")
    try:
        params = EpidemicParams(float(p["beta"]), float(p["mu"]), float(p.get("alpha", 1.0)),
                                p.get("recovery_mode", "count"))
    except KeyError as e:
        raise ConfigurationError(f"params is missing {e.args[0]!r}") from None

    s = _take(d.get("seed", {}), {"strategy", "rng_seed", "fraction", "initial_infected"}, "seed")
    if "initial_infected" in s:
        if set(s) - {"initial_infected"}:
            raise ConfigurationError("seed.initial_infected cannot be combined with a strategy")
        if not isinstance(s["initial_infected"], dict):
            raise ConfigurationError("seed.initial_infected must map location names to counts")
        seed = {str(k): float(v) for k, v in s["initial_infected"].items()}
        fraction = 0.001
    else:
        seed = SeedStrategy(s.get("strategy", "random"), int(s.get("rng_seed", 0)))
        fraction = float(s.get("fraction", 0.001))

    q = _take(d.get("quarantine", {}), {"percentile"}, "quarantine")
    quarantine = QuarantineIntervention(float(q.get("percentile", 0.0)))

    g = _take(d.get("integrator", {}), {"scheme", "dt", "horizon"}, "integrator")
    integ = IntegratorConfig(g.get("scheme", "rk4"), float(g.get("dt", 0.1)), float(g.get("horizon", 300.0)))

    outputs = tuple(d.get("outputs", OUTPUT_NAMES))
    bad = [o for o in outputs if o not in OUTPUT_NAMES]
    if bad:
        raise ConfigurationError(f"unknown output(s) {bad}; choose from {list(OUTPUT_NAMES)}")

    return ScenarioConfig(source, params, seed, fraction, quarantine, integ, outputs,
                          bool(d.get("classical_reference", False)))


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON: {e.msg}", path, e.lineno) from None
    return scenario_from_dict(doc)
