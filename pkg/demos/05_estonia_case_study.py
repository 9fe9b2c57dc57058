"""
County-level forecast from reported cases
=========================================

Start from the cumulative cases reported on 11 March 2020 and forecast 30
days ahead for several restriction levels. Each alpha is paired with
quarantining the top (1 - alpha) * 100 percent of counties.

The OD matrix is illustrative, so only the ordering of the curves is
meaningful, not their magnitude.
"""
from dataclasses import replace

from mobsir import (IntegratorConfig, QuarantineIntervention, apply_quarantine, io,
                    quarantined_locations, simulate)

net = io.load_network(io.fixture_path("estonia_od.csv"), io.fixture_path("estonia_population.csv"))
initial = io.load_initial_cases(io.fixture_path("estonia_cases_2020-03-11.csv"), "2020-03-11", net)
print({n: int(v) for n, v in zip(net.names, initial.I) if v})

base = io.params_from_r0(2.5, mu=0.1)
integ = IntegratorConfig("rk4", 0.1, 30)

for a in (1.0, 0.95, 0.9, 0.8, 0.7):
    q = QuarantineIntervention(round((1 - a) * 100, 10))
    traj = simulate(apply_quarantine(net, q), replace(base, alpha=a), initial, integ)
    cases = traj.cumulative_cases()
    closed = [net.names[k] for k in quarantined_locations(net, q)]
    print(f"alpha={a:4.2f}  day 10: {cases[100]:7.0f}  day 30: {cases[-1]:7.0f}  closed: {closed}")

###############################################################################
# The same run from the shell, writing plot-ready CSV:
#
#     mobsir case-study --out case_out
