"""
From call records to an OD matrix
=================================

Real mobility often comes from phone records. Without such data we use a
gravity-like call count ``calls[i, j] ~ N_i * N_j`` and turn it into daily
flows where 10% of each county's residents travel. This is exactly how
the bundled illustrative Estonia OD file was produced.
"""
import numpy as np

from mobsir import io

net = io.load_network(io.fixture_path("estonia_od.csv"), io.fixture_path("estonia_population.csv"))
N = net.populations

calls = np.outer(N, N) / 1e6
flows = np.round(io.calls_to_flows(calls, N, commuter_share=0.1))

print("matches bundled fixture:", np.array_equal(flows, net.flows))

top = np.argsort(-flows.sum(axis=0))[:3]
for j in top:
    print(f"{net.names[j]:>14} sends {flows[:, j].sum():8.0f} travellers/day")
