"""
Social connectivity and the epidemic peak
=========================================

Seed one location of a 16-location random network and lower alpha, the
weight on infections imported through mobility. Less coupling flattens
the aggregate peak and pushes it later.
"""
import numpy as np

from mobsir import EpidemicParams, SeedStrategy, generate_random_network, sweep

net = generate_random_network(16, (1e4, 1e6), 0.01, rng_seed=42)
alphas = [1.0, 0.8, 0.6, 0.4, 0.2, 0.1]

res = sweep(net, EpidemicParams(beta=0.5, mu=0.2), alphas, [0], SeedStrategy("random", 0))

print(f"{'alpha':>6} {'peak I/N':>9} {'peak day':>9} {'attack':>7}")
for a, _, m in res:
    print(f"{a:6.1f} {m.peak_infected_fraction:9.4f} {m.peak_day:9.1f} {m.attack_rate:7.4f}")

###############################################################################
# The peak falls monotonically while the attack rate barely moves: within
# 300 days nearly every location is eventually reached, only later.

peaks = res.table("peak_infected_fraction")[:, 0]
assert np.all(np.diff(peaks) < 0)
