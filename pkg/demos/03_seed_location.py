"""
Where the outbreak starts
=========================

Compare seeding the weakest and the strongest connected location. A
poorly connected origin exports few infections, so the aggregate curve
takes longer to build.
"""
import numpy as np

from mobsir import (EpidemicParams, SeedStrategy, generate_random_network, out_strength,
                    seed_state, select_seed, simulate, summarize)

net = generate_random_network(100, (1e4, 1e6), 0.01, rng_seed=42)
params = EpidemicParams(0.5, 0.2, alpha=0.5)

for variant in ("weakest", "strongest"):
    k = select_seed(net, SeedStrategy(variant))
    traj = simulate(net, params, seed_state(net, k))
    m = summarize(traj)
    # day by which 1% of the whole population has been infected
    cum = traj.cumulative_cases() / net.populations.sum()
    onset = traj.t[np.argmax(cum >= 0.01)]
    print(f"{variant:>9}: location {k} (strength {out_strength(net, k):9.0f}) "
          f"peak day {m.peak_day:5.1f}, 1% reached on day {onset:5.1f}")
