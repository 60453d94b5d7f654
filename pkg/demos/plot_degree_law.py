"""
Power-law degrees and the configuration model
=============================================

Sample a degree sequence with ``P(D = k) ~ k**-tau`` for ``k >= 3``, pair
its half-edges uniformly, and look at what the simple projection loses.
"""

import numpy as np

from metastable_epi import check_degree_event, degree_pmf, generate_graph, mean_degree, normalizer

tau, n = 3.0, 100_000
deg, multigraph, g = generate_graph(n, tau, seed=1)

# empirical frequencies against the exact law
ks = np.arange(3, 11)
freq = np.array([(deg.degrees == k).mean() for k in ks])
for k, f, p in zip(ks, freq, degree_pmf(ks, tau)):
    print(f"k={k:2d}  empirical {f:.4f}  exact {p:.4f}")

# 27 * P(D = 3) recovers the normalising constant
print(f"C_tau = {normalizer(tau):.6f}, estimate {27 * freq[0]:.4f}")
print(f"mean degree {deg.degrees.mean():.3f} vs {mean_degree(tau):.4f}")

# loops and repeated pairs are dropped by the projection
print(f"{multigraph.m} half-edge pairs -> {g.m} simple edges")

# order statistics inside the envelope c1 n**(1/(tau-1)) i**(-1/(tau-1)) .. c2 ...
rep = check_degree_event(deg, epsilon=0.1)
print(f"degree event holds: {rep.holds} (largest degree {deg.degrees.max()})")
