"""
Worst-case bounds and sample-size planning
==========================================

The theoretical guarantees behind the estimator are worst-case and
astronomically conservative at desk scale.  Evaluate them in log space,
derive the trajectory-count / length / resolution plan they imply, and
check the field tail bounds empirically.
"""

import math

import numpy as np

import errwlab as el
from errwlab.rng import stream

# Worst-case quantities for a triangle-sized problem with weights known
# to lie in [1, 1] and failure budget 0.1.  All entries are natural
# logs except the q range.
bounds = el.theoretical_bounds(n=3, diam=1, a_lo=1.0, a_hi=1.0, delta=0.1)
print("worst-case bounds (n=3, diam=1, a in [1,1], delta=0.1):")
for key, val in bounds.items():
    print(f"  {key}: {val}")
print(f"  -> cover-time bound is e^{bounds['tcov_bound']:.1f}, about "
      f"10^{bounds['tcov_bound'] / math.log(10):.0f} steps")

# The full sampling plan for a target accuracy eps: moment resolution m,
# trajectory length T, and trajectory count K, all in logs.
plan = el.sample_size_plan(n=3, diam=1, a_lo=1.0, a_hi=1.0, eps=0.1,
                           delta=0.01)
print("sampling plan at eps = 0.1, delta = 0.01:")
for key, val in plan.items():
    print(f"  {key}: {val}")
print(f"  -> K is about 10^{plan['log_K'] / math.log(10):.1f} trajectories "
      f"of length about 10^{plan['log_T'] / math.log(10):.0f}")

# Empirical cover times sit far below the bound: walk a few hundred
# sampled environments and record the worst.
tri = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
beta, phi = el.sample_environments(tri, np.ones(3), 0, 300, master_seed=41,
                                   method="mcmc", threads=4)
worst = 0
for i in range(300):
    env = el.environment_from_fields(tri, beta[i], phi[i], 0)
    p = el.transition_matrix(tri, env)
    cum = np.cumsum(p, axis=1)
    rng = stream(42, i)
    v, seen, t = 0, {0}, 0
    while len(seen) < 3:
        v = int(np.searchsorted(cum[v], rng.random(), side="right"))
        seen.add(v)
        t += 1
    worst = max(worst, t)
print(f"worst observed cover time over 300 environments: {worst} steps")

# Field tail diagnostics: sampled potential fields must not exceed the
# closed-form tail bounds beyond binomial noise.
tree = el.path_graph(8)
beta, phi = el.sample_environments(tree, np.ones(7), 0, 20_000,
                                   master_seed=43, method="tree")
report = el.tail_diagnostics(tree, np.ones(7), phi, delta=0.1, beta=beta)
print(f"tail diagnostics on an 8-path: flagged = {report['flagged']}")
print(f"  sup|phi| bound {report['sup_phi']['bound']:.3f}, "
      f"frequency {report['sup_phi']['frequency']:.4f}")
row = report["gradient_tail"][1]
print(f"  edge {row['edge']} tail at s = {row['s']}: bound {row['bound']:.4f}, "
      f"frequency {row['frequency']:.4f}")
