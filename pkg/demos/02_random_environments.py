"""
The random conductance environment behind a reinforced walk
===========================================================

A reinforced walk is a mixture of ordinary reversible walks in a random
environment of edge conductances.  Sample that environment exactly on a
tree, by MCMC on a cycle, and verify that averaging the quenched walk
law over environments reproduces the reinforced law.
"""

import math

import numpy as np

import errwlab as el

# On trees the potential field has independent per-edge increments and
# is sampled exactly.
path = el.path_graph(4)
beta, phi = el.sample_environments(path, np.ones(3), v0=0, k=50_000,
                                   master_seed=11, method="tree")
print("tree field: phi anchored at", phi[:, 0].max(), "with per-vertex sd",
      np.round(phi.std(axis=0), 3))

# The per-edge potential increment has an explicit density; its a=1 mean
# is -ln 2.
y = phi[:, 1] - phi[:, 0]
print(f"mean increment {y.mean():.4f} vs -ln2 = {-math.log(2):.4f}")

# Off trees, one Metropolis chain per draw targets the same field law.
tri = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
beta, phi = el.sample_environments(tri, np.ones(3), v0=0, k=20_000,
                                   master_seed=12, method="mcmc", threads=4)

# Mixture check: the environment-averaged probability of a fixed short
# trajectory equals its reinforced-walk probability.
target = el.Trajectory(0, [0, 1, 2, 0])
exact = math.exp(el.log_likelihood(tri, np.ones(3), 0, [target]))

ii, jj = tri.edge_endpoints()
q = beta * np.exp(phi[:, ii] + phi[:, jj])
strength = np.zeros((q.shape[0], 3))
np.add.at(strength, (slice(None), ii), q)
np.add.at(strength, (slice(None), jj), q)
quenched = (q[:, 0] / strength[:, 0]) * (q[:, 1] / strength[:, 1]) \
    * (q[:, 2] / strength[:, 2])
se = quenched.std(ddof=1) / math.sqrt(quenched.shape[0])
print(f"P(0->1->2->0): exact {exact:.6f}, "
      f"environment average {quenched.mean():.6f} (s.e. {se:.6f})")

# Each sampled environment is an ordinary random walk; its transition
# matrix is row-stochastic.
env = el.environment_from_fields(tri, beta[0], phi[0], v0=0)
P = el.transition_matrix(tri, env)
print("first environment's transition matrix rows sum to",
      P.sum(axis=1).round(12))

# The same environment also arises as the long-run limit of crossing
# frequencies of a single reinforced walk.
from errwlab.rng import stream

P_long = el.sample_environment_longrun(tri, np.ones(3), 0, 200_000,
                                       stream(13))
print("long-run crossing-frequency matrix row 0:", P_long[0].round(4))
