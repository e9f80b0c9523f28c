"""
Closed-form moments of the environment
======================================

The round-trip transition product U_e = P_ij P_ji of a sampled
environment has closed-form moments in terms of the initial weights.
Compare them with Monte Carlo, evaluate the mixing normalizer by
quadrature, and look at the curvature of the KL divergence between
environments of nearby weights.
"""

import math

import numpy as np

import errwlab as el
from errwlab.moments import (
    MomentOracle,
    expected_sqrt_u,
    expected_u,
    expected_u_sq,
    expected_uu,
)

tri = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
a = np.ones(3)
oracle = MomentOracle(tri, a, v0=0)

far = tri.edge_id(1, 2)
print("triangle, unit weights, started at 0:")
print(f"  E[U] opposite edge   = {expected_u(oracle, far):.6f}  (2/9)")
print(f"  E[U] start edges     = {expected_u(oracle, 0):.6f}  (1/3)")
print(f"  E[sqrt U] opposite   = {expected_sqrt_u(oracle, far):.6f}  (pi/8)")
print(f"  E[U^2] opposite      = {expected_u_sq(oracle, far):.6f}  (8/75)")
print(f"  E[U U'] adjacent     = {expected_uu(oracle, 0, far):.6f}  (2/45)")

beta, phi = el.sample_environments(tri, a, 0, 50_000, master_seed=21,
                                   method="mcmc", threads=4)
u = el.edge_transition_products(tri, beta, phi)
print("Monte Carlo at 5e4 draws:")
print(f"  mean U opposite      = {u[:, far].mean():.6f}")
print(f"  mean sqrt U opposite = {np.sqrt(u[:, far]).mean():.6f}")

# The normalizing constant of the mixing density has a closed form; a
# direct quadrature of the normalized density over the free edge
# weights returns 1.
lz = el.log_normalizer_closed(el.path_graph(3), np.ones(2), 1)
print(f"two-edge path normalizer: exp({lz:.6f}) = {math.exp(lz):.6f} (pi)")
total = el.mixing_normalization_quadrature(tri, a, 0, e0=(0, 1))
print(f"triangle quadrature of normalized density: {total:.8f}")

# KL between the environments of weights a and a+eps on one edge decays
# quadratically; the curvature is a trigamma expression, about 0.5888
# for this vertex pair.
coeff = (2 * el.trigamma(1.0) - el.trigamma(1.5)) / 4.0
for eps in (0.1, 0.01, 0.001):
    tilde = a.copy()
    tilde[far] += eps
    kl = el.kl_mixing(tri, 0, a, tilde)
    print(f"  eps = {eps:6}: KL/eps^2 = {kl / eps**2:.6f} "
          f"(limit {coeff:.6f})")
