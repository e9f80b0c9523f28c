"""Brute-force oracles and random instances shared across the test suite.

Everything here is written independently of the library internals:
spanning trees by subset enumeration, connectivity by union-find,
likelihoods by path enumeration.  Slow on purpose.
"""

import itertools

import numpy as np

import errwlab as el


def _spans(n, edge_list):
    """True if edge_list connects vertices 0..n-1 (union-find)."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for i, j in edge_list:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            comps -= 1
    return comps == 1


def spanning_tree_sum_brute(g, weights):
    """Sum over all spanning trees of the product of edge weights."""
    weights = np.asarray(weights, dtype=float)
    total = 0.0
    for subset in itertools.combinations(range(g.m), g.n - 1):
        if _spans(g.n, [g.edges[e] for e in subset]):
            total += float(np.prod(weights[list(subset)]))
    return total


def connected_graphs(n):
    """All labeled connected simple graphs on vertices 0..n-1."""
    pool = list(itertools.combinations(range(n), 2))
    out = []
    for r in range(n - 1, len(pool) + 1):
        for subset in itertools.combinations(pool, r):
            if _spans(n, subset):
                out.append(el.Graph(n=n, edges=subset))
    return out


def random_connected_graph(rng, n_lo=3, n_hi=6, extra_prob=0.5):
    """Random connected graph: a random tree plus a few extra edges."""
    n = int(rng.integers(n_lo, n_hi + 1))
    edges = set()
    for v in range(1, n):
        edges.add((int(rng.integers(v)), v))
    pool = [(i, j) for i in range(n) for j in range(i + 1, n)
            if (i, j) not in edges]
    for e in pool:
        if rng.random() < extra_prob:
            edges.add(e)
    return el.Graph(n=n, edges=sorted(edges))


def random_tree(rng, n):
    edges = [(int(rng.integers(v)), v) for v in range(1, n)]
    return el.Graph(n=n, edges=edges)


def pick_hub(g, rng):
    """A uniformly random vertex of degree >= 2."""
    hubs = np.flatnonzero(g.degrees >= 2)
    return int(rng.choice(hubs))


def brute_log_likelihood(g, a, traj):
    """Log-likelihood by stepping the reinforcement forward one move at a time."""
    a = np.asarray(a, dtype=float)
    ltimes = a.copy()
    ll = 0.0
    v = traj.v0
    for w in traj.steps[1:]:
        inc = g.incident_edges(v)
        eid = next(e for n2, e in g.neighbors(v) if n2 == w)
        ll += np.log(ltimes[eid]) - np.log(ltimes[inc].sum())
        ltimes[eid] += 1.0
        v = w
    return ll


def empirical_u_matrix(p, g):
    """Per-edge products of the two directed transition probabilities."""
    return np.array([p[i, j] * p[j, i] for i, j in g.edges])
