"""Closed-form moments, normalizer, and KL against independent oracles.

The reference numbers here were produced by hand calculation and by
numerical quadrature, not by the library under test.
"""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate
from scipy import special as sps

import errwlab as el
from errwlab.moments import (
    MomentOracle,
    covariance_gap,
    expected_sqrt_u,
    expected_u,
    expected_u_sq,
    expected_uu,
)
from helpers import pick_hub, random_connected_graph


def _triangle_oracle():
    g = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    return g, MomentOracle(g, np.ones(3), 0)


def test_triangle_unit_weight_constants():
    g, orc = _triangle_oracle()
    assert_allclose(orc.o, [2.0, 3.0, 3.0])
    # values derived by integrating the explicit 2-d environment density
    assert_allclose(expected_u(orc, (1, 2)), 2.0 / 9.0, rtol=1e-14)
    assert_allclose(expected_u(orc, (0, 1)), 1.0 / 3.0, rtol=1e-14)
    assert_allclose(expected_u(orc, (0, 2)), 1.0 / 3.0, rtol=1e-14)
    assert_allclose(expected_sqrt_u(orc, (1, 2)), math.pi / 8.0, rtol=1e-12)
    assert_allclose(expected_sqrt_u(orc, (0, 1)), 0.5, rtol=1e-12)
    assert_allclose(expected_u_sq(orc, (1, 2)), 8.0 / 75.0, rtol=1e-14)
    assert_allclose(expected_u_sq(orc, (0, 1)), 1.0 / 5.0, rtol=1e-14)
    assert_allclose(expected_uu(orc, (0, 1), (1, 2)), 2.0 / 45.0, rtol=1e-14)
    assert_allclose(covariance_gap(orc, (0, 1), (1, 2)), 4.0 / 135.0,
                    rtol=1e-13)


def test_path_unit_weight_constants():
    g = el.path_graph(3)
    orc = MomentOracle(g, np.ones(2), 1)
    assert_allclose(orc.o, [2.0, 2.0, 2.0])
    assert_allclose(expected_u(orc, 0), 0.5, rtol=1e-14)
    assert_allclose(expected_sqrt_u(orc, 0), 2.0 / math.pi, rtol=1e-12)
    assert_allclose(expected_u_sq(orc, 0), 3.0 / 8.0, rtol=1e-14)
    assert_allclose(expected_uu(orc, 0, 1), 1.0 / 8.0, rtol=1e-14)


def test_moment_ranges_and_orderings():
    rng = np.random.default_rng(21)
    for _ in range(25):
        g = random_connected_graph(rng, n_lo=3, n_hi=6)
        a = rng.uniform(0.3, 3.0, size=g.m)
        orc = MomentOracle(g, a, pick_hub(g, rng))
        for e in range(g.m):
            m1 = expected_u(orc, e)
            m2 = expected_u_sq(orc, e)
            mh = expected_sqrt_u(orc, e)
            assert 0.0 < m1 < 1.0
            assert m2 < m1 < mh      # U < 1 a.s., Jensen in both directions
            assert m1 ** 2 < m2      # second moment exceeds squared mean
            assert mh ** 2 < m1


def test_adjacent_product_moment_identity():
    # shared-vertex factorization: E[UU'] = E[U] E[U'] o_j / (o_j + 2)
    rng = np.random.default_rng(22)
    for _ in range(25):
        g = random_connected_graph(rng, n_lo=3, n_hi=6)
        a = rng.uniform(0.3, 3.0, size=g.m)
        orc = MomentOracle(g, a, pick_hub(g, rng))
        for k1, k2 in el.adjacent_edge_pairs(g):
            shared = set(g.edges[k1]) & set(g.edges[k2])
            j = shared.pop()
            lhs = expected_uu(orc, k1, k2)
            rhs = (expected_u(orc, k1) * expected_u(orc, k2)
                   * orc.o[j] / (orc.o[j] + 2.0))
            assert_allclose(lhs, rhs, rtol=1e-12)
            assert covariance_gap(orc, k1, k2) > 0.0


def test_disjoint_edges_factorize():
    g = el.path_graph(4)
    a = np.array([0.8, 1.4, 2.0])
    orc = MomentOracle(g, a, 1)
    assert_allclose(expected_uu(orc, 0, 2),
                    expected_u(orc, 0) * expected_u(orc, 2), rtol=1e-14)


def test_moment_errors():
    g, orc = _triangle_oracle()
    with pytest.raises(el.SharedTwoVerticesError):
        expected_uu(orc, 0, 0)
    with pytest.raises(el.NotAdjacentError):
        g4 = el.path_graph(4)
        covariance_gap(MomentOracle(g4, np.ones(3), 1), 0, 2)
    with pytest.raises(el.MomentError):
        MomentOracle(el.path_graph(3), np.ones(2), 0)  # degree-1 start
    with pytest.raises(el.MomentError):
        MomentOracle(g, np.ones(3), 7)


def test_edge_addressing_by_id_and_endpoints():
    g, orc = _triangle_oracle()
    assert expected_u(orc, 0) == expected_u(orc, (0, 1))
    assert expected_u(orc, 2) == expected_u(orc, (2, 1))


def test_log_normalizer_closed_small_graphs():
    # path 0-1-2 from the middle, unit weights: Z = pi
    assert_allclose(el.log_normalizer_closed(el.path_graph(3), np.ones(2), 1),
                    math.log(math.pi), rtol=1e-13)
    # triangle, unit weights: Z = 2
    g = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    assert_allclose(el.log_normalizer_closed(g, np.ones(3), 0),
                    math.log(2.0), rtol=1e-13)


def test_log_normalizer_single_edge_is_unity():
    # one-edge graph: the normalizer collapses to 1 for every weight,
    # by the gamma duplication formula
    g = el.Graph(n=2, edges=((0, 1),))
    for a in (0.3, 0.77, 1.0, 2.5, 9.0):
        assert abs(el.log_normalizer_closed(g, np.array([a]), 0)) < 1e-12


def test_log_normalizer_gradient_matches_finite_differences():
    rng = np.random.default_rng(23)
    h = 1e-5
    for _ in range(12):
        g = random_connected_graph(rng, n_lo=3, n_hi=6)
        a = rng.uniform(0.5, 2.5, size=g.m)
        v0 = pick_hub(g, rng)
        grad = el.log_normalizer_gradient(g, a, v0)
        assert grad.shape == (g.m,)
        for e in range(g.m):
            up, dn = a.copy(), a.copy()
            up[e] += h
            dn[e] -= h
            fd = (el.log_normalizer_closed(g, up, v0)
                  - el.log_normalizer_closed(g, dn, v0)) / (2 * h)
            assert_allclose(grad[e], fd, rtol=1e-6, atol=1e-8)


def test_kl_mixing_zero_and_positive():
    rng = np.random.default_rng(24)
    for _ in range(15):
        g = random_connected_graph(rng, n_lo=3, n_hi=6)
        a = rng.uniform(0.5, 2.5, size=g.m)
        v0 = pick_hub(g, rng)
        assert el.kl_mixing(g, v0, a, a) == pytest.approx(0.0, abs=1e-12)
        a_tilde = a * rng.uniform(0.6, 1.6, size=g.m)
        assert el.kl_mixing(g, v0, a, a_tilde) >= 0.0
        # Gibbs: KL is positive whenever the weights differ
        assert el.kl_mixing(g, v0, a, a_tilde) > 0.0 or np.allclose(a, a_tilde)


def test_kl_taylor_coefficient_on_triangle():
    g = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    a = np.ones(3)
    coeff = (2 * sps.polygamma(1, 1.0) - sps.polygamma(1, 1.5)) / 4.0
    e_far = g.edge_id(1, 2)
    for eps in (1e-2, 1e-3):
        tilde = a.copy()
        tilde[e_far] += eps
        ratio = el.kl_mixing(g, 0, a, tilde) / eps**2
        assert abs(ratio - coeff) / coeff < 0.01


def test_kl_matches_quadrature_on_two_edge_path():
    g = el.path_graph(3)
    a = np.array([1.0, 1.0])
    tilde = np.array([1.4, 0.7])
    e0 = (0, 1)

    def integrand(u):
        w = np.array([1.0, math.exp(u)])
        try:
            lp = el.mixing_log_density(g, a, 1, e0, w) + u
            lq = el.mixing_log_density(g, tilde, 1, e0, w) + u
        except el.NumericOverflowError:
            # density mass beyond the representable corner is ~1e-8
            return 0.0
        return math.exp(lp) * (lp - lq)

    quad, err = integrate.quad(integrand, -35, 35, limit=300)
    assert err < 1e-7
    assert_allclose(el.kl_mixing(g, 1, a, tilde), quad, atol=1e-4)


def test_kl_first_order_term_vanishes():
    # KL(a, a + eps d) should shrink like eps^2, not eps
    g = el.cycle_graph(4)
    a = np.full(4, 1.2)
    d = np.array([0.7, -0.3, 0.5, -0.9])
    vals = [el.kl_mixing(g, 0, a, a + eps * d) for eps in (1e-2, 5e-3)]
    assert vals[0] / vals[1] == pytest.approx(4.0, rel=0.05)


def test_tree_exact_sampler_reproduces_closed_moments():
    # Monte Carlo over exactly sampled tree environments against the oracle
    rng = np.random.default_rng(25)
    draws = 100_000
    for trial in range(3):
        n = int(rng.integers(3, 7))
        g = el.path_graph(n) if trial == 0 else _random_tree(rng, n)
        a = rng.uniform(0.5, 2.0, size=g.m)
        hubs = np.flatnonzero(g.degrees >= 2)
        v0 = int(rng.choice(hubs))
        orc = MomentOracle(g, a, v0)
        beta, phi = el.sample_environments(
            g, a, v0, draws, master_seed=900 + trial, method="tree")
        u = el.edge_transition_products(g, beta, phi)
        for e in range(g.m):
            for fn, sample in (
                (expected_u, u[:, e]),
                (expected_sqrt_u, np.sqrt(u[:, e])),
                (expected_u_sq, u[:, e] ** 2),
            ):
                mean = sample.mean()
                se = sample.std(ddof=1) / math.sqrt(draws)
                assert abs(mean - fn(orc, e)) < 4.5 * se
        for k1, k2 in el.adjacent_edge_pairs(g)[:4]:
            prod = u[:, k1] * u[:, k2]
            se = prod.std(ddof=1) / math.sqrt(draws)
            assert abs(prod.mean() - expected_uu(orc, k1, k2)) < 4.5 * se


def _random_tree(rng, n):
    edges = [(int(rng.integers(v)), v) for v in range(1, n)]
    return el.Graph(n=n, edges=edges)
