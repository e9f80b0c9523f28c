"""Random-environment sampling: gradient field, exact tree law, MCMC, density."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

import errwlab as el
from errwlab.rng import stream

# at unit edge weight the per-edge gradient density is
# p(y) = C exp(-y/2) cosh(y)^(-3/2); the constants below were obtained by
# numerical quadrature of that density (and match its analytic moments)
GRAD_MEAN_A1 = -math.log(2.0)
GRAD_SECOND_A1 = math.pi**2 / 6.0 + math.log(2.0) ** 2


def _grad_pdf(y, a):
    return np.exp(el.gradient_log_density(y, a))


def test_gradient_density_normalizes():
    for a in (0.4, 1.0, 2.5, 7.0):
        total, err = integrate.quad(_grad_pdf, -60, 60, args=(a,), limit=200)
        assert err < 1e-7
        assert abs(total - 1.0) < 1e-8


def test_gradient_density_known_values():
    # p(0) = Gamma(a + 1/2) / (sqrt(2 pi) Gamma(a)); at a=1 that is 1/(2 sqrt 2)
    assert_allclose(_grad_pdf(0.0, 1.0), 1.0 / (2.0 * math.sqrt(2.0)),
                    rtol=1e-12)
    mean, _ = integrate.quad(lambda y: y * _grad_pdf(y, 1.0), -60, 60, limit=200)
    second, _ = integrate.quad(lambda y: y * y * _grad_pdf(y, 1.0), -60, 60,
                               limit=200)
    assert_allclose(mean, GRAD_MEAN_A1, atol=1e-10)
    assert_allclose(second, GRAD_SECOND_A1, atol=1e-10)


def test_gradient_density_tilt_symmetry():
    # p(y) / p(-y) = exp(-y) for every weight
    y = np.linspace(-8, 8, 33)
    for a in (0.6, 1.0, 3.0):
        ratio = el.gradient_log_density(y, a) - el.gradient_log_density(-y, a)
        assert_allclose(ratio, -y, atol=1e-12)


def test_gradient_sampler_matches_density():
    rng = stream(77)
    n = 200_000
    for a in (0.5, 1.0, 2.2):
        y = el.sample_tree_gradient(a, rng, size=n)
        mean_q, _ = integrate.quad(lambda t: t * _grad_pdf(t, a), -60, 60,
                                   limit=200)
        var_q, _ = integrate.quad(
            lambda t: (t - mean_q) ** 2 * _grad_pdf(t, a), -60, 60, limit=200)
        pos_q, _ = integrate.quad(_grad_pdf, 0, 60, args=(a,), limit=200)
        assert abs(y.mean() - mean_q) < 4.5 * math.sqrt(var_q / n)
        p = y > 0
        assert abs(p.mean() - pos_q) < 4.5 * math.sqrt(pos_q * (1 - pos_q) / n)


def test_gradient_sampler_reproducible():
    a = np.array([1.3])
    one = el.sample_tree_gradient(1.3, stream(5), size=64)
    two = el.sample_tree_gradient(1.3, stream(5), size=64)
    np.testing.assert_array_equal(one, two)


def test_sample_beta_moments():
    rng = stream(78)
    b = el.sample_beta([2.5, 0.8], rng, size=50_000)
    assert b.shape == (50_000, 2)
    assert np.all(b > 0)
    for col, shape in zip(b.T, (2.5, 0.8)):
        se = col.std(ddof=1) / math.sqrt(col.size)
        assert abs(col.mean() - shape) < 4.5 * se


def test_phi_tree_anchoring_and_telescoping():
    rng = stream(79)
    g = el.path_graph(16)
    phi = el.sample_phi_tree(g, np.ones(15), 0, rng, size=4000)
    assert phi.shape == (4000, 16)
    assert np.all(phi[:, 0] == 0.0)
    # the leaf potential is a sum of 15 i.i.d. gradients
    mean = phi[:, 15].mean()
    expect = 15 * GRAD_MEAN_A1
    sd = math.sqrt(15 * (GRAD_SECOND_A1 - GRAD_MEAN_A1**2))
    assert abs(mean - expect) < 4.5 * sd / math.sqrt(4000)


def test_phi_tree_rejects_cycles():
    with pytest.raises(el.NotATreeError):
        el.sample_phi_tree(el.cycle_graph(4), np.ones(4), 0, stream(1))


def test_tree_environment_couples_beta_to_gradient():
    # under the joint law, beta * cosh(gradient) is Gamma(a + 1/2, 1)
    # and independent of the gradient; pairing beta with the gradient
    # naively would put infinite mass in that product's tail at a = 1
    g = el.path_graph(2)
    a = 1.0
    beta, phi = el.sample_environments(g, [a], 0, 200_000, master_seed=31,
                                       method="tree")
    y = phi[:, 1] - phi[:, 0]
    product = beta[:, 0] * np.cosh(y)
    assert stats.kstest(product, "gamma", args=(a + 0.5,)).statistic < 0.01
    # the beta marginal itself stays Gamma(a, 1)
    assert stats.kstest(beta[:, 0], "gamma", args=(a,)).statistic < 0.01
    # and the product is uncorrelated with the gradient's sign
    pos = product[y > 0].mean()
    neg = product[y <= 0].mean()
    assert abs(pos - neg) < 0.05


def test_environment_construction_and_validation():
    g = el.path_graph(3)
    beta = np.array([0.5, 2.0])
    phi = np.array([0.0, -0.3, 0.4])
    env = el.environment_from_fields(g, beta, phi, 0)
    assert_allclose(env.q, beta * np.exp([phi[0] + phi[1], phi[1] + phi[2]]))
    env.validate(g)
    with pytest.raises(el.FieldError):
        el.environment_from_fields(g, beta, phi, 1)  # phi not anchored at v0
    with pytest.raises(el.FieldError):
        el.environment_from_fields(g, -beta, phi, 0)
    bad = el.Environment(0, beta, phi, env.q * 1.01)
    with pytest.raises(el.FieldError):
        bad.validate(g)


def test_transition_matrix_properties():
    g = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    p = el.transition_matrix(g, np.ones(3))
    assert_allclose(p, np.full((3, 3), 0.5) - 0.5 * np.eye(3))
    rng = stream(80)
    q = rng.uniform(0.2, 3.0, size=3)
    p = el.transition_matrix(g, q)
    assert_allclose(p.sum(axis=1), 1.0, rtol=1e-12)
    assert np.all(np.diag(p) == 0.0)
    # conductances are scale-free
    assert_allclose(el.transition_matrix(g, 7.3 * q), p, rtol=1e-12)


def test_edge_transition_products_match_matrix():
    g = el.cycle_graph(4)
    beta, phi = el.sample_environments(g, np.ones(4), 0, 8, master_seed=9,
                                       method="mcmc")
    u = el.edge_transition_products(g, beta, phi)
    for k in range(8):
        env = el.environment_from_fields(g, beta[k], phi[k], 0)
        p = el.transition_matrix(g, env)
        for e, (i, j) in enumerate(g.edges):
            assert_allclose(u[k, e], p[i, j] * p[j, i], rtol=1e-12)


def test_mcmc_trivial_config_returns_start():
    g = el.cycle_graph(4)
    cfg = el.MCMCConfig(burn_in=0, thinning=0)
    phi = el.sample_phi_mcmc(g, np.ones(4), 0, np.ones(4), cfg=cfg,
                             rng=stream(3))
    assert_allclose(phi, np.zeros(4))


def test_mcmc_matches_tree_sampler_marginals():
    g = el.path_graph(4)
    a = np.array([1.0, 0.7, 1.5])
    bt, pt = el.sample_environments(g, a, 0, 10_000, master_seed=7,
                                    method="tree")
    bm, pm = el.sample_environments(g, a, 0, 10_000, master_seed=8,
                                    method="mcmc", threads=4)
    for v in range(1, 4):
        assert stats.ks_2samp(pt[:, v], pm[:, v]).statistic < 0.02
    for e in range(3):
        ks = stats.ks_2samp(np.log(bt[:, e]), np.log(bm[:, e])).statistic
        assert ks < 0.02


def test_sample_environments_deterministic_and_thread_invariant():
    g = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    b1, p1 = el.sample_environments(g, np.ones(3), 0, 40, master_seed=5,
                                    method="mcmc", threads=1)
    b2, p2 = el.sample_environments(g, np.ones(3), 0, 40, master_seed=5,
                                    method="mcmc", threads=3)
    np.testing.assert_array_equal(b1, b2)
    np.testing.assert_array_equal(p1, p2)


def test_sample_environments_auto_uses_exact_tree_law():
    g = el.path_graph(5)
    a = np.full(4, 1.2)
    auto = el.sample_environments(g, a, 0, 100, master_seed=6, method="auto")
    tree = el.sample_environments(g, a, 0, 100, master_seed=6, method="tree")
    np.testing.assert_array_equal(auto[0], tree[0])
    np.testing.assert_array_equal(auto[1], tree[1])


def test_longrun_sampler_approaches_closed_moments():
    g = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    orc = el.MomentOracle(g, np.ones(3), 0)
    k, t_long = 1000, 20_000
    rows = np.empty((k, 3))
    for i in range(k):
        p = el.sample_environment_longrun(g, np.ones(3), 0, t_long,
                                          stream(101, i))
        for e, (x, y) in enumerate(g.edges):
            rows[i, e] = p[x, y] * p[y, x]
    se = rows.std(axis=0, ddof=1) / math.sqrt(k)
    for e in range(3):
        truth = el.expected_u(orc, e)
        # finite-horizon bias shrinks like 1/t_long; allow a small offset
        assert abs(rows[:, e].mean() - truth) < 4.5 * se[e] + 0.005


def test_mixing_log_density_errors():
    g = el.Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
    a = np.ones(3)
    with pytest.raises(el.E0NotIncidentError):
        el.mixing_log_density(g, a, 0, (1, 2), np.ones(3))
    with pytest.raises(el.FieldError):
        el.mixing_log_density(g, a, 0, (0, 1), np.array([2.0, 1.0, 1.0]))
    with pytest.raises(el.FieldError):
        el.mixing_log_density(g, a, 0, (0, 1), np.array([1.0, -1.0, 1.0]))


def test_mixing_density_normalizes_on_path():
    g = el.path_graph(3)
    total = el.mixing_normalization_quadrature(g, np.ones(2), 1, (0, 1))
    assert abs(total - 1.0) < 1e-6


def test_magic_formula_small_scale(triangle):
    # averaging random-walk path probabilities over environments reproduces
    # the reinforced walk's exact likelihood
    a = np.ones(3)
    k = 4000
    beta, phi = el.sample_environments(triangle, a, 0, k, master_seed=12,
                                       method="mcmc", threads=4)
    ii, jj = triangle.edge_endpoints()
    q = beta * np.exp(phi[:, ii] + phi[:, jj])
    strength = np.zeros((k, 3))
    np.add.at(strength, (slice(None), ii), q)
    np.add.at(strength, (slice(None), jj), q)
    paths = el.enumerate_trajectories(triangle, 0, 3)
    probs = np.exp(el.trajectory_log_likelihoods(triangle, a, 0, paths))
    edge_of = {(i, j): e for e, (i, j) in enumerate(triangle.edges)}
    for row, truth in zip(paths, probs):
        mc = np.ones(k)
        for t in range(3):
            x, y = int(row[t]), int(row[t + 1])
            e = edge_of[(min(x, y), max(x, y))]
            mc *= q[:, e] / strength[:, x]
        se = mc.std(ddof=1) / math.sqrt(k)
        assert abs(mc.mean() - truth) < 4.5 * se


def test_tail_diagnostics_structure_and_quiet_tree():
    g = el.path_graph(8)
    a = np.ones(7)
    beta, phi = el.sample_environments(g, a, 0, 10_000, master_seed=13,
                                       method="tree")
    report = el.tail_diagnostics(g, a, phi, delta=0.1, beta=beta)
    assert set(report) >= {"sup_phi", "gradient_tail", "flagged"}
    assert report["sup_phi"]["threshold"] > 0
    assert len(report["gradient_tail"]) == 3 * g.m
    assert not report["flagged"]
    # delta=1 removes the failure allowance entirely; nothing can flag
    relaxed = el.tail_diagnostics(g, a, phi, delta=1.0, beta=beta)
    assert not relaxed["flagged"]


def test_tail_diagnostics_needs_enough_samples():
    g = el.path_graph(3)
    beta, phi = el.sample_environments(g, np.ones(2), 0, 50, master_seed=1,
                                       method="tree")
    with pytest.raises(ValueError):
        el.tail_diagnostics(g, np.ones(2), phi, delta=0.1, beta=beta)
