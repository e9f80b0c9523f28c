"""Command-line interface.

Subcommands: simulate (trajectory campaigns), sample-env (environment
draws), estimate (weight recovery), verify-moments (closed form vs
Monte Carlo CSV), kl (divergence between weight hypotheses), bounds and
plan (log-space theory calculators), selftest (reduced-scale checks).
Randomized commands require --seed and are reproducible byte-for-byte
from their inputs; --threads (or ERRW_LAB_THREADS) only changes timing.
Failures print one JSON object to stderr naming the offending field.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import rng as streams
from .environment import (
    MCMCConfig,
    edge_transition_products,
    environment_from_fields,
    gradient_log_density,
    mixing_normalization_quadrature,
    sample_environment_longrun,
    sample_environments,
)
from .estimator import (
    adjacent_edge_pairs,
    estimate_weights,
    exact_moment_estimates,
    recover_weights,
    sample_size_plan,
    theoretical_bounds,
)
from .graphs import Graph, path_graph
from .moments import (
    MomentOracle,
    expected_sqrt_u,
    expected_u,
    expected_u_sq,
    expected_uu,
    kl_mixing,
)
from .serialize import (
    dump_environments,
    load_environments,
    load_graph,
    load_trajectories,
    load_weights,
)
from .special import DomainError, digamma, log_gamma, trigamma
from .walk import enumerate_trajectories, simulate_batch, trajectory_log_likelihoods

_LOG10 = math.log(10.0)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("ERRW_LAB_THREADS")
    return max(1, int(env)) if env else 1


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _mcmc_config(args) -> MCMCConfig:
    return MCMCConfig(
        burn_in=args.burn_in,
        thinning=args.thinning,
        step_size=args.step_size,
        chains=args.chains,
    )


def _add_mcmc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--burn-in", type=int, default=500, help="MCMC burn-in sweeps")
    p.add_argument("--thinning", type=int, default=10, help="post-burn-in sweeps per draw")
    p.add_argument("--step-size", type=float, default=0.5, help="proposal scale")
    p.add_argument("--chains", type=int, default=1, help="independent chains per draw")


def cmd_simulate(args) -> int:
    g = load_graph(args.graph)
    a = load_weights(args.weights, g)
    trajs = simulate_batch(g, a, args.v0, args.T, args.K, args.seed, threads=_threads(args))
    lines = []
    for t in trajs:
        seq = [int(x) for x in t.steps]
        if args.format == "jsonl":
            lines.append(json.dumps({"v0": seq[0], "steps": seq}))
        else:
            lines.append(",".join(str(x) for x in seq))
    _write(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_sample_env(args) -> int:
    g = load_graph(args.graph)
    a = load_weights(args.weights, g)
    beta, phi = sample_environments(
        g,
        a,
        args.v0,
        args.K,
        args.seed,
        method=args.method,
        cfg=_mcmc_config(args),
        threads=_threads(args),
    )
    envs = [environment_from_fields(g, beta[i], phi[i], args.v0) for i in range(args.K)]
    if args.out == "-":
        for env in envs:
            sys.stdout.write(
                json.dumps(
                    {
                        "v0": env.v0,
                        "beta": [float(x) for x in env.beta],
                        "phi": [float(x) for x in env.phi],
                        "q": [float(x) for x in env.q],
                    }
                )
                + "\n"
            )
    else:
        dump_environments(envs, args.out)
    return 0


def _flag_to_json(flag):
    return list(flag)


def cmd_estimate(args) -> int:
    g = load_graph(args.graph)
    trajs = load_trajectories(args.trajectories)
    truth = load_weights(args.truth, g) if args.truth else None
    v0 = int(trajs[0].v0)
    report = estimate_weights(
        g,
        v0,
        trajs,
        args.m,
        truth=truth,
        average_pairs=args.average_pairs,
        threads=_threads(args),
    )
    doc = {
        "o_hat": [float(x) for x in report.o_hat],
        "a_hat": [float(x) for x in report.a_hat],
        "flags": sorted(_flag_to_json(f) for f in report.flags),
        "d": None if report.divergence is None else float(report.divergence),
    }
    _write(args.out, json.dumps(doc) + "\n")
    return 0


def _longrun_u_rows(g: Graph, a, v0: int, k: int, t_long: int, seed: int, threads: int):
    ii, jj = g.edge_endpoints()
    u = np.empty((k, g.m))

    def one(i: int) -> None:
        rng = streams.stream(seed, i, streams.DOMAIN_WALK)
        p = sample_environment_longrun(g, a, v0, t_long, rng)
        u[i] = p[ii, jj] * p[jj, ii]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(k)))
    else:
        for i in range(k):
            one(i)
    return u


def cmd_verify_moments(args) -> int:
    g = load_graph(args.graph)
    a = load_weights(args.weights, g)
    v0 = args.v0
    oracle = MomentOracle(g=g, a=a, v0=v0)

    if args.envs:
        envs = load_environments(args.envs, g)
        beta = np.vstack([e.beta for e in envs])
        phi = np.vstack([e.phi for e in envs])
        u = edge_transition_products(g, beta, phi)
    elif args.method == "longrun":
        if args.seed is None:
            raise DomainError("seed is required when sampling")
        u = _longrun_u_rows(g, a, v0, args.K, args.t_long, args.seed, _threads(args))
    else:
        if args.seed is None:
            raise DomainError("seed is required when sampling")
        beta, phi = sample_environments(
            g,
            a,
            v0,
            args.K,
            args.seed,
            method=args.method,
            cfg=_mcmc_config(args),
            threads=_threads(args),
        )
        u = edge_transition_products(g, beta, phi)

    k = u.shape[0]
    rows = ["statistic,edges,closed_form,estimate,std_error,z_score"]

    def emit(name: str, edges: str, closed: float, samples: np.ndarray) -> None:
        est = float(samples.mean())
        se = float(samples.std(ddof=1) / math.sqrt(k)) if k > 1 else float("nan")
        z = (est - closed) / se if se > 0 else float("nan")
        rows.append(f"{name},{edges},{closed:.10g},{est:.10g},{se:.4g},{z:.3f}")

    for e, (i, j) in enumerate(g.edges):
        emit("E[U]", f"{i}-{j}", expected_u(oracle, e), u[:, e])
        emit("E[sqrt(U)]", f"{i}-{j}", expected_sqrt_u(oracle, e), np.sqrt(u[:, e]))
        emit("E[U^2]", f"{i}-{j}", expected_u_sq(oracle, e), u[:, e] ** 2)
    for e1, e2 in adjacent_edge_pairs(g):
        i1, j1 = g.edges[e1]
        i2, j2 = g.edges[e2]
        emit(
            "E[UU']",
            f"{i1}-{j1}|{i2}-{j2}",
            expected_uu(oracle, e1, e2),
            u[:, e1] * u[:, e2],
        )
    _write(args.out, "\n".join(rows) + "\n")
    return 0


def cmd_kl(args) -> int:
    g = load_graph(args.graph)
    a = load_weights(args.weights, g)
    b = load_weights(args.alt, g)
    _write(args.out, json.dumps({"kl": kl_mixing(g, args.v0, a, b)}) + "\n")
    return 0


def cmd_bounds(args) -> int:
    out = theoretical_bounds(args.n, args.diam, args.a_lo, args.a_hi, args.delta)
    doc = {
        "g1": out["g1"],
        "log10_tcov_bound": out["tcov_bound"] / _LOG10,
        "log10_pi_star_bound": out["pi_star_bound"] / _LOG10,
        "log10_p_min_bound": out["p_min_bound"] / _LOG10,
        "log10_q_lo": out["q_range"][0] / _LOG10,
        "log10_q_hi": out["q_range"][1] / _LOG10,
    }
    _write(args.out, json.dumps(doc) + "\n")
    return 0


def cmd_plan(args) -> int:
    out = sample_size_plan(
        args.n, args.diam, args.a_lo, args.a_hi, args.eps, args.delta, args.g2
    )
    doc = {
        "g1": out["g1"],
        "delta_prime": out["delta_prime"],
        "eps_prime": out["eps_prime"],
        "log10_m": out["log_m"] / _LOG10,
        "log10_T": out["log_T"] / _LOG10,
        "log10_K": out["log_K"] / _LOG10,
    }
    _write(args.out, json.dumps(doc) + "\n")
    return 0


def _selftest_checks(seed: int):
    euler_gamma = 0.5772156649015328606
    yield (
        "special_functions",
        lambda: abs(digamma(1.0) + euler_gamma) < 1e-12
        and abs(trigamma(1.0) - math.pi**2 / 6.0) < 1e-12
        and abs(log_gamma(0.5) - 0.5 * math.log(math.pi)) < 1e-12,
    )

    def likelihood_normalization():
        g = Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
        a = np.ones(g.m)
        for t in (1, 2, 3, 4):
            paths = enumerate_trajectories(g, 0, t)
            total = np.exp(trajectory_log_likelihoods(g, a, 0, paths)).sum()
            if abs(total - 1.0) > 1e-10:
                return False
        return True

    yield ("likelihood_normalization", likelihood_normalization)

    def simulator_agreement():
        g = Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
        a = np.ones(g.m)
        k, t = 20_000, 2
        trajs = simulate_batch(g, a, 0, t, k, seed)
        paths = enumerate_trajectories(g, 0, t)
        probs = np.exp(trajectory_log_likelihoods(g, a, 0, paths))
        index = {tuple(row): idx for idx, row in enumerate(paths)}
        counts = np.zeros(paths.shape[0])
        for traj in trajs:
            counts[index[tuple(traj.steps)]] += 1
        freq = counts / k
        sigma = np.sqrt(probs * (1.0 - probs) / k)
        return bool(np.all(np.abs(freq - probs) <= 5.0 * sigma + 1e-12))

    yield ("simulator_agreement", simulator_agreement)

    def normalizer_quadrature():
        g = path_graph(3)
        value = mixing_normalization_quadrature(g, np.ones(2), 1, g.edge_id(0, 1))
        return abs(value - 1.0) < 1e-6

    yield ("normalizer_quadrature", normalizer_quadrature)

    def gradient_density_normalization():
        from scipy import integrate

        total, _ = integrate.quad(
            lambda y: math.exp(gradient_log_density(y, 1.0)), -60, 60, limit=200
        )
        return abs(total - 1.0) < 1e-8

    yield ("gradient_density_normalization", gradient_density_normalization)

    def tree_moment_mc():
        g = path_graph(3)
        a = np.ones(2)
        beta, phi = sample_environments(g, a, 1, 20_000, seed, method="tree")
        u = edge_transition_products(g, beta, phi)
        oracle = MomentOracle(g=g, a=a, v0=1)
        for e in range(g.m):
            closed = expected_u(oracle, e)
            est = u[:, e].mean()
            se = u[:, e].std(ddof=1) / math.sqrt(u.shape[0])
            if abs(est - closed) > 4.0 * se:
                return False
        return True

    yield ("tree_moment_mc", tree_moment_mc)

    def estimator_exactness():
        rng = streams.stream(seed, 0)
        for _ in range(10):
            n = int(rng.integers(3, 6))
            g = path_graph(n) if rng.random() < 0.5 else Graph(
                n=3, edges=((0, 1), (1, 2), (0, 2))
            )
            a = rng.uniform(0.5, 2.0, g.m)
            v0 = next(v for v in range(g.n) if g.degree(v) >= 2)
            est = exact_moment_estimates(g, a, v0)
            rep = recover_weights(g, v0, est)
            if np.max(np.abs(rep.a_hat - a)) > 1e-10:
                return False
        return True

    yield ("estimator_exactness", estimator_exactness)

    def kl_taylor():
        g = Graph(n=3, edges=((0, 1), (1, 2), (0, 2)))
        a = np.ones(3)
        target = (2.0 * trigamma(1.0) - trigamma(1.5)) / 4.0
        eps = 1e-2
        b = a.copy()
        b[g.edge_id(1, 2)] += eps
        value = kl_mixing(g, 0, a, b) / eps**2
        return abs(value - target) / target < 0.01

    yield ("kl_taylor", kl_taylor)

    def planner_example():
        plan = sample_size_plan(3, 1, 1.0, 1.0, 0.1, 0.1)
        return abs(plan["delta_prime"] - 0.1 * 4.0 / 18432.0) < 1e-12

    yield ("planner_example", planner_example)


def cmd_selftest(args) -> int:
    failures = 0
    for name, check in _selftest_checks(args.seed):
        try:
            ok = check()
        except Exception as exc:  # a crash is a failure, not an abort
            ok = False
            print(f"FAIL {name} ({type(exc).__name__}: {exc})")
            failures += 1
            continue
        if ok:
            print(f"PASS {name}")
        else:
            print(f"FAIL {name}")
            failures += 1
    print(f"{'OK' if failures == 0 else 'FAILED'} ({failures} failures)")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="errwlab",
        description="Reinforced-walk simulation, environment sampling, and weight recovery.",
    )
    parser.add_argument("--threads", type=int, default=None, help="worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample reinforced trajectories")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--v0", type=int, required=True)
    p.add_argument("--K", type=int, required=True, help="number of trajectories")
    p.add_argument("--T", type=int, required=True, help="steps per trajectory")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sample-env", help="draw random environments")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--v0", type=int, required=True)
    p.add_argument("--K", type=int, required=True, help="number of draws")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--method", choices=("auto", "tree", "mcmc"), default="auto")
    _add_mcmc_flags(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_sample_env)

    p = sub.add_parser("estimate", help="recover weights from trajectories")
    p.add_argument("--graph", required=True)
    p.add_argument("--trajectories", required=True)
    p.add_argument("--m", type=int, required=True, help="departures per vertex")
    p.add_argument("--truth", default=None, help="weights file for divergence report")
    p.add_argument("--average-pairs", action="store_true")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify-moments", help="closed form vs Monte Carlo table")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--v0", type=int, required=True)
    p.add_argument("--envs", default=None, help="environment file to consume")
    p.add_argument("--K", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--method", choices=("auto", "tree", "mcmc", "longrun"), default="auto")
    p.add_argument("--t-long", type=int, default=10_000, help="steps per long run")
    _add_mcmc_flags(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_verify_moments)

    p = sub.add_parser("kl", help="divergence between two weight hypotheses")
    p.add_argument("--graph", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--alt", required=True)
    p.add_argument("--v0", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("bounds", help="log-space cover-time and occupancy bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--diam", type=int, required=True)
    p.add_argument("--a-lo", type=float, required=True)
    p.add_argument("--a-hi", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("plan", help="guarantee-level sample sizes (log-space)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--diam", type=int, required=True)
    p.add_argument("--a-lo", type=float, required=True)
    p.add_argument("--a-hi", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--g2", type=float, default=1.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("selftest", help="reduced-scale verification suite")
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_selftest)

    # accept --threads after the subcommand too; SUPPRESS keeps the
    # top-level value when the flag is absent there
    for sp in sub.choices.values():
        sp.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker threads")

    return parser


_FIELD_RE = re.compile(r"(?:field|flag|argument) '([^']+)'|^'?(--?[a-z0-9-]+|[a-z0-9_]+)'? must\b", re.IGNORECASE)


def _error_json(exc: Exception) -> str:
    message = str(exc)
    field = None
    match = _FIELD_RE.search(message)
    if match:
        field = match.group(1) or match.group(2)
    return json.dumps(
        {"error": type(exc).__name__, "message": message, "field": field}
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except (FileNotFoundError, ValueError, ArithmeticError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
