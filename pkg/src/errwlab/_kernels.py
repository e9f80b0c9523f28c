"""Compiled inner loops. Nothing here is part of the public API.

All randomness is pre-generated by the caller (counter-based streams),
so these kernels are deterministic functions of their inputs and safe
to run from worker threads (nogil).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def reinforced_walk(indptr, nbr, eid, ltimes, v0, uniforms, steps):
    """One reinforced trajectory; ltimes is mutated in place."""
    x = v0
    steps[0] = x
    for t in range(uniforms.shape[0]):
        lo = indptr[x]
        hi = indptr[x + 1]
        total = 0.0
        for p in range(lo, hi):
            total += ltimes[eid[p]]
        target = uniforms[t] * total
        acc = 0.0
        chosen = hi - 1
        for p in range(lo, hi):
            acc += ltimes[eid[p]]
            if target < acc:
                chosen = p
                break
        e = eid[chosen]
        ltimes[e] += 1.0
        x = nbr[chosen]
        steps[t + 1] = x


@njit(cache=True, nogil=True)
def first_departure_counts(steps, n, m, counts, consumed, totals):
    """Transitions to each target among the first m departures per vertex."""
    for t in range(steps.shape[0] - 1):
        i = steps[t]
        totals[i] += 1
        if consumed[i] < m:
            counts[i, steps[t + 1]] += 1
            consumed[i] += 1


@njit(cache=True, nogil=True)
def _log_tree_sum_inplace(nred, mm, ii, jj, logbeta, phi, scratch):
    """ln sum over spanning trees of prod beta_e e^{phi_i+phi_j}, vertex 0 removed."""
    scale = -1.0e300
    for e in range(mm):
        lw = logbeta[e] + phi[ii[e]] + phi[jj[e]]
        if lw > scale:
            scale = lw
    for r in range(nred):
        for c in range(nred):
            scratch[r, c] = 0.0
    for e in range(mm):
        w = math.exp(logbeta[e] + phi[ii[e]] + phi[jj[e]] - scale)
        i = ii[e]
        j = jj[e]
        if i > 0:
            scratch[i - 1, i - 1] += w
        if j > 0:
            scratch[j - 1, j - 1] += w
        if i > 0 and j > 0:
            scratch[i - 1, j - 1] -= w
            scratch[j - 1, i - 1] -= w
    logdet = 0.0
    for k in range(nred):
        s = scratch[k, k]
        for t in range(k):
            s -= scratch[k, t] * scratch[k, t]
        if s <= 0.0:
            return -np.inf
        d = math.sqrt(s)
        scratch[k, k] = d
        logdet += math.log(d)
        for r in range(k + 1, nred):
            s2 = scratch[r, k]
            for t in range(k):
                s2 -= scratch[r, t] * scratch[k, t]
            scratch[r, k] = s2 / d
    return 2.0 * logdet + nred * scale


@njit(cache=True, nogil=True)
def phi_metropolis_chain(
    ii,
    jj,
    indptr,
    nbr,
    eid,
    beta,
    logbeta,
    v0,
    tree,
    sweeps,
    burn_in,
    step0,
    normals,
    uniforms,
    phi,
):
    """Coordinate Metropolis on the conditional phi density given beta.

    Step size adapts toward 0.4 acceptance during burn-in only, so the
    post-burn-in chain has a fixed kernel. Returns the final step size.
    """
    n = phi.shape[0]
    mm = beta.shape[0]
    nred = n - 1
    scratch = np.zeros((nred, nred))
    step = step0
    ln_s = 0.0
    if not tree:
        ln_s = _log_tree_sum_inplace(nred, mm, ii, jj, logbeta, phi, scratch)
    p = 0
    accepted = 0
    proposed = 0
    for s in range(sweeps):
        for i in range(n):
            if i == v0:
                continue
            z = normals[p]
            u = uniforms[p]
            p += 1
            old = phi[i]
            new = old + step * z
            dlog = -(new - old)
            for ptr in range(indptr[i], indptr[i + 1]):
                j = nbr[ptr]
                b = beta[eid[ptr]]
                dlog -= b * (math.cosh(new - phi[j]) - math.cosh(old - phi[j]))
            if tree:
                # Single spanning tree: the tree factor shifts linearly
                # by deg(i)/2 per unit change of phi_i.
                dlog += 0.5 * (indptr[i + 1] - indptr[i]) * (new - old)
                accept = math.log(u) < dlog
            else:
                phi[i] = new
                ln_s_new = _log_tree_sum_inplace(nred, mm, ii, jj, logbeta, phi, scratch)
                dlog += 0.5 * (ln_s_new - ln_s)
                accept = math.log(u) < dlog
                phi[i] = old
                if accept:
                    ln_s = ln_s_new
            if accept:
                phi[i] = new
                accepted += 1
            proposed += 1
        if s < burn_in and (s + 1) % 25 == 0:
            rate = accepted / proposed
            step *= math.exp(0.66 * (rate - 0.4))
            if step < 1e-3:
                step = 1e-3
            elif step > 50.0:
                step = 50.0
            accepted = 0
            proposed = 0
    return step


@njit(cache=True, nogil=True)
def markov_walk(cum_rows, v0, uniforms, steps):
    """Fixed-environment walk via cumulative row inversion."""
    x = v0
    steps[0] = x
    for t in range(uniforms.shape[0]):
        u = uniforms[t]
        row = cum_rows[x]
        nxt = row.shape[0] - 1
        for j in range(row.shape[0]):
            if u < row[j]:
                nxt = j
                break
        x = nxt
        steps[t + 1] = x


@njit(cache=True, nogil=True)
def markov_cover_time(cum_rows, v0, uniforms):
    """Steps until all states visited; -1 if uniforms run out first."""
    n = cum_rows.shape[0]
    seen = np.zeros(n, dtype=np.uint8)
    seen[v0] = 1
    remaining = n - 1
    x = v0
    for t in range(uniforms.shape[0]):
        u = uniforms[t]
        row = cum_rows[x]
        nxt = row.shape[0] - 1
        for j in range(row.shape[0]):
            if u < row[j]:
                nxt = j
                break
        x = nxt
        if seen[x] == 0:
            seen[x] = 1
            remaining -= 1
            if remaining == 0:
                return t + 1
    return -1
