"""Compiled inner loop of the collapsed Gibbs sampler.

Cluster ids live in ``[0, capacity)``. ``active[:meta[0]]`` lists ids in
use and ``where[id]`` is an id's slot in that list; released ids go on the
``free[:meta[1]]`` stack. Labels are compacted to ``0..J-1`` at the end of
every sweep. All randomness comes from the caller's ``uniforms`` array, so
a chain is reproducible from its uniform stream alone.

Factorial terms that are identical across every candidate move are left
out of the predictive densities below.
"""

from math import exp, lgamma, log, log1p

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _lp1(y, e, s, n, alpha, beta):
    # log p(y | cluster with count-sum s and exposure n), minus log y!
    a = alpha + s
    b = beta + n
    out = lgamma(a + y) - lgamma(a) - a * log1p(e / b)
    if y > 0:
        out += y * (log(e) - log(b + e))
    return out


@njit(cache=True, nogil=True)
def _lp2(y1, e1, y2, e2, s, n, alpha, beta):
    # log p(y1, y2 | both drawn at the same cluster rate), minus log y1! y2!
    a = alpha + s
    b = beta + n
    e = e1 + e2
    out = lgamma(a + y1 + y2) - lgamma(a) - a * log1p(e / b)
    if y1 > 0:
        out += y1 * (log(e1) - log(b + e))
    if y2 > 0:
        out += y2 * (log(e2) - log(b + e))
    return out


@njit(cache=True, nogil=True)
def _draw(logw, n, u):
    m = logw[0]
    for k in range(1, n):
        if logw[k] > m:
            m = logw[k]
    total = 0.0
    for k in range(n):
        total += exp(logw[k] - m)
    target = u * total
    acc = 0.0
    for k in range(n):
        acc += exp(logw[k] - m)
        if acc > target:
            return k
    # round-off: fall back to the last index with positive weight
    for k in range(n - 1, -1, -1):
        if logw[k] > -np.inf:
            return k
    return n - 1


@njit(cache=True, nogil=True)
def _logsumexp(logw, n):
    m = logw[0]
    for k in range(1, n):
        if logw[k] > m:
            m = logw[k]
    if m == -np.inf:
        return m
    total = 0.0
    for k in range(n):
        total += exp(logw[k] - m)
    return m + log(total)


@njit(cache=True, nogil=True)
def _release(k, active, where, free, meta):
    idx = where[k]
    last = active[meta[0] - 1]
    active[idx] = last
    where[last] = idx
    meta[0] -= 1
    free[meta[1]] = k
    meta[1] += 1


@njit(cache=True, nogil=True)
def _acquire(active, where, free, meta, csum, cexp, csize):
    meta[1] -= 1
    k = free[meta[1]]
    active[meta[0]] = k
    where[k] = meta[0]
    meta[0] += 1
    csum[k] = 0.0
    cexp[k] = 0.0
    csize[k] = 0
    return k


@njit(cache=True, nogil=True)
def _remove(k, y, e, csum, cexp, csize, active, where, free, meta):
    csum[k] -= y
    cexp[k] -= e
    csize[k] -= 1
    if csize[k] == 0:
        _release(k, active, where, free, meta)


@njit(cache=True, nogil=True)
def _add(k, y, e, csum, cexp, csize):
    csum[k] += y
    cexp[k] += e
    csize[k] += 1


@njit(cache=True, nogil=True)
def compact(s, gam, csum, cexp, csize, active, where, free, meta):
    """Relabel clusters ``0..J-1`` in order of first appearance."""
    cap = csum.shape[0]
    nact = meta[0]
    relabel = np.full(cap, -1, dtype=np.int64)
    new_sum = np.zeros(cap)
    new_exp = np.zeros(cap)
    new_size = np.zeros(cap, dtype=np.int64)
    nxt = 0
    npos = s.shape[0]
    for i in range(npos):
        for j in range(2):
            k = s[i, j]
            if relabel[k] < 0:
                relabel[k] = nxt
                new_sum[nxt] = csum[k]
                new_exp[nxt] = cexp[k]
                new_size[nxt] = csize[k]
                nxt += 1
            s[i, j] = relabel[k]
    for k in range(cap):
        csum[k] = new_sum[k]
        cexp[k] = new_exp[k]
        csize[k] = new_size[k]
    for k in range(nxt):
        active[k] = k
        where[k] = k
    meta[0] = nxt
    nfree = 0
    for k in range(cap - 1, nxt - 1, -1):
        free[nfree] = k
        where[k] = -1
        nfree += 1
    meta[1] = nfree
    return nact == nxt


@njit(cache=True, nogil=True)
def run_sweeps(
    y1, y2, e1, e2, gam, s, csum, cexp, csize, active, where, free, meta,
    alpha, beta, dp_precision, pi, uniforms, gamma_acc, diff_acc, accumulate, cluster_acc,
):
    """Run ``uniforms.shape[0]`` systematic-scan sweeps in place.

    For each position the pair's draws are removed, then ``gamma_i`` and the
    labels are drawn jointly from their full conditional: the shared branch
    sums over one CRP draw of the pooled pair, the split branch over two
    sequential CRP draws. When ``accumulate[t]`` is set, sweep ``t`` adds
    ``gamma_i`` to ``gamma_acc``, the distinct-rate indicator
    ``s[i, 0] != s[i, 1]`` to ``diff_acc`` and the cluster count to
    ``cluster_acc[0]``.
    """
    npos = y1.shape[0]
    cap = csum.shape[0]
    la = np.empty(cap + 2)
    lb = np.empty(cap + 2)
    lc = np.empty(cap + 2)
    ld = np.empty(cap + 2)
    w = np.empty(cap + 2)
    log_m = log(dp_precision)
    log_pi = log(pi)
    log_1mpi = log1p(-pi)
    n_draws = 0
    for k in range(meta[0]):
        n_draws += csize[active[k]]

    for t in range(uniforms.shape[0]):
        for i in range(npos):
            a1 = y1[i]
            a2 = y2[i]
            x1 = e1[i]
            x2 = e2[i]
            if gam[i] == 0:
                _remove(s[i, 0], a1 + a2, x1 + x2, csum, cexp, csize, active, where, free, meta)
                n_draws -= 1
            else:
                _remove(s[i, 0], a1, x1, csum, cexp, csize, active, where, free, meta)
                _remove(s[i, 1], a2, x2, csum, cexp, csize, active, where, free, meta)
                n_draws -= 2

            nact = meta[0]
            shift = -np.inf
            for idx in range(nact):
                k = active[idx]
                lnk = log(csize[k])
                la[idx] = lnk + _lp1(a1, x1, csum[k], cexp[k], alpha, beta)
                lb[idx] = lnk + _lp1(a2, x2, csum[k], cexp[k], alpha, beta)
                lc[idx] = lnk + _lp2(a1, x1, a2, x2, csum[k], cexp[k], alpha, beta)
                ld[idx] = log(csize[k] + 1.0) + _lp1(a2, x2, csum[k] + a1, cexp[k] + x1, alpha, beta)
                if lb[idx] > shift:
                    shift = lb[idx]
                if ld[idx] > shift:
                    shift = ld[idx]
            la[nact] = log_m + _lp1(a1, x1, 0.0, 0.0, alpha, beta)
            lb[nact] = log_m + _lp1(a2, x2, 0.0, 0.0, alpha, beta)
            lc[nact] = log_m + _lp2(a1, x1, a2, x2, 0.0, 0.0, alpha, beta)
            # y2 joining the singleton cluster just opened by y1
            ld[nact] = _lp1(a2, x2, a1, x1, alpha, beta)
            if lb[nact] > shift:
                shift = lb[nact]
            if ld[nact] > shift:
                shift = ld[nact]

            # predictive mass of y2 summed over all CRP options, before y1 is placed
            s2 = 0.0
            for idx in range(nact + 1):
                s2 += exp(lb[idx] - shift)
            for idx in range(nact):
                rest = s2 - exp(lb[idx] - shift)
                if rest < 0.0:
                    rest = 0.0
                w[idx] = la[idx] + log(rest + exp(ld[idx] - shift)) + shift
            w[nact] = la[nact] + log(s2 + exp(ld[nact] - shift)) + shift

            log_split = log_pi - log(dp_precision + n_draws + 1.0) + _logsumexp(w, nact + 1)
            log_shared = log_1mpi + _logsumexp(lc, nact + 1)
            diff = log_shared - log_split
            if diff > 700.0:
                p_split = 0.0
            else:
                p_split = 1.0 / (1.0 + exp(diff))

            if uniforms[t, i, 0] < p_split:
                gam[i] = 1
                idx1 = _draw(w, nact + 1, uniforms[t, i, 1])
                if idx1 == nact:
                    k1 = _acquire(active, where, free, meta, csum, cexp, csize)
                else:
                    k1 = active[idx1]
                _add(k1, a1, x1, csum, cexp, csize)
                # conditional weights for y2 given y1 sits in k1
                for idx in range(nact):
                    w[idx] = lb[idx]
                if idx1 == nact:
                    w[nact] = ld[nact]
                    w[nact + 1] = lb[nact]
                    idx2 = _draw(w, nact + 2, uniforms[t, i, 2])
                    if idx2 == nact:
                        k2 = k1
                    elif idx2 == nact + 1:
                        k2 = _acquire(active, where, free, meta, csum, cexp, csize)
                    else:
                        k2 = active[idx2]
                else:
                    w[idx1] = ld[idx1]
                    w[nact] = lb[nact]
                    idx2 = _draw(w, nact + 1, uniforms[t, i, 2])
                    if idx2 == nact:
                        k2 = _acquire(active, where, free, meta, csum, cexp, csize)
                    else:
                        k2 = active[idx2]
                _add(k2, a2, x2, csum, cexp, csize)
                s[i, 0] = k1
                s[i, 1] = k2
                n_draws += 2
            else:
                gam[i] = 0
                idx0 = _draw(lc, nact + 1, uniforms[t, i, 1])
                if idx0 == nact:
                    k0 = _acquire(active, where, free, meta, csum, cexp, csize)
                else:
                    k0 = active[idx0]
                _add(k0, a1 + a2, x1 + x2, csum, cexp, csize)
                s[i, 0] = k0
                s[i, 1] = k0
                n_draws += 1

        compact(s, gam, csum, cexp, csize, active, where, free, meta)
        if accumulate[t]:
            for i in range(npos):
                gamma_acc[i] += gam[i]
                if s[i, 0] != s[i, 1]:
                    diff_acc[i] += 1
            cluster_acc[0] += meta[0]
