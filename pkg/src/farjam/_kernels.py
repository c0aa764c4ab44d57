"""Compiled inner loops for the bandwidth DE (numba, with a numpy fallback).

The kernels mirror the vectorised numpy math in `ibaa` exactly: candidate
evaluation, one DE generation (mutation, binomial crossover, midpoint
bounce-back, feasibility-rule selection, archive, replacement). All
randomness is drawn by the caller with the numpy Generator and passed in, so
the random stream does not depend on which implementation runs.
"""

from __future__ import annotations

import math

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:      # pragma: no cover - numba is an optional speedup
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def evaluate_into(pop, col_jsr, col_scale, col_ub, gid, gbm, snap,
                  fixed_u, jsr_req, tolf, util_out, viol_out):
    count, dim = pop.shape
    groups = gbm.shape[0]
    for i in range(count):
        u = fixed_u
        v = 0.0
        sums = np.zeros(groups)
        for j in range(dim):
            b = pop[i, j]
            x = jsr_req * b / col_jsr[j]
            if tolf != 1.0:
                x = x ** tolf
            u += math.exp(-x) * b * col_scale[j]
            sums[gid[j]] += b
            if b > col_ub[j]:
                v += b - col_ub[j]
            elif b < 0.0:
                v += -b
        for g in range(groups):
            err = abs(sums[g] - gbm[g])
            if err >= snap[g]:
                v += err
        util_out[i] = u
        viol_out[i] = v


@njit(cache=True)
def de_generation(pop, util, viol, q_raw, floats, crossover_rate, scaling,
                  col_jsr, col_scale, col_ub, gid, gbm, snap, fixed_u,
                  jsr_req, tolf, archive_cap) -> bool:
    """One DE generation in place; returns True when no individual is feasible.

    `q_raw[q]` encodes the three distinct partner draws as one integer in
    [0, (Q-1)(Q-2)(Q-3)); `floats[q]` holds dim crossover uniforms, the
    mutation-variant coin, and the forced-coordinate uniform.
    """
    count, dim = pop.shape

    best = 0
    for q in range(1, count):
        if viol[q] < viol[best] or (viol[q] == viol[best] and util[q] > util[best]):
            best = q

    trials = np.empty((count, dim))
    for q in range(count):
        v = q_raw[q]
        q1 = v % (count - 1)
        v //= count - 1
        q2 = v % (count - 2)
        q3 = v // (count - 2)
        if q1 >= q:
            q1 += 1
        lo = q if q < q1 else q1
        hi = q1 if q1 > q else q
        if q2 >= lo:
            q2 += 1
        if q2 >= hi:
            q2 += 1
        e1, e2, e3 = q, q1, q2
        if e1 > e2:
            e1, e2 = e2, e1
        if e2 > e3:
            e2, e3 = e3, e2
        if e1 > e2:
            e1, e2 = e2, e1
        if q3 >= e1:
            q3 += 1
        if q3 >= e2:
            q3 += 1
        if q3 >= e3:
            q3 += 1
        use_best = floats[q, dim] < 0.5
        n_rand = int(floats[q, dim + 1] * dim)
        for j in range(dim):
            diff = scaling * (pop[q2, j] - pop[q3, j])
            if use_best:
                m = pop[q1, j] + scaling * (pop[best, j] - pop[q1, j]) + diff
            else:
                m = pop[q, j] + scaling * (pop[q1, j] - pop[q, j]) + diff
            t = m if (floats[q, j] <= crossover_rate or j == n_rand) else pop[q, j]
            if t > col_ub[j]:
                t = (pop[q, j] + col_ub[j]) / 2.0
            elif t < 0.0:
                t = pop[q, j] / 2.0
            trials[q, j] = t

    trial_u = np.empty(count)
    trial_g = np.empty(count)
    evaluate_into(trials, col_jsr, col_scale, col_ub, gid, gbm, snap,
                  fixed_u, jsr_req, tolf, trial_u, trial_g)

    # archive the strongest trials that lose on violation but win on utility
    arch = np.empty(count, dtype=np.int64)
    arch_n = 0
    for q in range(count):
        if trial_g[q] > viol[q] and trial_u[q] > util[q]:
            arch[arch_n] = q
            arch_n += 1
    if arch_n > 1:      # stable sort by utility, descending
        for i in range(1, arch_n):
            key = arch[i]
            k = i - 1
            while k >= 0 and trial_u[arch[k]] < trial_u[key]:
                arch[k + 1] = arch[k]
                k -= 1
            arch[k + 1] = key
    if arch_n > archive_cap:
        arch_n = archive_cap

    for q in range(count):
        if trial_g[q] < viol[q] or (trial_g[q] == viol[q] and trial_u[q] >= util[q]):
            for j in range(dim):
                pop[q, j] = trials[q, j]
            util[q] = trial_u[q]
            viol[q] = trial_g[q]

    if arch_n > 0:
        order = np.argsort(-util, kind="mergesort")
        part_size = (count + arch_n - 1) // arch_n
        for i in range(arch_n):
            start = i * part_size
            stop = min(start + part_size, count)
            if start >= stop:
                continue
            j = order[start]
            for k in range(start + 1, stop):
                if viol[order[k]] > viol[j]:
                    j = order[k]
            a = arch[i]
            if trial_u[a] > util[j]:
                for c in range(dim):
                    pop[j, c] = trials[a, c]
                util[j] = trial_u[a]
                viol[j] = trial_g[a]

    for q in range(count):
        if viol[q] == 0.0:
            return False
    return True
