# cython: language_level=3
"""Compiled kernels; semantics mirror pure.py expression for expression.

Keep every floating-point operation in the same order as the pure
backend: both must land on bit-identical objectives so backend choice
never changes results, only latency.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport INFINITY, floor as c_floor

cnp.import_array()

BACKEND = "compiled"


@cython.boundscheck(False)
@cython.wraparound(False)
def evaluate_plan(actions, rewards, deltas, double soc0, double lo, double hi, double end_min):
    """See pure.evaluate_plan."""
    cdef cnp.int64_t[::1] acts = np.ascontiguousarray(actions, dtype=np.int64)
    cdef double[:, ::1] rew = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef double[::1] dls = np.ascontiguousarray(deltas, dtype=np.float64)
    cdef Py_ssize_t horizon = acts.shape[0]
    cdef double soc = soc0
    cdef double obj = 0.0
    cdef long violations = 0
    cdef Py_ssize_t t
    cdef cnp.int64_t a
    for t in range(horizon):
        a = acts[t]
        soc = soc - dls[a]
        if not (lo <= soc and soc <= hi):
            violations += 1
        obj += rew[t, a]
    if soc < end_min:
        violations += 1
    return obj, violations, soc


cdef Py_ssize_t _bisect_key(cnp.int64_t[::1] keys, cnp.int64_t k) nogil:
    cdef Py_ssize_t lo_i = 0
    cdef Py_ssize_t hi_i = keys.shape[0]
    cdef Py_ssize_t mid
    while lo_i < hi_i:
        mid = (lo_i + hi_i) // 2
        if keys[mid] < k:
            lo_i = mid + 1
        else:
            hi_i = mid
    if lo_i < keys.shape[0] and keys[lo_i] == k:
        return lo_i
    return -1


@cython.boundscheck(False)
@cython.wraparound(False)
def solve_lattice(rewards, deltas, double soc0, double lo, double hi, double end_min,
                  double merge_eps=1e-9):
    """See pure.solve_lattice."""
    cdef double[:, ::1] rew = np.ascontiguousarray(rewards, dtype=np.float64)
    cdef double[::1] dls = np.ascontiguousarray(deltas, dtype=np.float64)
    cdef Py_ssize_t horizon = rew.shape[0]
    cdef double inv_eps = 1.0 / merge_eps

    levels = [np.array([soc0], dtype=np.float64)]
    keys_list = [np.array([<cnp.int64_t>c_floor(soc0 * inv_eps + 0.5)], dtype=np.int64)]
    trans_list = []

    cdef cnp.ndarray cur = levels[0]
    cdef double[::1] cur_v
    cdef double[::1] cand_v
    cdef double[::1] reps_v
    cdef cnp.int64_t[::1] keys_v
    cdef cnp.int64_t[::1] next_keys
    cdef cnp.int64_t[:, ::1] tr_v
    cdef Py_ssize_t t, i, m, r, n
    cdef int a
    cdef double s, s2
    cdef cnp.int64_t k

    for t in range(horizon):
        cur_v = levels[t]
        n = cur_v.shape[0]
        cand = np.empty(3 * n, dtype=np.float64)
        cand_v = cand
        m = 0
        for i in range(n):
            s = cur_v[i]
            for a in range(3):
                s2 = s - dls[a]
                if lo <= s2 and s2 <= hi:
                    cand_v[m] = s2
                    m += 1
        if m == 0:
            return None, -INFINITY
        cand_sorted = np.sort(cand[:m])
        cand_v = cand_sorted
        reps = np.empty(m, dtype=np.float64)
        keys = np.empty(m, dtype=np.int64)
        reps_v = reps
        keys_v = keys
        r = 0
        for i in range(m):
            k = <cnp.int64_t>c_floor(cand_v[i] * inv_eps + 0.5)
            if r == 0 or k != keys_v[r - 1]:
                reps_v[r] = cand_v[i]
                keys_v[r] = k
                r += 1
        reps = reps[:r]
        keys = keys[:r]
        next_keys = keys
        tr = np.empty((n, 3), dtype=np.int64)
        tr_v = tr
        for i in range(n):
            s = cur_v[i]
            for a in range(3):
                s2 = s - dls[a]
                if lo <= s2 and s2 <= hi:
                    k = <cnp.int64_t>c_floor(s2 * inv_eps + 0.5)
                    tr_v[i, a] = _bisect_key(next_keys, k)
                else:
                    tr_v[i, a] = -1
        trans_list.append(tr)
        levels.append(reps)
        keys_list.append(keys)

    # backward value pass; tie order idle, discharge, charge
    cdef int[3] pref
    pref[0] = 0
    pref[1] = 2
    pref[2] = 1

    cdef double[::1] last_v = levels[horizon]
    cdef Py_ssize_t n_last = last_v.shape[0]
    vals = np.empty(n_last, dtype=np.float64)
    cdef double[::1] vals_v = vals
    for i in range(n_last):
        vals_v[i] = 0.0 if last_v[i] >= end_min else -INFINITY

    choice_list = [None] * horizon
    cdef double[::1] vt_v
    cdef cnp.int64_t[::1] ct_v
    cdef double best, v
    cdef int best_a
    cdef cnp.int64_t j
    cdef Py_ssize_t idx
    for t in range(horizon - 1, -1, -1):
        cur_v = levels[t]
        n = cur_v.shape[0]
        tr_v = trans_list[t]
        vt = np.empty(n, dtype=np.float64)
        ct = np.empty(n, dtype=np.int64)
        vt_v = vt
        ct_v = ct
        for i in range(n):
            best = -INFINITY
            best_a = -1
            for idx in range(3):
                a = pref[idx]
                j = tr_v[i, a]
                if j >= 0 and vals_v[j] != -INFINITY:
                    v = rew[t, a] + vals_v[j]
                    if v > best:
                        best = v
                        best_a = a
            vt_v[i] = best
            ct_v[i] = best_a
        vals = vt
        vals_v = vals
        choice_list[t] = ct

    if vals_v[0] == -INFINITY:
        return None, -INFINITY

    cdef double objective = vals_v[0]
    actions = np.empty(horizon, dtype=np.int64)
    cdef cnp.int64_t[::1] actions_v = actions
    cdef Py_ssize_t state = 0
    for t in range(horizon):
        ct_v = choice_list[t]
        a = <int>ct_v[state]
        actions_v[t] = a
        tr_v = trans_list[t]
        state = tr_v[state, a]
    return actions, float(objective)
