# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled successive cancellation list pass.

Mirrors _kernel_py.scl_pass: same tree layout, same decision order, same
(metric, parent rank, branch bit) tie-breaking, same floating-point operation
order. Metrics can differ from the fallback by ~1 ulp where numpy's vectorized
exp/log1p round differently from libm.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport exp, fabs, log1p, isinf
from libc.string cimport memcpy

from ..errors import MetricUnderflow

cnp.import_array()

DEF MODE_MAX = 0
DEF MODE_SAMPLE = 1


cdef inline double _softplus(double x) noexcept nogil:
    if x > 0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


cdef inline double _boxplus(double a, double b) noexcept nogil:
    cdef double sa = 1.0 if a > 0 else (-1.0 if a < 0 else 0.0)
    cdef double sb = 1.0 if b > 0 else (-1.0 if b < 0 else 0.0)
    cdef double sign = sa * sb
    cdef double mag = fabs(a)
    cdef double fb = fabs(b)
    if fb < mag:
        mag = fb
    if isinf(a) or isinf(b):
        return sign * mag
    cdef double s = fabs(a) + fabs(b)
    cdef double d = fabs(fabs(a) - fabs(b))
    return sign * (mag + log1p(exp(-s)) - log1p(exp(-d)))


cdef inline double _gstep(double lo, double hi, signed char beta) noexcept nogil:
    cdef double term = lo if beta == 0 else -lo
    if isinf(term) and isinf(hi) and ((term > 0) != (hi > 0)):
        return 0.0
    return hi + term


cdef void _merge_sort(long* idx, long* tmp, Py_ssize_t count,
                      double* pm, long* parent, signed char* bit) noexcept nogil:
    cdef Py_ssize_t width = 1, lo, mid, hi, i, j, k
    cdef bint take_left
    while width < count:
        lo = 0
        while lo < count:
            mid = lo + width
            if mid > count:
                mid = count
            hi = lo + 2 * width
            if hi > count:
                hi = count
            i = lo
            j = mid
            k = lo
            while i < mid or j < hi:
                if i >= mid:
                    take_left = False
                elif j >= hi:
                    take_left = True
                elif pm[idx[i]] < pm[idx[j]]:
                    take_left = True
                elif pm[idx[i]] > pm[idx[j]]:
                    take_left = False
                elif parent[idx[i]] < parent[idx[j]]:
                    take_left = True
                elif parent[idx[i]] > parent[idx[j]]:
                    take_left = False
                else:
                    take_left = bit[idx[i]] <= bit[idx[j]]
                if take_left:
                    tmp[k] = idx[i]
                    i += 1
                else:
                    tmp[k] = idx[j]
                    j += 1
                k += 1
            lo += 2 * width
        memcpy(idx, tmp, count * sizeof(long))
        width *= 2


def scl_pass(double[:, ::1] channel_llrs, double[::1] prior_metrics,
             signed char[::1] fixed, int list_size, int mode, rand=None):
    cdef Py_ssize_t p0 = channel_llrs.shape[0]
    cdef Py_ssize_t n = channel_llrs.shape[1]
    cdef int m = 0
    while (1 << m) < n:
        m += 1
    if (1 << m) != n:
        raise ValueError("block length must be a power of two")
    if prior_metrics.shape[0] != p0:
        raise ValueError("one prior metric per incoming path required")
    cdef Py_ssize_t cap = list_size if list_size > p0 else p0

    tree_a = np.zeros((cap, 2 * n - 1), dtype=np.float64)
    tree_b = np.zeros((cap, 2 * n - 1), dtype=np.float64)
    bs_a = np.zeros((cap, n - 1 if n > 1 else 1), dtype=np.int8)
    bs_b = np.zeros_like(bs_a)
    u_a = np.zeros((cap, n), dtype=np.int8)
    u_b = np.zeros_like(u_a)
    pm_a = np.zeros(cap, dtype=np.float64)
    pm_b = np.zeros(cap, dtype=np.float64)
    org_a = np.zeros(cap, dtype=np.int64)
    org_b = np.zeros(cap, dtype=np.int64)

    cdef double[:, ::1] tree = tree_a, tree2 = tree_b
    cdef signed char[:, ::1] bsum = bs_a, bsum2 = bs_b
    cdef signed char[:, ::1] uu = u_a, uu2 = u_b
    cdef double[::1] pm = pm_a, pm2 = pm_b
    cdef long[::1] origin = org_a, origin2 = org_b

    cand_pm_arr = np.zeros(2 * cap, dtype=np.float64)
    cand_par_arr = np.zeros(2 * cap, dtype=np.int64)
    cand_bit_arr = np.zeros(2 * cap, dtype=np.int8)
    idx_arr = np.zeros(2 * cap, dtype=np.int64)
    tmp_arr = np.zeros(2 * cap, dtype=np.int64)
    cur_arr = np.zeros(n, dtype=np.int8)
    cdef double[::1] cand_pm = cand_pm_arr
    cdef long[::1] cand_par = cand_par_arr
    cdef signed char[::1] cand_bit = cand_bit_arr
    cdef long[::1] idx = idx_arr, tmp = tmp_arr
    cdef signed char[::1] cur = cur_arr

    cdef double[:, ::1] rnd
    cdef bint have_rnd = rand is not None
    if have_rnd:
        rnd = np.ascontiguousarray(rand, dtype=np.float64)

    cdef Py_ssize_t p, j, phi, lev, low, width, b1, b2, sz, ncand, nkeep, src
    cdef Py_ssize_t t
    cdef double lam, pz
    cdef int v
    cdef signed char bitv

    for p in range(p0):
        for j in range(n):
            tree[p, n - 1 + j] = channel_llrs[p, j]
        pm[p] = prior_metrics[p]
        origin[p] = p
    cdef Py_ssize_t npaths = p0

    for phi in range(n):
        # LLR propagation down to the decision slot
        if phi == 0:
            low = m
        else:
            low = 0
            while not ((phi >> low) & 1):
                low += 1
            b1 = (1 << low) - 1          # target level base
            b2 = (1 << (low + 1)) - 1    # parent level base
            sz = 1 << low
            for p in range(npaths):
                for j in range(sz):
                    tree[p, b1 + j] = _gstep(
                        tree[p, b2 + j], tree[p, b2 + sz + j], bsum[p, b1 + j]
                    )
        for lev in range(low - 1, -1, -1):
            b1 = (1 << lev) - 1
            b2 = (1 << (lev + 1)) - 1
            sz = 1 << lev
            for p in range(npaths):
                for j in range(sz):
                    tree[p, b1 + j] = _boxplus(tree[p, b2 + j], tree[p, b2 + sz + j])

        # decide / branch
        if fixed[phi] >= 0:
            v = fixed[phi]
            for p in range(npaths):
                lam = tree[p, 0]
                uu[p, phi] = <signed char> v
                pm[p] = pm[p] + _softplus((2 * v - 1) * lam)
        elif mode == MODE_SAMPLE:
            for p in range(npaths):
                lam = tree[p, 0]
                pz = 1.0 / (1.0 + exp(-lam))
                bitv = 1 if rnd[origin[p], phi] >= pz else 0
                uu[p, phi] = bitv
                pm[p] = pm[p] + _softplus((2 * bitv - 1.0) * lam)
        else:
            ncand = 2 * npaths
            for p in range(npaths):
                lam = tree[p, 0]
                cand_pm[p] = pm[p] + _softplus(-lam)
                cand_par[p] = p
                cand_bit[p] = 0
                cand_pm[npaths + p] = pm[p] + _softplus(lam)
                cand_par[npaths + p] = p
                cand_bit[npaths + p] = 1
            for j in range(ncand):
                idx[j] = j
            _merge_sort(&idx[0], &tmp[0], ncand, &cand_pm[0], &cand_par[0], &cand_bit[0])
            nkeep = list_size if list_size < ncand else ncand
            for j in range(nkeep):
                src = cand_par[idx[j]]
                memcpy(&tree2[j, 0], &tree[src, 0], (2 * n - 1) * sizeof(double))
                memcpy(&bsum2[j, 0], &bsum[src, 0], (n - 1 if n > 1 else 1))
                memcpy(&uu2[j, 0], &uu[src, 0], n)
                uu2[j, phi] = cand_bit[idx[j]]
                pm2[j] = cand_pm[idx[j]]
                origin2[j] = origin[src]
            tree, tree2 = tree2, tree
            bsum, bsum2 = bsum2, bsum
            uu, uu2 = uu2, uu
            pm, pm2 = pm2, pm
            origin, origin2 = origin2, origin
            npaths = nkeep

        # partial-sum propagation
        for p in range(npaths):
            lev = 0
            t = phi
            sz = 1
            cur[0] = uu[p, phi]
            while (t & 1) and lev < m:
                b1 = (1 << lev) - 1
                for j in range(sz):
                    cur[sz + j] = cur[j]            # right half keeps cur
                    cur[j] = bsum[p, b1 + j] ^ cur[j]
                lev += 1
                t >>= 1
                sz <<= 1
            if lev < m:
                b1 = (1 << lev) - 1
                for j in range(sz):
                    bsum[p, b1 + j] = cur[j]

    cdef bint any_finite = False
    for p in range(npaths):
        if pm[p] - pm[p] == 0.0:  # finite check
            any_finite = True
            break
    if not any_finite:
        raise MetricUnderflow("all list paths have infinite penalty")

    pm_out = np.asarray(pm[:npaths]).copy()
    rank_out = np.arange(npaths)
    final = np.lexsort((rank_out, pm_out))
    u_np = np.asarray(uu[:npaths, :]).copy()
    org_np = np.asarray(origin[:npaths]).copy()
    return (
        u_np[final],
        pm_out[final],
        org_np[final].astype(np.int32),
    )
