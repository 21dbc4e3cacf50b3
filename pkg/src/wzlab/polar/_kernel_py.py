"""Pure-numpy successive cancellation list pass (fallback for the compiled core).

Per-path state uses the classic compact layout: a \"2n-1\" LLR tree holding one
active node per tree level (level 0 is the decision slot, level m the channel)
and an \"n-1\" partial-sum tree for pending left-child bits. Positions are in
natural u-order; codewords follow x = u F^{(x)m} with no bit-reversal.

Path ordering is canonical: after every pruning step paths are kept sorted by
(metric, parent rank, branch bit). The compiled kernel implements the same
operation order; metrics agree to ~1 ulp (numpy's vectorized transcendentals
differ from libm at the last bit), and orderings agree away from such ties.
"""

import numpy as np

from ..errors import MetricUnderflow

MODE_MAX = 0
MODE_SAMPLE = 1


def _softplus(x):
    with np.errstate(over="ignore"):
        return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def _boxplus(a, b):
    sign = np.sign(a) * np.sign(b)
    mag = np.minimum(np.abs(a), np.abs(b))
    hard = sign * mag
    with np.errstate(over="ignore", invalid="ignore"):
        s = np.abs(a) + np.abs(b)
        d = np.abs(np.abs(a) - np.abs(b))
        soft = sign * (mag + np.log1p(np.exp(-s)) - np.log1p(np.exp(-d)))
    return np.where(np.isinf(a) | np.isinf(b), hard, soft)


def _gstep(a, b, beta):
    term = (1.0 - 2.0 * beta) * a
    with np.errstate(invalid="ignore"):
        out = b + term
    conflict = np.isinf(term) & np.isinf(b) & ((term > 0) != (b > 0))
    return np.where(conflict, 0.0, out)


def scl_pass(channel_llrs, prior_metrics, fixed, list_size, mode, rand=None):
    """Run one list pass over all n positions.

    channel_llrs: (P0, n) float64, one row per incoming path.
    prior_metrics: (P0,) accumulated penalties (lower is better).
    fixed: (n,) int8; -1 marks a free position, 0/1 a forced bit value.
    rand: (P0, n) uniforms, consumed at free positions in sample mode.

    Returns (u (P, n) int8, metrics (P,), origins (P,) int32) where origins
    index the incoming rows each surviving path descends from.
    """
    llrs_in = np.atleast_2d(np.asarray(channel_llrs, dtype=float))
    p0, n = llrs_in.shape
    m = n.bit_length() - 1
    if (1 << m) != n:
        raise ValueError("block length must be a power of two")
    fixed = np.asarray(fixed, dtype=np.int8)

    tree = np.zeros((p0, 2 * n - 1), dtype=float)
    tree[:, n - 1 :] = llrs_in
    bsum = np.zeros((p0, max(n - 1, 1)), dtype=np.int8)
    u = np.zeros((p0, n), dtype=np.int8)
    pm = np.asarray(prior_metrics, dtype=float).copy()
    origin = np.arange(p0, dtype=np.int32)
    rank = np.arange(p0, dtype=np.int64)  # stable identity for tie-breaking

    base = [(1 << lev) - 1 for lev in range(m + 1)]

    def f_down(lev):
        lo = tree[:, base[lev + 1] : base[lev + 1] + (1 << lev)]
        hi = tree[:, base[lev + 1] + (1 << lev) : base[lev + 1] + (2 << lev)]
        tree[:, base[lev] : base[lev] + (1 << lev)] = _boxplus(lo, hi)

    def g_down(lev):
        lo = tree[:, base[lev + 1] : base[lev + 1] + (1 << lev)]
        hi = tree[:, base[lev + 1] + (1 << lev) : base[lev + 1] + (2 << lev)]
        beta = bsum[:, base[lev] : base[lev] + (1 << lev)].astype(float)
        tree[:, base[lev] : base[lev] + (1 << lev)] = _gstep(lo, hi, beta)

    for phi in range(n):
        if phi == 0:
            for lev in range(m - 1, -1, -1):
                f_down(lev)
        else:
            low = (phi & -phi).bit_length() - 1
            g_down(low)
            for lev in range(low - 1, -1, -1):
                f_down(lev)

        lam = tree[:, 0]
        if fixed[phi] >= 0:
            v = int(fixed[phi])
            u[:, phi] = v
            pm = pm + _softplus((2 * v - 1) * lam)
        elif mode == MODE_SAMPLE:
            with np.errstate(over="ignore"):
                p_zero = 1.0 / (1.0 + np.exp(-lam))
            bits = (rand[origin, phi] >= p_zero).astype(np.int8)
            u[:, phi] = bits
            pm = pm + _softplus((2 * bits - 1.0) * lam)
        else:
            pm0 = pm + _softplus(-lam)
            pm1 = pm + _softplus(lam)
            cand_pm = np.concatenate([pm0, pm1])
            cand_parent = np.concatenate([rank, rank])
            cand_bit = np.repeat(np.array([0, 1], dtype=np.int8), pm.size)
            order = np.lexsort((cand_bit, cand_parent, cand_pm))
            keep = order[: min(list_size, order.size)]
            parent_row = np.where(keep < pm.size, keep, keep - pm.size)
            tree = tree[parent_row]
            bsum = bsum[parent_row]
            u = u[parent_row]
            origin = origin[parent_row]
            pm = cand_pm[keep]
            u[:, phi] = cand_bit[keep]
            rank = np.arange(pm.size, dtype=np.int64)

        cur = u[:, phi : phi + 1].copy()
        lev = 0
        t = phi
        while (t & 1) and lev < m:
            left = bsum[:, base[lev] : base[lev] + (1 << lev)]
            cur = np.concatenate([left ^ cur, cur], axis=1)
            lev += 1
            t >>= 1
        if lev < m:
            bsum[:, base[lev] : base[lev] + (1 << lev)] = cur

    if not np.isfinite(pm).any():
        raise MetricUnderflow("all list paths have infinite penalty")
    final = np.lexsort((rank, pm))
    return u[final], pm[final], origin[final]
