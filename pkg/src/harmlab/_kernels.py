"""Compiled inner loops over the family of all grid intervals.

Each routine visits every interval ``[a, b]`` (inclusive cell indices) once.
For a fixed left end ``a`` the per-interval quantity is turned into a
per-cell sup with a suffix maximum over ``b``: cell ``k >= a`` lies in
``[a, b]`` exactly when ``b >= k``.
"""

import math

import numba
import numpy as np

# Young function codes shared with orlicz.py
POWER, LLOGL, EXPL = 0, 1, 2


@numba.njit(cache=True)
def _spread(out, osc_by_end, a, n):
    best = -1.0
    for b in range(n - 1, a - 1, -1):
        if osc_by_end[b] > best:
            best = osc_by_end[b]
        osc_by_end[b] = best
    for k in range(a, n):
        if osc_by_end[k] > out[k]:
            out[k] = osc_by_end[k]


@numba.njit(cache=True)
def max_average(a):
    """Per-cell sup of interval means of ``a`` (``a >= 0``)."""
    n = a.size
    out = np.zeros(n)
    col = np.empty(n)
    for s in range(n):
        # running sums, not prefix differences, which cancel to 0 on tiny tails
        run = 0.0
        for e in range(s, n):
            run += a[e]
            col[e] = run / (e + 1 - s)
        _spread(out, col, s, n)
    return out


@numba.njit(cache=True)
def _fen_add(tree, i, v):
    i += 1
    while i < tree.size:
        tree[i] += v
        i += i & (-i)


@numba.njit(cache=True)
def _fen_sum(tree, i):
    # sum over ranks < i
    s = 0.0
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@numba.njit(cache=True)
def max_oscillation(f):
    """Per-cell sup of ``mean |f - f_Q|`` over intervals ``Q``, plus the
    overall max and its interval ``[best_s, best_e]``.

    Uses ``sum |f - m| = 2 * (sum_{f > m} f - m * #{f > m})`` when ``m`` is
    the mean, with Fenwick trees over value ranks for the two partial sums.
    """
    n = f.size
    order = np.argsort(f, kind="mergesort")
    sorted_vals = f[order]
    rank = np.empty(n, dtype=np.int64)
    for r in range(n):
        rank[order[r]] = r
    cnt = np.zeros(n + 1)
    tot = np.zeros(n + 1)
    out = np.zeros(n)
    col = np.empty(n)
    best, best_s, best_e = 0.0, 0, 0
    for s in range(n):
        cnt[:] = 0.0
        tot[:] = 0.0
        run = 0.0
        seen = 0.0
        for e in range(s, n):
            _fen_add(cnt, rank[e], 1.0)
            _fen_add(tot, rank[e], f[e])
            run += f[e]
            seen += 1.0
            m = run / seen
            cut = np.searchsorted(sorted_vals, m, side="right")
            above_cnt = seen - _fen_sum(cnt, cut)
            above_tot = run - _fen_sum(tot, cut)
            v = 2.0 * (above_tot - m * above_cnt) / seen
            col[e] = v if v > 0.0 else 0.0
            if col[e] > best:
                best, best_s, best_e = col[e], s, e
        _spread(out, col, s, n)
    return out, best, best_s, best_e


@numba.njit(cache=True)
def max_ap_product(w, p):
    """Sup over intervals of ``avg(w) * avg(w^(1-p'))^(p-1)``."""
    n = w.size
    e = 1.0 / (1.0 - p)  # 1 - p'
    pw = np.zeros(n + 1)
    pd = np.zeros(n + 1)
    for i in range(n):
        pw[i + 1] = pw[i] + w[i]
        pd[i + 1] = pd[i] + w[i] ** e
    best = 0.0
    for s in range(n):
        for t in range(s, n):
            k = t + 1 - s
            v = (pw[t + 1] - pw[s]) / k * ((pd[t + 1] - pd[s]) / k) ** (p - 1.0)
            if v > best:
                best = v
    return best


@numba.njit(cache=True)
def young(kind, par, t):
    if kind == POWER:
        return t ** par
    if kind == LLOGL:
        if t <= 1.0:
            return t
        return t * (1.0 + math.log(t)) ** par
    return math.expm1(t)


@numba.njit(cache=True)
def young_slope(kind, par, t):
    if kind == POWER:
        return par * t ** (par - 1.0) if t > 0.0 else (1.0 if par == 1.0 else 0.0)
    if kind == LLOGL:
        if t <= 1.0:
            return 1.0
        g = 1.0 + math.log(t)
        return g ** par + par * g ** (par - 1.0)
    return math.exp(t)


@numba.njit(cache=True)
def young_inv(kind, par, s):
    if kind == POWER:
        return s ** (1.0 / par)
    if kind == EXPL:
        return math.log1p(s)
    if s <= 1.0:
        return s
    lo, hi = 1.0, max(s, 2.0)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if young(kind, par, mid) < s:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return hi


@numba.njit(cache=True)
def lux_newton(vals, s, e, kind, par, lo):
    """Luxemburg norm of ``vals[s:e]`` (non-negative) from a lower bound ``lo``.

    ``lam -> sum B(v/lam)`` is convex and decreasing, so Newton started
    below the root climbs monotonically to it.
    """
    k = e - s
    lam = max(lo, 1e-300)
    for _ in range(100):
        F = -float(k)
        dF = 0.0
        for i in range(s, e):
            u = vals[i] / lam
            F += young(kind, par, u)
            dF -= young_slope(kind, par, u) * u / lam
        if F <= 0.0 or dF == 0.0:
            return lam
        step = F / dF
        nxt = lam - step
        if nxt <= lam * (1.0 + 1e-15):
            return lam
        lam = nxt
    return lam


@numba.njit(cache=True)
def _young_inv_table(kind, par, n):
    inv = np.empty(n + 1)
    inv[0] = 0.0
    for k in range(1, n + 1):
        inv[k] = young_inv(kind, par, float(k))
    return inv


@numba.njit(cache=True)
def _norm_ceiling(kind, par, top, avg):
    """Cheap upper bound for the Luxemburg norm of values in ``[0, top]`` with mean ``avg``.

    Convexity gives ``B(v/lam) <= (v/top) B(top/lam)``, so any ``lam`` with
    ``B(top/lam) <= top/avg`` is feasible; below, ``B^{-1}`` is replaced by
    a lower estimate with a closed form.
    """
    if avg <= 0.0:
        return np.inf
    y = top / avg
    if kind == POWER:
        return top / y ** (1.0 / par)
    if kind == LLOGL:
        if y <= 1.0:
            return top
        return avg * (1.0 + math.log(y)) ** par
    return top / math.log1p(y)


@numba.njit(cache=True)
def max_luxemburg(a, kind, par):
    """Per-cell sup of the Luxemburg norm of ``a >= 0`` over intervals.

    Intervals whose cheap ceiling cannot raise any of their cells above the
    running answer are skipped; the running answer starts from the Jensen
    lower bound ``M a / B^{-1}(1)``.
    """
    n = a.size
    inv = _young_inv_table(kind, par, n)
    out = max_average(a) / inv[1]
    # one large value alone: ||a||_{B,Q} >= a_j / B^{-1}(|Q|)
    for j in range(n):
        if a[j] == 0.0:
            continue
        for i in range(n):
            v = a[j] / inv[abs(i - j) + 1]
            if v > out[i]:
                out[i] = v
    col = np.empty(n)
    for s in range(n):
        top = 0.0
        run = 0.0
        floor = np.inf
        for e in range(s, n):
            run += a[e]
            if a[e] > top:
                top = a[e]
            if out[e] < floor:
                floor = out[e]
            col[e] = 0.0
            if top == 0.0:
                continue
            k = e + 1 - s
            avg = run / k
            if _norm_ceiling(kind, par, top, avg) <= floor:
                continue
            # Jensen and the single largest term both bound the root from below
            lo = max(avg / inv[1], top / inv[k])
            col[e] = lux_newton(a, s, e + 1, kind, par, lo)
        _spread(out, col, s, n)
    return out


@numba.njit(cache=True)
def _centered_norm(b, s, e, dev, inv, kind, par):
    k = e - s
    m = 0.0
    for i in range(s, e):
        m += b[i]
    m /= k
    top = 0.0
    tot = 0.0
    for i in range(s, e):
        d = abs(b[i] - m)
        dev[i] = d
        tot += d
        if d > top:
            top = d
    if top == 0.0:
        return 0.0
    return lux_newton(dev, s, e, kind, par, max(tot / k / inv[1], top / inv[k]))


@numba.njit(cache=True)
def max_centered_luxemburg(b, kind, par):
    """Sup over intervals of the Luxemburg norm of ``|b - b_Q|`` on ``Q``."""
    n = b.size
    inv = _young_inv_table(kind, par, n)
    dev = np.empty(n)
    # seed with half-overlapping dyadic blocks so the pruning below bites early
    best = 0.0
    size = 2
    while size <= n:
        for s in range(0, n - size + 1, size // 2):
            v = _centered_norm(b, s, s + size, dev, inv, kind, par)
            if v > best:
                best = v
        size *= 2
    for s in range(n):
        hi_b = b[s]
        lo_b = b[s]
        run = b[s]
        for e in range(s + 1, n):
            hi_b = max(hi_b, b[e])
            lo_b = min(lo_b, b[e])
            run += b[e]
            k = e + 1 - s
            m = run / k
            top = max(hi_b - m, m - lo_b)
            # every deviation is at most top, so top/B^{-1}(1) caps the norm
            if top == 0.0 or top / inv[1] <= best:
                continue
            tot = 0.0
            for i in range(s, e + 1):
                d = abs(b[i] - m)
                dev[i] = d
                tot += d
            if _norm_ceiling(kind, par, top, tot / k) <= best:
                continue
            lo = max(tot / k / inv[1], top / inv[k])
            v = lux_newton(dev, s, e + 1, kind, par, lo)
            if v > best:
                best = v
    return best


@numba.njit(cache=True)
def dense_apply(mat, f):
    """``mat @ f`` summed in ascending column order."""
    n = f.size
    out = np.zeros(mat.shape[0])
    for i in range(mat.shape[0]):
        acc = 0.0
        for j in range(n):
            acc += mat[i, j] * f[j]
        out[i] = acc
    return out


@numba.njit(cache=True)
def dense_commutator(mat, b, f):
    """``sum_j (b_i - b_j) mat_ij f_j`` in ascending column order."""
    n = f.size
    out = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += (b[i] - b[j]) * mat[i, j] * f[j]
        out[i] = acc
    return out
