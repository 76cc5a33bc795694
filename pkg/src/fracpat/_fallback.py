"""Numpy implementations of the inner loops in ``_kernels.pyx``.

Same signatures and semantics; used when the compiled extension is absent
or when ``FRACPAT_PURE_PYTHON=1``.
"""
import numpy as np

_CHUNK = 1 << 21


def cell_sum(w, step, xi):
    w = np.ascontiguousarray(w, dtype=float)
    xi = np.ascontiguousarray(xi, dtype=float)
    n = w.shape[0]
    out = np.empty(xi.shape[0], dtype=complex)
    j = np.arange(n, dtype=float)
    rows = max(1, _CHUNK // max(n, 1))
    for start in range(0, xi.shape[0], rows):
        frac = step * xi[start:start + rows]
        frac = frac - np.floor(frac)
        phase = np.exp(-2j * np.pi * np.outer(frac, j))
        out[start:start + rows] = phase @ w
    return out


def spline_eval(v, mm, x0, h, y):
    """Evaluate stacked natural cubic splines at ``y``; rows of ``v`` are functions."""
    v = np.atleast_2d(v)
    mm = np.atleast_2d(mm)
    n = v.shape[1]
    y = np.asarray(y, dtype=float)
    u = (y - x0) / h
    inside = (u >= 0.0) & (u <= n - 1)
    i = np.clip(np.floor(u).astype(np.int64), 0, n - 2)
    tau = u - i
    A = 1.0 - tau
    B = tau
    out = (A * v[:, i] + B * v[:, i + 1]
           + ((A ** 3 - A) * mm[:, i] + (B ** 3 - B) * mm[:, i + 1]) * h * h / 6.0)
    return np.where(inside, out, 0.0)


def trilinear_sums(fv, fm, fx0, fh, gv, gm, gx0, gh, xs, wx, ts, wt, p, q):
    fv = np.atleast_2d(fv)
    gv = np.atleast_2d(gv)
    K, L = fv.shape[0], gv.shape[0]
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    out = np.zeros((K, L))
    rows = max(1, _CHUNK // max(ts.shape[0], 1) // max(K, L))
    shift = p * ts * ts + q * ts
    for start in range(0, xs.shape[0], rows):
        x = xs[start:start + rows, None]
        fvals = spline_eval(fv, fm, fx0, fh, x + ts)          # (K, nx, nt)
        gvals = spline_eval(gv, gm, gx0, gh, x + shift)       # (L, nx, nt)
        weighted = fvals * wt
        inner = np.einsum("axt,bxt->xab", weighted, gvals)
        out += np.einsum("x,xab->ab", wx[start:start + rows], inner)
    return out


def _member(mask, z, cell, tol):
    n = mask.shape[0]
    u = z / cell
    r = np.floor(u + 0.5)
    on_edge = np.abs(u - r) <= tol
    c = np.floor(u).astype(np.int64)
    ok = (c >= 0) & (c < n)
    res = np.zeros(u.shape, dtype=bool)
    res[ok] = mask[c[ok]].astype(bool)
    rr = r.astype(np.int64)
    left = on_edge & (rr - 1 >= 0) & (rr - 1 < n)
    res[left] |= mask[rr[left] - 1].astype(bool)
    right = on_edge & (rr >= 0) & (rr < n)
    res[right] |= mask[rr[right]].astype(bool)
    res &= (u >= -tol) & (u <= n + tol)
    return res


def pattern_scan(mask, kept, kmin, kmax, p, q, cell, require_distinct, tol):
    mask = np.asarray(mask, dtype=np.uint8)
    n = mask.shape[0]
    if kmax < kmin:
        return (-1, -1)
    k = np.arange(kmin, kmax + 1, dtype=np.int64)
    t = k * cell
    pt = p * t * t + q * t
    k_ok = np.ones(k.shape, dtype=bool)
    if require_distinct:
        k_ok = (np.abs(pt - t) > tol * cell) & (np.abs(pt) > tol * cell)
    for i in np.asarray(kept, dtype=np.int64):
        j = i + k
        valid = k_ok & (j < n)
        if not valid.any():
            continue
        valid[valid] &= mask[j[valid]].astype(bool)
        if not valid.any():
            continue
        x = (i + 0.5) * cell
        hit = np.zeros(k.shape, dtype=bool)
        hit[valid] = _member(mask, x + pt[valid], cell, tol)
        idx = np.flatnonzero(hit)
        if idx.size:
            return (int(i), int(k[idx[0]]))
    return (-1, -1)
