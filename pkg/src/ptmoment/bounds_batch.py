"""Vectorized optimal bounds for many moment prefixes at once.

Same extremal chains as :mod:`ptmoment.bounds`, but every scalar root solve
is replaced by a vectorized bracketing solve over the whole batch.
Only bound values are returned; use the scalar module for witness spectra.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize.elementwise import find_root

_TINY = 1e-300

# a structure is a list of (value, multiplicity) array pairs


def _psum(blocks, k):
    return sum(m * v**k for v, m in blocks)


def _m3_min(s1, s2, L):
    ok = s1 > _TINY
    s1s = np.where(ok, s1, 1.0)
    q = np.clip(s2 / (s1s * s1s), 1.0 / L, 1.0)
    a = np.minimum(np.floor(1.0 / q * (1.0 + 1e-12)), L)
    full = a >= L
    a_ = np.where(full, 1.0, a)
    u = (a_ + np.sqrt(np.maximum(a_ * ((a_ + 1.0) * q - 1.0), 0.0))) / (a_ * (a_ + 1.0))
    v = np.maximum(1.0 - a_ * u, 0.0)
    u = np.where(full, 1.0 / L, u)
    v = np.where(full, 0.0, v)
    scale = np.where(ok, s1, 0.0)
    return [(scale * u, np.where(full, L, a)), (scale * v, np.where(full, 0.0, 1.0))]


def _m3_max(s1, s2, L):
    ok = s1 > _TINY
    s1s = np.where(ok, s1, 1.0)
    one = L <= 1
    Ls = np.where(one, 2.0, L)
    q = np.clip(s2 / (s1s * s1s), 1.0 / Ls, 1.0)
    r = np.sqrt(np.maximum((Ls - 1.0) * (q * Ls - 1.0), 0.0))
    u = np.where(one, 1.0, (r + 1.0) / Ls)
    w = np.where(one, 0.0, (Ls - 1.0 - r) / (Ls * (Ls - 1.0)))
    scale = np.where(ok, s1, 0.0)
    return [(scale * u, np.ones_like(u)), (scale * w, np.where(one, 0.0, L - 1.0))]


def _root(f, lo, hi, *args):
    """Root of increasing f(t, *args) on [lo, hi] elementwise, clamped to the ends."""
    lo = np.asarray(lo, dtype=float)
    hi = np.maximum(np.asarray(hi, dtype=float), lo)
    args = tuple(np.broadcast_to(a, lo.shape) for a in args)
    out = lo.copy()
    flo = f(lo, *args)
    fhi = f(hi, *args)
    at_hi = (flo < 0.0) & (fhi <= 0.0)
    out[at_hi] = hi[at_hi]
    inner = (flo < 0.0) & (fhi > 0.0) & (hi > lo)
    if inner.any():
        res = find_root(
            f,
            (lo[inner], hi[inner]),
            args=tuple(a[inner] for a in args),
            tolerances=dict(xatol=1e-300, xrtol=4 * np.finfo(float).eps, fatol=0.0, frtol=0.0),
        )
        out[inner] = res.x
    return out


def _norm(s1, *s):
    ok = s1 > _TINY
    s1s = np.where(ok, s1, 1.0)
    return ok, s1s, [sk / s1s ** (k + 2) for k, sk in enumerate(s)]


def _m4_max(s1, s2, s3, L):
    ok, s1s, (q2, q3) = _norm(s1, s2, s3)
    one = np.ones_like(q2)
    lo = _m3_min(one, q2, L)[0][0]
    hi = _m3_max(one, q2, L)[0][0]

    single = L <= 1
    t = _root(_f4max, lo, hi, q2, q3, L)
    t = np.where(single, 1.0, t)
    blocks = [(t, np.ones_like(t))] + _rest4max(t, q2, L)
    return _rescale(blocks, ok, s1s)


def _rest4max(t, q2, L):
    blocks = _m3_min(1.0 - t, q2 - t * t, np.maximum(L - 1.0, 1.0))
    return [(v, np.where(L <= 1, 0.0, m)) for v, m in blocks]


def _f4max(t, q2, q3, L):
    return t**3 + _psum(_rest4max(t, q2, L), 3) - q3


def _m4_min(s1, s2, s3, L):
    ok, s1s, (q2, q3) = _norm(s1, s2, s3)
    umax = _m3_max(np.ones_like(q2), q2, L)[1][0]

    u = _root(_f4min, np.zeros_like(umax), umax, q2, q3, L)
    return _rescale(_parts4min(u, q2, L), ok, s1s)


def _parts4min(u, q2, L):
    S1 = 1.0 - L * u
    S2 = q2 - 2.0 * u + L * u * u
    (y1, a), (y2, b) = _m3_min(S1, S2, L)
    return [(y1 + u, a), (y2 + u, b), (u, L - a - b)]


def _f4min(u, q2, q3, L):
    return _psum(_parts4min(u, q2, L), 3) - q3


def _rescale(blocks, ok, s1s):
    s = np.where(ok, s1s, 0.0)
    return [(v * s, m) for v, m in blocks]


def _m5_max(q2, q3, q4, L):
    one = np.ones_like(q2)
    lo = _m4_min(one, q2, q3, L)[0][0]
    hi = _m4_max(one, q2, q3, L)[0][0]

    t = _root(_f5max, lo, hi, q2, q3, q4, L)
    return [(t, one)] + _m4_min(1.0 - t, q2 - t * t, q3 - t**3, L - 1.0)


def _f5max(t, q2, q3, q4, L):
    return t**4 + _psum(_m4_min(1.0 - t, q2 - t * t, q3 - t**3, L - 1.0), 4) - q4


def _order3_ok(r1, r2, r3, L, slack=1e-12):
    ok = (r1 > 1e-14) & (L >= 1)
    r1s = np.where(ok, r1, 1.0)
    q = r2 / (r1s * r1s)
    ok &= (q >= 1.0 / np.maximum(L, 1) - slack) & (q <= 1.0 + slack)
    lo = _psum(_m3_min(r1s, r2, np.maximum(L, 1)), 3)
    hi = _psum(_m3_max(r1s, r2, np.maximum(L, 1)), 3)
    return ok & (r3 >= lo - slack) & (r3 <= hi + slack)


def _m5_min_at(t, q2, q3, L, eta_max):
    """Order-5 minimizer candidate at top value t (see the scalar version)."""
    chosen = None
    found = np.zeros(t.shape, dtype=bool)
    best_excess = np.full(t.shape, np.inf)
    fallback = None
    for eta in range(1, eta_max + 1):
        r1, r2, r3 = 1.0 - eta * t, q2 - eta * t * t, q3 - eta * t**3
        Lr = L - eta
        feas = _order3_ok(r1, r2, r3, Lr) & (Lr >= 1)
        if not feas.any():
            continue
        rest = _m4_max(np.maximum(r1, 0.0), np.maximum(r2, 0.0), np.maximum(r3, 0.0), np.maximum(Lr, 1.0))
        blocks = [(t, np.full_like(t, eta))] + rest
        excess = np.where(feas, rest[0][0] - t, np.inf)
        valid = feas & (excess <= 1e-12) & ~found
        if chosen is None:
            chosen = [(v.copy(), m.copy()) for v, m in blocks]
            fallback = [(v.copy(), m.copy()) for v, m in blocks]
        for (cv, cm), (v, m) in zip(chosen, blocks):
            cv[valid] = v[valid]
            cm[valid] = m[valid]
        better = feas & ~found & (excess < best_excess)
        for (fv, fm), (v, m) in zip(fallback, blocks):
            fv[better] = v[better]
            fm[better] = m[better]
        best_excess = np.where(better, excess, best_excess)
        found |= valid
        if found.all():
            break
    if chosen is None:
        raise RuntimeError("no admissible block size for the order-5 minimizer")
    for (cv, cm), (fv, fm) in zip(chosen, fallback):
        cv[~found] = fv[~found]
        cm[~found] = fm[~found]
    return chosen


def _m5_min(q2, q3, q4, L):
    one = np.ones_like(q2)
    lo = _m4_min(one, q2, q3, L)[0][0]
    hi = _m4_max(one, q2, q3, L)[0][0]
    t = _root(_f5min, lo, hi, q2, q3, q4, L)
    return _m5_min_at(t, q2, q3, L, int(np.max(L)) - 1)


def _f5min(t, q2, q3, q4, L):
    if t.size == 0:
        return t
    return _psum(_m5_min_at(t, q2, q3, L, int(np.max(L)) - 1), 4) - q4


def p3_min_batch(p2, d):
    p2 = np.asarray(p2, dtype=float)
    L = np.broadcast_to(np.asarray(d, dtype=float), p2.shape)
    return _psum(_m3_min(np.ones_like(p2), p2, L), 3)


def p4_bounds_batch(p2, p3, d):
    """(p4_min, p4_max) for arrays of feasible (p2, p3); inputs are clamped into range."""
    p2 = np.asarray(p2, dtype=float)
    L = np.broadcast_to(np.asarray(d, dtype=float), p2.shape).copy()
    p2 = np.clip(p2, 1.0 / L, 1.0)
    one = np.ones_like(p2)
    p3 = np.clip(p3, _psum(_m3_min(one, p2, L), 3), _psum(_m3_max(one, p2, L), 3))
    return _psum(_m4_min(one, p2, p3, L), 4), _psum(_m4_max(one, p2, p3, L), 4)


def p5_bounds_batch(p2, p3, p4, d):
    """(p5_min, p5_max) for arrays of order-4 feasible prefixes."""
    p2 = np.asarray(p2, dtype=float)
    L = np.broadcast_to(np.asarray(d, dtype=float), p2.shape).copy()
    p2 = np.clip(p2, 1.0 / L, 1.0)
    one = np.ones_like(p2)
    p3 = np.clip(p3, _psum(_m3_min(one, p2, L), 3), _psum(_m3_max(one, p2, L), 3))
    p4 = np.clip(p4, _psum(_m4_min(one, p2, p3, L), 4), _psum(_m4_max(one, p2, p3, L), 4))
    lo = _psum(_m5_min(p2, p3, p4, L), 5)
    hi = _psum(_m5_max(p2, p3, p4, L), 5)
    return lo, hi
