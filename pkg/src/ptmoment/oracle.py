"""Brute-force reference for the optimal moment bounds (small d only).

Extremal spectra have at most n-1 distinct nonzero entries, so the oracle
enumerates every multiplicity pattern (an ordered composition of at most d
slots into at most four groups, the remaining slots being zero), solves the power-sum
system for each pattern from many starting points with a damped
Gauss-Newton (Levenberg-Marquardt) iteration, keeps the nonnegative
solutions and extremizes. It shares no code with :mod:`ptmoment.bounds`.

``local_search`` is a second, cruder check: SLSQP from random points of the
simplex.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .errors import InfeasibleMomentsError, UnsupportedOrderError
from .moments import MomentVector

MAX_DIM = 8
_STARTS = 16
_ITERS = 80
# near-degenerate prefixes (close eigenvalues) converge slowly; retry with more effort
_ESCALATION = ((_STARTS, _ITERS), (64, 400))
_RES_TOL = 1e-11


@lru_cache(maxsize=None)
def _compositions(total: int, parts: int) -> tuple[tuple[int, ...], ...]:
    """Ordered ways to write `total` as `parts` positive integers."""
    if parts == 1:
        return ((total,),) if total >= 1 else ()
    out = []
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def patterns(d: int, max_groups: int) -> tuple[tuple[int, ...], ...]:
    """Multiplicities of the distinct nonzero values, largest value first.

    At most `max_groups` groups occupying at most d slots; the remaining
    slots hold zeros.
    """
    out = []
    for used in range(1, d + 1):
        for g in range(1, max_groups + 1):
            out.extend(_compositions(used, g))
    return tuple(out)


def _lm_batch(weights: np.ndarray, y: np.ndarray, targets: np.ndarray, iters: int = _ITERS) -> tuple[np.ndarray, np.ndarray]:
    """Damped Gauss-Newton on sum_j w_j y_j^k = p_k, k = 1..K, for a batch of systems."""
    K = len(targets)
    ks = np.arange(1, K + 1, dtype=float)
    row_scale = 1.0 / np.maximum(np.abs(targets), 1e-3)

    def resid(y):
        pw = y[:, None, :] ** ks[None, :, None]
        return ((weights[:, None, :] * pw).sum(-1) - targets) * row_scale

    def jac(y):
        pw = y[:, None, :] ** (ks[None, :, None] - 1.0)
        return ks[None, :, None] * weights[:, None, :] * pw * row_scale[None, :, None]

    g = y.shape[1]
    mu = np.full(len(y), 1e-3)
    F = resid(y)
    cost = np.sum(F * F, axis=1)
    eye = np.eye(g)
    for _ in range(iters):
        J = jac(y)
        JtJ = np.einsum("bki,bkj->bij", J, J)
        Jtf = np.einsum("bki,bk->bi", J, F)
        A = JtJ + mu[:, None, None] * (eye * np.maximum(np.diagonal(JtJ, axis1=1, axis2=2), 1e-12)[:, None, :] + 1e-14 * eye)
        try:
            step = np.linalg.solve(A, -Jtf[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.zeros_like(y)
            for i in range(len(y)):
                step[i] = np.linalg.lstsq(A[i], -Jtf[i], rcond=None)[0]
        y_new = y + step
        F_new = resid(y_new)
        cost_new = np.sum(F_new * F_new, axis=1)
        good = np.isfinite(cost_new) & (cost_new < cost)
        y = np.where(good[:, None], y_new, y)
        F = np.where(good[:, None], F_new, F)
        cost = np.where(good, cost_new, cost)
        mu = np.where(good, np.maximum(mu * 0.2, 1e-15), np.minimum(mu * 10.0, 1e12))
        if np.all(cost < 1e-30):
            break
    return y, F / row_scale


def _candidates(p: np.ndarray, n: int, d: int, seed: int, starts: int = _STARTS, iters: int = _ITERS) -> list[np.ndarray]:
    targets = p[1:n]
    K = n - 1
    rng = np.random.default_rng(seed)
    sols: list[np.ndarray] = []
    by_size: dict[int, list[tuple[int, ...]]] = {}
    for pat in patterns(d, min(K, 4)):
        by_size.setdefault(len(pat), []).append(pat)
    for g, pats in by_size.items():
        W = np.repeat(np.array(pats, dtype=float), starts, axis=0)
        # descending random starts, matching the pattern's value ordering
        Y = -np.sort(-rng.dirichlet(np.ones(g), size=len(W)), axis=1)
        Y[::starts] = np.linspace(2.0, 0.5, g)
        Y = Y / np.sum(W * Y, axis=1, keepdims=True)
        Y, F = _lm_batch(W, Y, targets, iters)
        ok = np.all(np.abs(F) <= _RES_TOL, axis=1) & np.all(Y >= -1e-10, axis=1)
        ok &= np.all(np.diff(Y, axis=1) <= 1e-9, axis=1)
        for w, y in zip(W[ok], Y[ok]):
            x = np.repeat(np.maximum(y, 0.0), w.astype(int))
            sols.append(np.concatenate([np.sort(x)[::-1], np.zeros(d - len(x))]))
    return sols


def _check(v: np.ndarray, n: int, d: int) -> None:
    if d > MAX_DIM:
        raise UnsupportedOrderError(f"oracle supports d <= {MAX_DIM}, got {d}")
    if n not in (3, 4, 5):
        raise UnsupportedOrderError(f"oracle supports n = 3, 4, 5, got {n}")
    if len(v) < n:
        raise UnsupportedOrderError(f"need moments through p_{n - 1}")


def oracle_bounds(p, n: int, d: int | None = None, seed: int = 0):
    """(min, max, argmin spectrum, argmax spectrum) of p_n from one candidate set."""
    v = np.asarray(p.values if isinstance(p, MomentVector) else p, dtype=float)
    d = int(round(v[0])) if d is None else int(d)
    _check(v, n, d)
    for starts, iters in _ESCALATION:
        sols = _candidates(v, n, d, seed, starts, iters)
        if sols:
            break
    if not sols:
        raise InfeasibleMomentsError(n - 1, "no nonnegative spectrum matches the prefix")
    vals = np.array([np.sum(x**n) for x in sols])
    i, j = int(np.argmin(vals)), int(np.argmax(vals))
    return float(vals[i]), float(vals[j]), sols[i], sols[j]


def oracle_optimize(
    p, n: int, d: int | None = None, mode: str = "min", return_spectrum: bool = False, seed: int = 0
):
    """Extremal p_n over nonnegative spectra of length d matching p_1..p_{n-1}."""
    if mode not in ("min", "max"):
        raise ValueError("mode must be 'min' or 'max'")
    lo, hi, xlo, xhi = oracle_bounds(p, n, d, seed)
    val, x = (lo, xlo) if mode == "min" else (hi, xhi)
    return (val, x) if return_spectrum else val


def local_search(p, n: int, d: int | None = None, mode: str = "min", restarts: int = 20, seed: int = 0) -> float | None:
    """Best value found by SLSQP from random simplex points; None if nothing converged."""
    v = np.asarray(p.values if isinstance(p, MomentVector) else p, dtype=float)
    d = int(round(v[0])) if d is None else int(d)
    rng = np.random.default_rng(seed)
    sgn = 1.0 if mode == "min" else -1.0
    cons = [{"type": "eq", "fun": (lambda x, k=k: np.sum(x**k) - v[k])} for k in range(1, n)]
    best = None
    for _ in range(restarts):
        x0 = rng.dirichlet(np.ones(d) * rng.uniform(0.3, 3.0))
        r = minimize(
            lambda x: sgn * np.sum(x**n),
            x0,
            method="SLSQP",
            bounds=[(0.0, 1.0)] * d,
            constraints=cons,
            options={"ftol": 1e-15, "maxiter": 500},
        )
        if not r.success:
            continue
        if max(abs(np.sum(r.x**k) - v[k]) for k in range(1, n)) > 1e-9:
            continue
        val = float(np.sum(r.x**n))
        if best is None or sgn * val < sgn * best:
            best = val
    return best
