"""Optimal bounds on the n-th PT-moment of separable states, n = 3, 4, 5.

For a separable state the spectrum of rho^{T_A} can be any nonnegative
vector x of length d with sum 1, so the bounds are

    min / max  sum_i x_i^n   s.t.  sum_i x_i^k = p_k (k < n),  x >= 0.

Extremal spectra have very few distinct entries:

    n = 3   min (x1 * alpha, x_{alpha+1}, 0 ...)        max (x1, x2 * (d-1))
    n = 4   max (x1, x2 * beta, x_{beta+2}, 0 ...)       min (x1 * gamma, x_{gamma+1}, x_{gamma+2} * rest)
    n = 5   max (x1, x2 * kappa, x_{kappa+2}, x_{kappa+3} * rest)
            min (x1 * eta, x_{eta+1}, x_{eta+2} * xi, x_{eta+xi+2}, 0 ...)

Each order-n extremizer is the order-(n-1) extremizer of the remaining
entries once one free parameter is fixed:

* n = 4 max: peel the top entry t, the rest is the order-3 minimizer;
* n = 4 min: shift every entry down by the smallest one u, the shifted
  vector is an order-3 minimizer;
* n = 5 max: peel t, the rest is the order-4 minimizer;
* n = 5 min: peel a block of eta entries equal to t, the rest is the
  order-4 maximizer.

Along each chain the constrained moment p_{n-1} is monotone in the parameter,
so the parameter is found by a bracketed scalar root solve between the
lower-order extremizers. Every inner step is closed form or another
bracketed solve, so the cost does not depend on d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .config import DEFAULT, Tolerances
from .errors import InfeasibleMomentsError, UnsupportedOrderError
from .linalg import Spectrum
from .moments import MomentVector

Blocks = list[tuple[float, int]]  # (value, multiplicity), values descending

_TINY = 1e-300
_MONO_SLACK = 1e-10


@dataclass(frozen=True)
class OptimalBounds:
    order: int
    feasible: bool
    p_min: float
    p_max: float
    spectrum_min: Spectrum | None = None
    spectrum_max: Spectrum | None = None
    multiplicities: dict = field(default_factory=dict)
    reason: str = ""


@dataclass(frozen=True)
class OpptViolation:
    order: int
    value: float
    defined: bool
    reason: str = ""


# --- helpers on block lists -------------------------------------------------


def _psum(blocks: Blocks, k: int) -> float:
    return sum(m * v**k for v, m in blocks)


def _scale(blocks: Blocks, s: float) -> Blocks:
    return [(v * s, m) for v, m in blocks]


def _expand(blocks: Blocks) -> np.ndarray:
    return np.concatenate([np.full(m, max(v, 0.0)) for v, m in blocks if m > 0])


def _two_value(a: float, b: float, s1: float, s2: float) -> tuple[float, float]:
    """u >= v with a*u + b*v = s1 and a*u^2 + b*v^2 = s2."""
    disc = a * b * ((a + b) * s2 - s1 * s1)
    u = (a * s1 + math.sqrt(max(disc, 0.0))) / (a * (a + b))
    v = (s1 - a * u) / b
    return u, v


def _alpha(q: float) -> int:
    # floor(1/q), ties going to the larger integer
    r = 1.0 / q
    return int(math.floor(r * (1.0 + 1e-12)))


def _solve_increasing(f: Callable[[float], float], lo: float, hi: float) -> float:
    """Root of an increasing function on [lo, hi], clamped to the ends.

    Raises if the endpoint values contradict monotonicity, since every
    chain below relies on it.
    """
    if not hi > lo:
        return lo
    flo = f(lo)
    if flo >= 0.0:
        return lo
    fhi = f(hi)
    if fhi <= 0.0:
        if fhi < flo - _MONO_SLACK:
            raise RuntimeError(f"monotone premise violated on [{lo!r}, {hi!r}]: {flo!r} > {fhi!r}")
        return hi
    return brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)


# --- order 3: closed forms ----------------------------------------------------


def _q2(s1: float, s2: float, length: int) -> float:
    return min(max(s2 / (s1 * s1), 1.0 / length), 1.0)


def _m3_min(s1: float, s2: float, length: int) -> Blocks:
    """Minimizer of sum x^3 given sum x = s1, sum x^2 = s2 on `length` entries."""
    if s1 <= _TINY:
        return [(0.0, length)]
    q = _q2(s1, s2, length)
    a = min(_alpha(q), length)
    if a >= length:
        return [(s1 / length, length)]
    u, v = _two_value(a, 1, 1.0, q)
    out = [(s1 * u, a), (s1 * max(v, 0.0), 1)]
    if length - a - 1 > 0:
        out.append((0.0, length - a - 1))
    return out


def _m3_max(s1: float, s2: float, length: int) -> Blocks:
    if s1 <= _TINY:
        return [(0.0, length)]
    if length == 1:
        return [(s1, 1)]
    q = _q2(s1, s2, length)
    r = math.sqrt(max((length - 1) * (q * length - 1), 0.0))
    return [(s1 * (r + 1) / length, 1), (s1 * (length - 1 - r) / (length * (length - 1)), length - 1)]


def _order3_range(s1: float, s2: float, length: int) -> tuple[float, float]:
    return _psum(_m3_min(s1, s2, length), 3), _psum(_m3_max(s1, s2, length), 3)


# --- order 4: one-parameter chains --------------------------------------------


def _normalized(s: Sequence[float]) -> tuple[float, ...]:
    s1 = s[0]
    return tuple(s[k] / s1 ** (k + 1) for k in range(len(s)))


def _m4_max(s1: float, s2: float, s3: float, length: int) -> Blocks:
    if s1 <= _TINY:
        return [(0.0, length)]
    if length == 1:
        return [(s1, 1)]
    _, q2, q3 = _normalized((s1, s2, s3))
    lo = _m3_min(1.0, q2, length)[0][0]
    hi = _m3_max(1.0, q2, length)[0][0]

    def rest(t: float) -> Blocks:
        return _m3_min(1.0 - t, q2 - t * t, length - 1)

    t = _solve_increasing(lambda t: t**3 + _psum(rest(t), 3) - q3, lo, hi)
    return _scale([(t, 1)] + rest(t), s1)


def _m4_min(s1: float, s2: float, s3: float, length: int) -> Blocks:
    if s1 <= _TINY:
        return [(0.0, length)]
    if length == 1:
        return [(s1, 1)]
    _, q2, q3 = _normalized((s1, s2, s3))
    u_max = _m3_max(1.0, q2, length)[-1][0]

    def parts(u: float) -> Blocks:
        S1 = 1.0 - length * u
        S2 = q2 - 2.0 * u + length * u * u
        return [(y + u, m) for y, m in _m3_min(S1, S2, length)]

    u = _solve_increasing(lambda u: _psum(parts(u), 3) - q3, 0.0, u_max)
    return _scale(parts(u), s1)


# --- order 5 ------------------------------------------------------------------


def _order3_ok(r1: float, r2: float, r3: float, length: int, slack: float = 1e-12) -> bool:
    if length < 1 or r1 < -slack:
        return False
    if r1 <= 1e-14:
        return abs(r2) <= slack and abs(r3) <= slack
    q = r2 / (r1 * r1)
    if q < 1.0 / length - slack or q > 1.0 + slack:
        return False
    lo, hi = _order3_range(r1, r2, length)
    return lo - slack <= r3 <= hi + slack


def _m5_max(s: Sequence[float], length: int) -> Blocks:
    s1 = s[0]
    if s1 <= _TINY:
        return [(0.0, length)]
    if length == 1:
        return [(s1, 1)]
    _, q2, q3, q4 = _normalized(s)
    lo = _m4_min(1.0, q2, q3, length)[0][0]
    hi = _m4_max(1.0, q2, q3, length)[0][0]

    def rest(t: float) -> Blocks:
        return _m4_min(1.0 - t, q2 - t * t, q3 - t**3, length - 1)

    t = _solve_increasing(lambda t: t**4 + _psum(rest(t), 4) - q4, lo, hi)
    return _scale([(t, 1)] + rest(t), s1)


def _m5_min_at(t: float, q2: float, q3: float, length: int) -> tuple[int, Blocks]:
    """Block of eta entries equal to t plus the order-4 maximizer of the rest."""
    best: tuple[float, int, Blocks] | None = None
    eta_cap = min(length - 1, int(math.floor(min(1.0 / t, q2 / (t * t)) * (1 + 1e-9))))
    for eta in range(1, max(eta_cap, 1) + 1):
        r1, r2, r3 = 1.0 - eta * t, q2 - eta * t * t, q3 - eta * t**3
        if not _order3_ok(r1, r2, r3, length - eta):
            continue
        rest = _m4_max(max(r1, 0.0), max(r2, 0.0), max(r3, 0.0), length - eta)
        excess = rest[0][0] - t
        if excess <= 1e-12:
            return eta, [(t, eta)] + rest
        if best is None or excess < best[0]:
            best = (excess, eta, rest)
    if best is None:
        # only reachable at the chain ends through rounding
        return 1, [(t, 1)] + _m4_max(max(1.0 - t, 0.0), max(q2 - t * t, 0.0), max(q3 - t**3, 0.0), length - 1)
    _, eta, rest = best
    return eta, [(t, eta)] + rest


def _m5_min(s: Sequence[float], length: int) -> tuple[int, Blocks]:
    s1 = s[0]
    if s1 <= _TINY:
        return 0, [(0.0, length)]
    if length == 1:
        return 1, [(s1, 1)]
    _, q2, q3, q4 = _normalized(s)
    lo = _m4_min(1.0, q2, q3, length)[0][0]
    hi = _m4_max(1.0, q2, q3, length)[0][0]

    def f(t: float) -> float:
        return _psum(_m5_min_at(t, q2, q3, length)[1], 4) - q4

    t = _solve_increasing(f, lo, hi)
    eta, blocks = _m5_min_at(t, q2, q3, length)
    return eta, _scale(blocks, s1)


# --- two-point families behind beta and gamma ---------------------------------


def beta0(p2: float, p3: float, d: int) -> float:
    """Real beta_0 with (x1, x2 * beta_0) matching p1, p2, p3; beta = floor(beta_0)."""
    lo = max(1.0, 1.0 / p2 - 1.0)
    hi = float(d - 1)
    if hi <= lo:
        return hi

    def g(b: float) -> float:
        u, v = _two_value(1.0, b, 1.0, p2)
        return u**3 + b * v**3 - p3

    return _solve_increasing(g, lo, hi)


def gamma0(p2: float, p3: float, d: int) -> float | None:
    """Real gamma_0 with (x1 * gamma_0, x2 * (d - gamma_0)) matching p1, p2, p3."""
    hi = min(1.0 / p2, float(d))
    if hi - 1.0 <= 1e-12:
        return 1.0

    def g(c: float) -> float:
        if d - c <= 1e-15:
            return c * (1.0 / c) ** 3 - p3
        u, v = _two_value(c, d - c, 1.0, p2)
        v = max(v, 0.0)
        return -(c * u**3 + (d - c) * v**3 - p3)

    try:
        return _solve_increasing(g, 1.0, hi)
    except RuntimeError:
        return None


# --- public API -------------------------------------------------------------------


def _prefix(p) -> np.ndarray:
    if isinstance(p, MomentVector):
        return np.asarray(p.values, dtype=float)
    return np.asarray(p, dtype=float)


def _check_order2(p1: float, p2: float, d: int, tol: Tolerances) -> None:
    if abs(p1 - 1.0) > tol.moment:
        raise InfeasibleMomentsError(1, f"p_1 = {p1!r} but must equal 1")
    if p2 < 1.0 / d - tol.moment:
        raise InfeasibleMomentsError(2, f"p_2 = {p2!r} < 1/d = {1.0 / d!r}")
    if p2 > 1.0 + tol.moment:
        raise InfeasibleMomentsError(2, f"p_2 = {p2!r} > 1")


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


def p3_bounds(p2: float, d: int, tol: Tolerances = DEFAULT) -> OptimalBounds:
    """Closed-form range of p_3 given p_1 = 1 and p_2 on d entries."""
    _check_order2(1.0, p2, d, tol)
    p2 = _clamp(p2, 1.0 / d, 1.0)
    lo = _m3_min(1.0, p2, d)
    hi = _m3_max(1.0, p2, d)
    a = lo[0][1] if len(lo) > 1 else d
    return OptimalBounds(
        order=3,
        feasible=True,
        p_min=_psum(lo, 3),
        p_max=_psum(hi, 3),
        spectrum_min=Spectrum(_expand(lo)),
        spectrum_max=Spectrum(_expand(hi)),
        multiplicities={"alpha": int(a)},
    )


def feasibility_order3(p, d: int | None = None, tol: Tolerances = DEFAULT) -> bool:
    try:
        _order3_prefix(_prefix(p), d, tol)
    except InfeasibleMomentsError:
        return False
    return True


def _order3_prefix(v: np.ndarray, d: int | None, tol: Tolerances) -> tuple[int, float, float]:
    if len(v) < 4:
        raise UnsupportedOrderError("need moments through p_3")
    d = int(round(v[0])) if d is None else int(d)
    _check_order2(v[1], v[2], d, tol)
    p2 = _clamp(v[2], 1.0 / d, 1.0)
    lo, hi = _order3_range(1.0, p2, d)
    if v[3] < lo - tol.moment:
        raise InfeasibleMomentsError(3, f"p_3 = {v[3]!r} below separable minimum {lo!r}")
    if v[3] > hi + tol.moment:
        raise InfeasibleMomentsError(3, f"p_3 = {v[3]!r} above maximum {hi!r}")
    return d, p2, _clamp(v[3], lo, hi)


def _order4_prefix(v: np.ndarray, d: int | None, tol: Tolerances) -> tuple[int, float, float, float]:
    if len(v) < 5:
        raise UnsupportedOrderError("need moments through p_4")
    d, p2, p3 = _order3_prefix(v, d, tol)
    lo = _psum(_m4_min(1.0, p2, p3, d), 4)
    hi = _psum(_m4_max(1.0, p2, p3, d), 4)
    if v[4] < lo - tol.moment:
        raise InfeasibleMomentsError(4, f"p_4 = {v[4]!r} below minimum {lo!r}")
    if v[4] > hi + tol.moment:
        raise InfeasibleMomentsError(4, f"p_4 = {v[4]!r} above maximum {hi!r}")
    return d, p2, p3, _clamp(v[4], lo, hi)


def _group_counts(blocks: Blocks) -> list[int]:
    return [m for _, m in blocks]


def p4_bounds(p, d: int | None = None, tol: Tolerances = DEFAULT) -> OptimalBounds:
    """Range of p_4 given (p_1, p_2, p_3) on d entries, with witness spectra."""
    d, p2, p3 = _order3_prefix(_prefix(p), d, tol)
    hi = _m4_max(1.0, p2, p3, d)
    lo = _m4_min(1.0, p2, p3, d)
    mult = {
        "beta": int(hi[1][1]) if len(hi) > 1 else 0,
        "gamma": int(lo[0][1]),
        "beta0": beta0(p2, p3, d),
        "gamma0": gamma0(p2, p3, d),
    }
    return OptimalBounds(
        order=4,
        feasible=True,
        p_min=_psum(lo, 4),
        p_max=_psum(hi, 4),
        spectrum_min=Spectrum(_expand(lo)),
        spectrum_max=Spectrum(_expand(hi)),
        multiplicities=mult,
    )


def p5_bounds(p, d: int | None = None, tol: Tolerances = DEFAULT) -> OptimalBounds:
    """Range of p_5 given (p_1, ..., p_4) on d entries, with witness spectra."""
    d, p2, p3, p4 = _order4_prefix(_prefix(p), d, tol)
    s = (1.0, p2, p3, p4)
    hi = _m5_max(s, d)
    eta, lo = _m5_min(s, d)
    # max: (t, rest) with rest an order-4 minimizer (y1 * kappa, ...)
    kappa = hi[1][1] if len(hi) > 1 else 0
    # min: (t * eta, rest) with rest an order-4 maximizer (z1, z2 * xi, ...)
    xi = lo[2][1] if len(lo) > 2 else 0
    return OptimalBounds(
        order=5,
        feasible=True,
        p_min=_psum(lo, 5),
        p_max=_psum(hi, 5),
        spectrum_min=Spectrum(_expand(lo)),
        spectrum_max=Spectrum(_expand(hi)),
        multiplicities={"kappa": int(kappa), "eta": int(eta), "xi": int(xi)},
    )


def optimal_bounds(p, n: int, d: int | None = None, tol: Tolerances = DEFAULT) -> OptimalBounds:
    """Bounds on p_n, returning ``feasible=False`` instead of raising."""
    v = _prefix(p)
    if n not in (3, 4, 5):
        raise UnsupportedOrderError(f"optimal bounds are available for n = 3, 4, 5, got {n}")
    try:
        if n == 3:
            dd = int(round(v[0])) if d is None else int(d)
            _check_order2(v[1], v[2], dd, tol)
            return p3_bounds(v[2], dd, tol)
        if n == 4:
            return p4_bounds(v, d, tol)
        return p5_bounds(v, d, tol)
    except InfeasibleMomentsError as exc:
        return OptimalBounds(order=n, feasible=False, p_min=math.nan, p_max=math.nan, reason=str(exc))


def oppt_chain(p, d: int | None = None, max_order: int = 5, tol: Tolerances = DEFAULT) -> list[OpptViolation]:
    """O_3, ..., O_max_order with the definedness rule O_n needs O_{n-1} = 0.

    O_3 uses only the lower bound: for moments of a genuine state p_3 never
    exceeds the upper bound.
    """
    v = _prefix(p)
    d = int(round(v[0])) if d is None else int(d)
    out: list[OpptViolation] = []
    try:
        _check_order2(v[1], v[2], d, tol)
    except InfeasibleMomentsError as exc:
        return [OpptViolation(n, math.nan, False, str(exc)) for n in range(3, max_order + 1)]
    p2 = _clamp(v[2], 1.0 / d, 1.0)
    lo3 = _psum(_m3_min(1.0, p2, d), 3)
    o = max(lo3 - v[3], 0.0)
    out.append(OpptViolation(3, o, True))
    blocked = "" if o <= tol.detection else "O_3 > 0"
    for n in range(4, max_order + 1):
        if blocked:
            out.append(OpptViolation(n, math.nan, False, f"undefined because {blocked}"))
            continue
        b = optimal_bounds(v[: n + 1] if len(v) > n else v, n, d, tol) if len(v) > n else None
        if b is None:
            out.append(OpptViolation(n, math.nan, False, f"p_{n} not available"))
            blocked = f"p_{n} not available"
            continue
        if not b.feasible:
            out.append(OpptViolation(n, math.nan, False, b.reason))
            blocked = b.reason
            continue
        o = max(b.p_min - v[n], v[n] - b.p_max, 0.0)
        out.append(OpptViolation(n, o, True))
        if o > tol.detection:
            blocked = f"O_{n} > 0"
    return out


def oppt_violation(p, n: int, d: int | None = None, tol: Tolerances = DEFAULT) -> OpptViolation:
    if n not in (3, 4, 5):
        raise UnsupportedOrderError(f"O_n is available for n = 3, 4, 5, got {n}")
    return oppt_chain(p, d, n, tol)[n - 3]
