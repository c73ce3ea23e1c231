"""Hankel matrices of moment sequences and the p_n-PPT criterion family."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import UnsupportedOrderError, ValidationError
from .moments import MomentVector


@dataclass(frozen=True)
class HankelPair:
    """H_k with [H]_ij = m_{i+j} and B with [B]_ij = m_{i+j+1}."""

    k: int
    H: np.ndarray
    B: np.ndarray


def hankel_matrix(m, size: int, shift: int = 0) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    idx = np.arange(size)
    return m[idx[:, None] + idx[None, :] + shift]


def build_hankel(m: MomentVector) -> HankelPair:
    n = m.order
    if n < 1:
        raise ValidationError("order must be >= 1")
    k = n // 2
    H = hankel_matrix(m.values, k + 1)
    B = hankel_matrix(m.values, (n - 1) // 2 + 1, shift=1)
    return HankelPair(k=k, H=H, B=B)


def _odd_order(n: int) -> int:
    if n < 3:
        raise UnsupportedOrderError(f"p_n-PPT needs n >= 3, got {n}")
    return n if n % 2 else n - 1


def _b_matrix(p: MomentVector, n: int) -> np.ndarray:
    n = _odd_order(n)
    if p.order < n:
        raise UnsupportedOrderError(f"need moments through p_{n}, have order {p.order}")
    return hankel_matrix(p.values, (n - 1) // 2 + 1, shift=1)


def pn_ppt_check(p: MomentVector, n: int | None = None, tol: Tolerances = DEFAULT) -> bool:
    """True when B_{(n-1)/2}(p) is PSD, i.e. the moments are separability-consistent.

    Even orders resolve to the largest odd order below them.
    """
    B = _b_matrix(p, p.order if n is None else n)
    return float(np.linalg.eigvalsh(B)[0]) >= -tol.criterion_psd


def hankel_negativity(p: MomentVector, n: int, tol: Tolerances = DEFAULT) -> float:
    """N_n = (||B||_1 - Tr B)/2, the summed magnitude of negative eigenvalues of B."""
    if n % 2 == 0:
        raise UnsupportedOrderError(f"N_n is defined for odd n, got {n}")
    w = np.linalg.eigvalsh(_b_matrix(p, n))
    return 0.0 - float(np.sum(w[w < 0.0]))


def _signed_log_power(x: float, e: int) -> tuple[int, float]:
    """Sign and log|.| of x**e for integer e, without overflow or underflow."""
    if e == 0:
        return 1, 0.0
    if x == 0.0:
        return 0, -math.inf
    sign = -1 if (x < 0 and e % 2) else 1
    return sign, e * math.log(abs(x))


def _geq(lhs: tuple[int, float], rhs: tuple[int, float], rtol: float) -> bool:
    (sa, la), (sb, lb) = lhs, rhs
    if sa != sb:
        return sa > sb
    if sa == 0:
        return True
    # same sign: compare magnitudes, flipped for negatives
    if sa > 0:
        return la >= lb - rtol
    return la <= lb + rtol


def elben_higher_check(p: MomentVector, rtol: float = 1e-12) -> list[tuple[int, bool]]:
    """Truth of p_n^{n-2} >= p_{n-1}^{n-1} for 3 <= n <= order.

    Powers are compared as signed logarithms, so very high orders neither
    overflow nor underflow. ``rtol`` is a relative slack for exact ties.
    """
    if p.order < 3:
        raise UnsupportedOrderError(f"need order >= 3, got {p.order}")
    out = []
    for n in range(3, p.order + 1):
        lhs = _signed_log_power(float(p[n]), n - 2)
        rhs = _signed_log_power(float(p[n - 1]), n - 1)
        out.append((n, _geq(lhs, rhs, rtol)))
    return out
