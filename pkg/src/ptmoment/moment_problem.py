"""Truncated Hamburger/Stieltjes moment problems.

Membership tests certify the closures cl(M_n) and cl(M_n^+). Exact
realizations m_k = <phi| X^k |phi> are built from a Cholesky factor of the
Hankel matrix: if H_l = L L^T, the Krylov vectors phi_i are the columns of
L^T and X = L^{-1} B_l L^{-T} shifts phi_i to phi_{i+1}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import NotPSDRealizableError, SingularHankelError, ValidationError
from .hankel import hankel_matrix
from .moments import MomentVector


@dataclass(frozen=True)
class MomentRealization:
    vector: np.ndarray
    observable: np.ndarray
    flat_value: float | None = None  # m_{2l+2} of the flat extension, when built

    def moments(self, n: int) -> np.ndarray:
        out = np.empty(n + 1)
        v = np.array(self.vector, dtype=float)
        w = v.copy()
        for k in range(n + 1):
            out[k] = v @ w
            w = self.observable @ w
        return out

    def krylov_gram(self, size: int) -> np.ndarray:
        vecs = [np.array(self.vector, dtype=float)]
        for _ in range(size - 1):
            vecs.append(self.observable @ vecs[-1])
        K = np.stack(vecs, axis=1)
        return K.T @ K


def _psd(M: np.ndarray, tol: float) -> bool:
    if M.size == 0:
        return True
    w = np.linalg.eigvalsh(M)
    return w[0] >= -tol * max(1.0, abs(w[-1]))


def membership_Mn(m: MomentVector, tol: Tolerances = DEFAULT) -> bool:
    """m in cl(M_n) iff H_{n//2}(m) is PSD."""
    n = m.order
    return _psd(hankel_matrix(m.values, n // 2 + 1), tol.criterion_psd)


def membership_Mn_plus(m: MomentVector, tol: Tolerances = DEFAULT) -> bool:
    """m in cl(M_n^+) iff H_{n//2}(m) and B_{(n-1)//2}(m) are both PSD."""
    n = m.order
    B = hankel_matrix(m.values, (n - 1) // 2 + 1, shift=1)
    return membership_Mn(m, tol) and _psd(B, tol.criterion_psd)


def _numerical_rank(M: np.ndarray, rel: float) -> int:
    w = np.linalg.eigvalsh(M)
    top = max(abs(w[-1]), abs(w[0]))
    if top == 0.0:
        return 0
    return int(np.sum(w > rel * top))


def _require_pd(H: np.ndarray, tol: Tolerances) -> None:
    w = np.linalg.eigvalsh(H)
    if w[0] <= max(tol.rank_rel * abs(w[-1]), 1e-10):
        raise SingularHankelError(
            f"H_{len(H) - 1} is singular or indefinite (eigenvalues {np.array2string(w, precision=4)}); "
            "the moments lie at most in the closure"
        )


def _default_odd_moment(H: np.ndarray, mu_head: np.ndarray) -> float:
    """m_{2l+1} minimizing mu^T H^{-1} mu over the free last entry of mu."""
    Hinv = np.linalg.inv(H)
    l = len(H) - 1
    return float(-(Hinv[l, :l] @ mu_head) / Hinv[l, l])


def flat_extension(
    m: MomentVector, odd_moment: float | None = None, tol: Tolerances = DEFAULT
) -> MomentVector:
    """Extend m to order 2l+2 so that rank H_{l+1} = rank H_l.

    For even n the entry m_{2l+1} is free; pass it as ``odd_moment`` or let
    the default pick the value that minimizes the new m_{2l+2}.
    """
    n = m.order
    l = n // 2
    v = list(m.values)
    H = hankel_matrix(v, l + 1)
    try:
        _require_pd(H, tol)
    except SingularHankelError:
        # rank-deficient: extend through a smaller atomic realization, if one exists
        ext = realize_moments(m, tol=tol).moments(2 * l + 2)
        if n == 2 * l and odd_moment is not None and abs(ext[n + 1] - odd_moment) > tol.realize * max(1.0, abs(odd_moment)):
            raise SingularHankelError(f"m_{n + 1} is fixed to {ext[n + 1]!r} by the singular H_{l}")
        return MomentVector(ext)
    if n == 2 * l:
        v.append(_default_odd_moment(H, np.asarray(v[l + 1 : 2 * l + 1])) if odd_moment is None else float(odd_moment))
    mu = np.asarray(v[l + 1 : 2 * l + 2])
    v.append(float(mu @ np.linalg.solve(H, mu)))
    return MomentVector(v)


def _psd_odd_moment(v: list[float], l: int, default: float, tol: Tolerances) -> float:
    """Smallest admissible m_{2l+1} >= default that keeps B_l PSD (even order)."""
    if l == 0:
        return max(default, 0.0)
    Bp = hankel_matrix(v, l, shift=1)
    nu = np.asarray(v[l + 1 : 2 * l + 1])
    w, U = np.linalg.eigh(Bp)
    scale = max(abs(w[-1]), 1.0)
    if w[0] < -tol.criterion_psd * scale:
        raise NotPSDRealizableError(
            f"B_{l - 1} has a negative eigenvalue {w[0]:.3g}", U[:, 0]
        )
    floor = 0.0
    for lam, u in zip(w, U.T):
        c = float(u @ nu)
        if lam <= tol.rank_rel * scale:
            if abs(c) > tol.realize * max(1.0, float(np.linalg.norm(nu))):
                raise NotPSDRealizableError(
                    f"B_{l - 1} is singular and the next column leaves its range; "
                    "no observable X >= 0 exists",
                    u,
                )
        else:
            floor += c * c / lam
    return max(default, floor)


def _realize_pd(v: list[float], l: int, n: int, psd: bool, tol: Tolerances) -> MomentRealization:
    H = hankel_matrix(v, l + 1)
    if n == 2 * l:
        c = _default_odd_moment(H, np.asarray(v[l + 1 : 2 * l + 1]))
        if psd:
            c = _psd_odd_moment(v, l, c, tol)
        v = v + [c]
    B = hankel_matrix(v, l + 1, shift=1)
    if psd:
        w, U = np.linalg.eigh(B)
        if w[0] < -tol.criterion_psd * max(1.0, abs(w[-1])):
            raise NotPSDRealizableError(f"B_{l} has a negative eigenvalue {w[0]:.3g}", U[:, 0])
    L = np.linalg.cholesky(H)
    Linv = np.linalg.inv(L)
    X = Linv @ B @ Linv.T
    X = 0.5 * (X + X.T)
    phi = np.zeros(l + 1)
    phi[0] = L[0, 0]
    mu = np.asarray(v[l + 1 : 2 * l + 2])
    return MomentRealization(phi, X, float(mu @ np.linalg.solve(H, mu)))


def _reproduces(r: MomentRealization, v: list[float], n: int, tol: Tolerances) -> bool:
    got = r.moments(n)
    return bool(np.max(np.abs(got - np.asarray(v)) / np.maximum(1.0, np.abs(v))) <= tol.realize)


def realize_moments(
    m: MomentVector, require_psd_observable: bool = False, tol: Tolerances = DEFAULT
) -> MomentRealization:
    """Find (phi, X) with <phi|X^k|phi> = m_k for k = 0..n.

    A rank-deficient H_l is accepted only when a smaller positive-definite
    block already explains every moment (a finitely atomic measure with
    fewer atoms); the result is then padded with zeros. Anything else raises
    SingularHankelError. With ``require_psd_observable`` the observable is
    also PSD, or NotPSDRealizableError is raised with a witness vector.
    """
    n = m.order
    if n < 1:
        raise ValidationError("order must be >= 1")
    l = n // 2
    v = [float(x) for x in m.values]
    H = hankel_matrix(v, l + 1)
    w = np.linalg.eigvalsh(H)
    if w[0] > max(tol.rank_rel * abs(w[-1]), 1e-10):
        return _realize_pd(v, l, n, require_psd_observable, tol)
    if w[0] > 1e3 * np.finfo(float).eps * len(w) * abs(w[-1]):
        # nearly singular but positive definite: keep the full realization if it is accurate
        try:
            with np.errstate(divide="raise", invalid="raise"):
                r = _realize_pd(v, l, n, require_psd_observable, tol)
        except (np.linalg.LinAlgError, FloatingPointError):
            r = None
        if r is not None and _reproduces(r, v, n, tol):
            return r

    if not _psd(H, tol.criterion_psd):
        raise SingularHankelError(f"H_{l} is not PSD; moments are not in cl(M_{n})")
    k = _numerical_rank(H, tol.rank_rel)
    if k == 0:
        raise SingularHankelError("H is zero; no positive measure")
    lead = hankel_matrix(v, k)
    if _numerical_rank(lead, tol.rank_rel) < k:
        raise SingularHankelError(
            f"H_{l} has rank {k} but its leading {k}x{k} block is singular; "
            "the moments lie only in the closure"
        )
    small = _realize_pd(v[: 2 * k], k - 1, 2 * k - 1, require_psd_observable, tol)
    if not _reproduces(small, v, n, tol):
        raise SingularHankelError(
            f"H_{l} has rank {k} but no {k}-atom realization reproduces all moments"
        )
    phi = np.zeros(l + 1)
    phi[:k] = small.vector
    X = np.zeros((l + 1, l + 1))
    X[:k, :k] = small.observable
    return MomentRealization(phi, X, None)
