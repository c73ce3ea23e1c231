"""Dense Hermitian primitives: states, partial transpose, spectra, PSD gates.

Composite index convention: row/column ``b + d_B * a`` (A-major), so a
matrix reshaped to ``(d_A, d_B, d_A, d_B)`` is indexed ``[a, b, a', b']``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import StructuralError, ValidationError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def hermitize(matrix, tol: float = DEFAULT.herm) -> np.ndarray:
    """Return (M + M^dagger)/2, rejecting inputs further than `tol` from Hermitian."""
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian (max deviation {dev:.3g} > {tol:g})")
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class Spectrum:
    """Real eigenvalues sorted in descending order."""

    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())[::-1]
        object.__setattr__(self, "values", _frozen(v))

    def __len__(self) -> int:
        return len(self.values)

    def power_sum(self, k: int) -> float:
        return float(np.sum(self.values**k))


@dataclass(frozen=True)
class BipartiteState:
    """Density matrix with a declared (d_A, d_B) split.

    Validation happens on construction: the matrix is symmetrized, and
    rejected if it is not Hermitian, not unit trace or not PSD within the
    tolerances in ``tol``.
    """

    dim_a: int
    dim_b: int
    matrix: np.ndarray
    tol: Tolerances = DEFAULT

    def __post_init__(self):
        if int(self.dim_a) < 1 or int(self.dim_b) < 1:
            raise StructuralError(f"dimensions must be positive, got {self.dim_a}x{self.dim_b}")
        d = int(self.dim_a) * int(self.dim_b)
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (d, d):
            raise StructuralError(
                f"matrix shape {m.shape} does not match dim_a*dim_b = {d}"
            )
        m = hermitize(m, self.tol.herm)
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > self.tol.trace:
            raise ValidationError(f"trace is {tr!r}, expected 1")
        lam = float(np.linalg.eigvalsh(m)[0])
        if lam < -self.tol.state_psd:
            raise ValidationError(f"matrix is not PSD (min eigenvalue {lam:.3g})")
        object.__setattr__(self, "dim_a", int(self.dim_a))
        object.__setattr__(self, "dim_b", int(self.dim_b))
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b


def partial_transpose_matrix(matrix: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    """Transpose the A indices of a (batch of) composite matrices.

    Works on arrays of shape ``(..., d, d)``; the result is a pure index
    permutation, so applying it twice returns the input bit for bit.
    """
    m = np.asarray(matrix)
    d = dim_a * dim_b
    if m.shape[-2:] != (d, d):
        raise StructuralError(f"matrix shape {m.shape[-2:]} does not match {dim_a}x{dim_b}")
    lead = m.shape[:-2]
    t = m.reshape(lead + (dim_a, dim_b, dim_a, dim_b))
    k = len(lead)
    axes = tuple(range(k)) + (k + 2, k + 1, k, k + 3)
    return np.ascontiguousarray(t.transpose(axes)).reshape(lead + (d, d))


def partial_transpose(state: BipartiteState) -> np.ndarray:
    """rho^{T_A}: Hermitian, unit trace, possibly indefinite."""
    return partial_transpose_matrix(state.matrix, state.dim_a, state.dim_b)


def _as_hermitian(matrix, tol: float) -> np.ndarray:
    m = np.asarray(matrix)
    if np.iscomplexobj(m):
        return hermitize(m, tol)
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if m.size and float(np.max(np.abs(m - m.T))) > tol:
        raise ValidationError("matrix is not symmetric")
    return 0.5 * (m + m.T)


def eigenvalues_hermitian(matrix, tol: float = DEFAULT.herm) -> Spectrum:
    return Spectrum(np.linalg.eigvalsh(_as_hermitian(matrix, tol)))


def eigh_descending(matrix, tol: float = DEFAULT.herm) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs with eigenvalues in descending order."""
    w, v = np.linalg.eigh(_as_hermitian(matrix, tol))
    return w[::-1], v[:, ::-1]


def trace_norm(matrix, tol: float = DEFAULT.herm) -> float:
    m = _as_hermitian(matrix, tol)
    if m.size == 0:
        return 0.0
    return float(np.sum(np.abs(np.linalg.eigvalsh(m))))


def min_eigenvalue(matrix, tol: float = DEFAULT.herm) -> float:
    return float(np.linalg.eigvalsh(_as_hermitian(matrix, tol))[0])


def is_psd(matrix, tol: float = DEFAULT.state_psd) -> bool:
    return min_eigenvalue(matrix) >= -tol
