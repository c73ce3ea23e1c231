"""PT-moments p_k = Tr[(rho^{T_A})^k], computed through the PT spectrum."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import DEFAULT
from .errors import ValidationError
from .linalg import BipartiteState, Spectrum, partial_transpose


@dataclass(frozen=True)
class MomentVector:
    """Real moment sequence (m_0, m_1, ..., m_n).

    For PT-moments m_0 is the dimension d and m_1 = 1. The same container is
    used for generic moment sequences in the moment-problem layer.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if v.size < 2:
            raise ValidationError("a moment vector needs at least (m_0, m_1)")
        if not np.all(np.isfinite(v)):
            raise ValidationError("moment vector has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def order(self) -> int:
        return len(self.values) - 1

    @property
    def dim(self) -> int:
        return int(round(self.values[0]))

    def __getitem__(self, k):
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)

    def truncate(self, n: int) -> "MomentVector":
        if n > self.order:
            raise ValidationError(f"cannot truncate order {self.order} to {n}")
        return MomentVector(self.values[: n + 1])

    def tolist(self) -> list[float]:
        return [float(x) for x in self.values]


def power_sums(x: np.ndarray, n: int) -> np.ndarray:
    """(len(x), sum x, ..., sum x^n) along the last axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape[:-1] + (n + 1,))
    out[..., 0] = x.shape[-1]
    pw = np.ones_like(x)
    for k in range(1, n + 1):
        pw = pw * x
        out[..., k] = pw.sum(axis=-1)
    return out


def moments_of_spectrum(spectrum: Spectrum | Sequence[float], n: int) -> MomentVector:
    vals = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum, dtype=float)
    if vals.size == 0:
        raise ValidationError("empty spectrum")
    if n < 1:
        raise ValidationError(f"order must be >= 1, got {n}")
    return MomentVector(power_sums(vals, n))


def pt_spectrum(state: BipartiteState) -> Spectrum:
    return Spectrum(np.linalg.eigvalsh(partial_transpose(state)))


def pt_moments(state: BipartiteState, n: int) -> MomentVector:
    if n < 1:
        raise ValidationError(f"order must be >= 1, got {n}")
    return moments_of_spectrum(pt_spectrum(state), n)


def purity(state: BipartiteState) -> float:
    """Tr[rho^2], cross-checked against the second PT-moment."""
    direct = float(np.vdot(state.matrix, state.matrix).real)
    via_pt = pt_moments(state, 2)[2]
    if abs(direct - via_pt) > DEFAULT.moment:
        raise ValidationError(f"purity mismatch: {direct!r} vs {via_pt!r}")
    return float(via_pt)
