"""Numerical tolerances shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10  # max |M - M^dagger| accepted on ingestion
    trace: float = 1e-10
    state_psd: float = 1e-10  # eigenvalue floor for a valid density matrix
    criterion_psd: float = 1e-9  # B_k >= -tol counts as PSD
    detection: float = 1e-9  # violation above this counts as a detection
    moment: float = 1e-9  # slack for p_1 = 1, p_2 range and bound checks
    rank_rel: float = 1e-8  # relative eigenvalue threshold for numerical rank
    realize: float = 1e-8  # moment reproduction target for realizations

    def with_detection(self, tol: float) -> "Tolerances":
        return replace(self, detection=tol, criterion_psd=tol)


DEFAULT = Tolerances()


def worker_count() -> int:
    """Number of worker processes allowed by PTMOMENT_THREADS (default 1)."""
    raw = os.environ.get("PTMOMENT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)
