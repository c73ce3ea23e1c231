"""Per-state evaluation of every moment criterion."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import oppt_chain
from .config import DEFAULT, Tolerances
from .errors import UnsupportedOrderError
from .hankel import elben_higher_check, hankel_matrix, hankel_negativity
from .linalg import BipartiteState, Spectrum
from .moments import MomentVector, moments_of_spectrum, pt_spectrum


@dataclass(frozen=True)
class CriterionReport:
    dim_a: int
    dim_b: int
    moments: MomentVector
    pt_spectrum: Spectrum
    npt: bool
    negativity: float
    n3: float
    n5: float | None
    o3: float | None
    o4: float | None
    o5: float | None
    elben: list[tuple[int, bool]]
    hankel_h_psd: bool
    undefined: dict[str, str] = field(default_factory=dict)

    def detected(self, tol: Tolerances = DEFAULT) -> dict[str, bool]:
        """Detection flags; the optimal criteria accumulate over orders."""
        thr = tol.detection

        def over(x):
            return bool(x is not None and x > thr)

        onpt3 = over(self.o3)
        onpt4 = onpt3 or over(self.o4)
        return {
            "npt": bool(self.npt),
            "npt3": over(self.n3),
            "onpt3": onpt3,
            "onpt4": onpt4,
            "npt5": over(self.n5),
            "onpt5": onpt4 or over(self.o5),
        }

    def to_dict(self) -> dict:
        return {
            "format": 1,
            "dims": [self.dim_a, self.dim_b],
            "moments": self.moments.tolist(),
            "pt_spectrum": [float(x) for x in self.pt_spectrum.values],
            "npt": bool(self.npt),
            "negativity": self.negativity,
            "n3": self.n3,
            "n5": self.n5,
            "o3": self.o3,
            "o4": self.o4,
            "o5": self.o5,
            "undefined": dict(self.undefined),
            "elben": [[n, bool(ok)] for n, ok in self.elben],
            "hankel_h_psd": bool(self.hankel_h_psd),
            "detected": self.detected(),
        }


def analyze_spectrum(
    spectrum: Spectrum, dim_a: int, dim_b: int, max_order: int = 5, tol: Tolerances = DEFAULT
) -> CriterionReport:
    if not 3 <= max_order <= 5:
        raise UnsupportedOrderError(f"max_order must be 3, 4 or 5, got {max_order}")
    p = moments_of_spectrum(spectrum, max_order)
    neg = 0.0 - float(np.sum(spectrum.values[spectrum.values < 0.0]))
    n3 = hankel_negativity(p, 3, tol)
    n5 = hankel_negativity(p, 5, tol) if max_order >= 5 else None
    chain = oppt_chain(p, len(spectrum), max_order, tol)
    o = {v.order: (v.value if v.defined else None) for v in chain}
    undefined = {f"o{v.order}": v.reason for v in chain if not v.defined}
    for k in range(max_order + 1, 6):
        undefined[f"o{k}"] = f"order {k} not requested"
    H = hankel_matrix(p.values, max_order // 2 + 1)
    h_ok = float(np.linalg.eigvalsh(H)[0]) >= -tol.criterion_psd
    return CriterionReport(
        dim_a=dim_a,
        dim_b=dim_b,
        moments=p,
        pt_spectrum=spectrum,
        npt=neg > tol.detection,
        negativity=neg,
        n3=n3,
        n5=n5,
        o3=o.get(3),
        o4=o.get(4),
        o5=o.get(5),
        elben=elben_higher_check(p),
        hankel_h_psd=h_ok,
        undefined=undefined,
    )


def analyze_state(state: BipartiteState, max_order: int = 5, tol: Tolerances = DEFAULT) -> CriterionReport:
    return analyze_spectrum(pt_spectrum(state), state.dim_a, state.dim_b, max_order, tol)

