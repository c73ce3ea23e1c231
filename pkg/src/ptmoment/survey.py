"""Batch experiments: random-state surveys, Ising sweeps, the p_3 gap scan and
the measurement budget estimate."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from decimal import Decimal, ROUND_CEILING
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .bounds_batch import p3_min_batch, p4_bounds_batch, p5_bounds_batch
from .config import DEFAULT, Tolerances, worker_count
from .errors import ScaleError, ValidationError
from .linalg import partial_transpose_matrix
from .report import analyze_state
from .states import MAX_ISING_QUBITS, PRNG_NAME, IsingParams, IsingSpectrum, hs_batch

CRITERIA = ("npt", "npt3", "onpt3", "onpt4", "npt5", "onpt5")
DIAGNOSTICS = (
    "h_not_psd",
    "order2_infeasible",
    "npt3_not_onpt3",
    "npt3_not_npt5",
    "detected_not_npt",
    "hankel_psd_not_elben",
)
_CHUNK = 2000


# --- random-state surveys ---------------------------------------------------------------


def _batch_eigs_sym(M: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(M)


def criteria_batch(x: np.ndarray, criteria: Iterable[str] = CRITERIA, tol: Tolerances = DEFAULT) -> dict[str, np.ndarray]:
    """All criterion values for a stack of PT spectra of shape (B, d).

    Undefined O_n entries are NaN. Also returns per-sample diagnostic flags.
    """
    criteria = set(criteria)
    thr = tol.detection
    B, d = x.shape
    P = np.empty((B, 6))
    P[:, 0] = d
    pw = np.ones_like(x)
    for k in range(1, 6):
        pw = pw * x
        P[:, k] = pw.sum(axis=1)
    out: dict[str, np.ndarray] = {"moments": P}
    out["negativity"] = 0.0 - np.sum(np.where(x < 0.0, x, 0.0), axis=1)

    def neg_part(w):
        return 0.0 - np.sum(np.where(w < 0.0, w, 0.0), axis=1)

    B1 = np.stack([P[:, [1, 2]], P[:, [2, 3]]], axis=1)
    out["n3"] = neg_part(_batch_eigs_sym(B1))
    if criteria & {"npt5", "onpt5"}:
        B2 = np.stack([P[:, [1, 2, 3]], P[:, [2, 3, 4]], P[:, [3, 4, 5]]], axis=1)
        out["n5"] = neg_part(_batch_eigs_sym(B2))
    else:
        out["n5"] = np.full(B, np.nan)

    p2 = P[:, 2]
    out["o3"] = np.maximum(p3_min_batch(np.clip(p2, 1.0 / d, 1.0), d) - P[:, 3], 0.0)
    o4 = np.full(B, np.nan)
    o5 = np.full(B, np.nan)
    if criteria & {"onpt4", "onpt5"}:
        m4 = out["o3"] <= thr
        if m4.any():
            lo, hi = p4_bounds_batch(p2[m4], P[m4, 3], d)
            o4[m4] = np.maximum(np.maximum(lo - P[m4, 4], P[m4, 4] - hi), 0.0)
        if "onpt5" in criteria:
            m5 = m4 & (np.nan_to_num(o4, nan=np.inf) <= thr)
            if m5.any():
                lo, hi = p5_bounds_batch(p2[m5], P[m5, 3], P[m5, 4], d)
                o5[m5] = np.maximum(np.maximum(lo - P[m5, 5], P[m5, 5] - hi), 0.0)
    out["o4"] = o4
    out["o5"] = o5

    det = {
        "npt": out["negativity"] > thr,
        "npt3": out["n3"] > thr,
        "onpt3": out["o3"] > thr,
    }
    det["onpt4"] = det["onpt3"] | (np.nan_to_num(o4) > thr)
    det["npt5"] = np.nan_to_num(out["n5"]) > thr
    det["onpt5"] = det["onpt4"] | (np.nan_to_num(o5) > thr)
    out["detected"] = {k: det[k] for k in CRITERIA if k in criteria}

    H = np.stack([P[:, [0, 1, 2]], P[:, [1, 2, 3]], P[:, [2, 3, 4]]], axis=1)
    wH = _batch_eigs_sym(H)
    diag = {
        "h_not_psd": wH[:, 0] < -tol.criterion_psd * np.maximum(1.0, wH[:, -1]),
        "order2_infeasible": (p2 < 1.0 / d - tol.moment) | (p2 > 1.0 + tol.moment),
        "npt3_not_onpt3": (out["n3"] > 1e-8) & ~(out["o3"] > 0.0),
        "npt3_not_npt5": (out["n3"] > 1e-8) & ~(np.nan_to_num(out["n5"], nan=np.inf) > 1e-12),
    }
    any_det = np.zeros(B, dtype=bool)
    for k, v in out["detected"].items():
        if k != "npt":
            any_det |= v
    diag["detected_not_npt"] = any_det & ~det["npt"]
    if "npt5" in criteria or "onpt5" in criteria:
        b_psd = (out["n3"] <= thr) & (out["n5"] <= thr)
        elben_ok = np.ones(B, dtype=bool)
        for n in range(3, 6):
            lhs = np.sign(P[:, n]) * np.abs(P[:, n]) ** (n - 2)
            rhs = np.sign(P[:, n - 1]) * np.abs(P[:, n - 1]) ** (n - 1)
            elben_ok &= lhs >= rhs - 1e-12 * np.abs(rhs)
        diag["hankel_psd_not_elben"] = b_psd & ~elben_ok
    else:
        diag["hankel_psd_not_elben"] = np.zeros(B, dtype=bool)
    out["diagnostics"] = diag
    return out


@dataclass
class SurveyResult:
    dim: int
    samples: int
    root_seed: int
    counts: dict[str, int]
    fractions: dict[str, float]
    stderr: dict[str, float]
    diagnostics: dict[str, int]
    mean_purity: float
    prng: str = PRNG_NAME
    threshold: float = DEFAULT.detection

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class _Partial:
    counts: dict[str, int]
    diagnostics: dict[str, int]
    purity_sum: float
    rows: list[list] = field(default_factory=list)


def _survey_chunk(args) -> _Partial:
    D, root_seed, start, count, criteria, tol, keep_rows = args
    rho = hs_batch(D * D, root_seed, start, count)
    x = np.linalg.eigvalsh(partial_transpose_matrix(rho, D, D))
    res = criteria_batch(x, criteria, tol)
    counts = {k: int(v.sum()) for k, v in res["detected"].items()}
    diags = {k: int(v.sum()) for k, v in res["diagnostics"].items()}
    rows = []
    if keep_rows:
        for i in range(count):
            rows.append(
                [start + i, res["moments"][i, 2], res["negativity"][i], res["n3"][i], res["n5"][i], res["o3"][i], res["o4"][i], res["o5"][i]]
                + [int(res["detected"][k][i]) for k in CRITERIA if k in res["detected"]]
            )
    return _Partial(counts, diags, float(res["moments"][:, 2].sum()), rows)


def run_survey(
    D: int,
    samples: int,
    root_seed: int = 0,
    criteria: Iterable[str] = CRITERIA,
    tol: Tolerances = DEFAULT,
    workers: int | None = None,
    rows_out: list | None = None,
) -> SurveyResult:
    """Detection fractions over Hilbert-Schmidt random D x D states.

    Sample i is drawn from its own Philox stream keyed by (root_seed, i), so
    the result does not depend on chunking or on the number of workers. If
    `rows_out` is a list, per-sample rows are appended to it in index order.
    """
    if D < 2 or samples < 1:
        raise ValidationError("need D >= 2 and samples >= 1")
    requested = set(criteria)
    unknown = requested - set(CRITERIA)
    if unknown:
        raise ValidationError(f"unknown criteria {sorted(unknown)}")
    criteria = tuple(k for k in CRITERIA if k in requested)
    tasks = [
        (D, root_seed, s, min(_CHUNK, samples - s), criteria, tol, rows_out is not None)
        for s in range(0, samples, _CHUNK)
    ]
    workers = worker_count() if workers is None else max(1, workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_survey_chunk, tasks))
    else:
        parts = [_survey_chunk(t) for t in tasks]
    counts = {k: sum(p.counts[k] for p in parts) for k in criteria}
    diags = {k: sum(p.diagnostics[k] for p in parts) for k in DIAGNOSTICS}
    frac = {k: counts[k] / samples for k in criteria}
    err = {k: math.sqrt(frac[k] * (1.0 - frac[k]) / samples) for k in criteria}
    if rows_out is not None:
        for p in parts:
            rows_out.extend(p.rows)
    return SurveyResult(
        dim=D,
        samples=samples,
        root_seed=root_seed,
        counts=counts,
        fractions=frac,
        stderr=err,
        diagnostics=diags,
        mean_purity=sum(p.purity_sum for p in parts) / samples,
        threshold=tol.detection,
    )


def survey_row_header(criteria: Sequence[str] = CRITERIA) -> list[str]:
    return ["index", "p2", "negativity", "n3", "n5", "o3", "o4", "o5"] + [k for k in CRITERIA if k in criteria]


# --- Ising sweeps ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    beta: float
    n3: float
    n5: float
    o3: float
    o4: float | None
    o5: float | None
    negativity: float


SWEEP_HEADER = ["beta", "n3", "n5", "o3", "o4", "o5", "negativity"]


def ising_sweep(params: IsingParams, beta_grid: Sequence[float], tol: Tolerances = DEFAULT) -> list[SweepRow]:
    """One criterion row per inverse temperature; H is diagonalized once."""
    if params.n_qubits > MAX_ISING_QUBITS:
        raise ScaleError(f"dense Ising model limited to {MAX_ISING_QUBITS} qubits, got {params.n_qubits}")
    chain = IsingSpectrum(params.n_qubits, params.coupling, params.field_ratio)
    rows = []
    for beta in beta_grid:
        if beta < 0:
            raise ValidationError("inverse temperature must be nonnegative")
        rep = analyze_state(chain.gibbs(float(beta), params.cut), 5, tol)
        rows.append(SweepRow(float(beta), rep.n3, rep.n5, rep.o3, rep.o4, rep.o5, rep.negativity))
    return rows


# --- gap between the optimal p_3 bound and p_2^2 ------------------------------------------


@dataclass(frozen=True)
class GapScan:
    p2: np.ndarray
    gap: np.ndarray
    p2_star: float
    max_gap: float


def relative_gap(p2) -> np.ndarray:
    """(p3_min - p2^2) / p2^2, with the dimension large enough not to bind."""
    p2 = np.asarray(p2, dtype=float)
    d = np.floor(1.0 / p2) + 2.0
    return (p3_min_batch(p2, d) - p2 * p2) / (p2 * p2)


def gap_scan(grid_points: int = 10_000) -> GapScan:
    """Scan p_2 over (0, 1], then polish the best grid point with a bounded 1-D search."""
    if grid_points < 100:
        raise ValidationError("grid_points must be >= 100")
    p2 = np.linspace(0.0, 1.0, grid_points + 1)[1:]
    gap = relative_gap(p2)
    i = int(np.argmax(gap))
    lo, hi = p2[max(i - 1, 0)], p2[min(i + 1, len(p2) - 1)]
    res = minimize_scalar(lambda t: -float(relative_gap(np.array([t]))[0]), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
    best = (float(res.x), float(-res.fun)) if -res.fun >= gap[i] else (float(p2[i]), float(gap[i]))
    return GapScan(p2, gap, best[0], best[1])


# --- measurement budget ---------------------------------------------------------------------


@dataclass(frozen=True)
class BudgetQuery:
    n_qubits: int
    moment_order: int
    p2_estimate: float
    epsilon: float
    delta: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1 or not 0 < self.delta < 1:
            raise ValidationError("epsilon and delta must lie in (0, 1)")
        if not 0 < self.p2_estimate <= 1:
            raise ValidationError("p2_estimate must lie in (0, 1]")
        if self.n_qubits < 1 or self.moment_order < 1:
            raise ValidationError("n_qubits and moment_order must be positive")


def budget_value(q: BudgetQuery) -> Decimal:
    """n^2 2^N p2^(n-1) / (eps^2 delta) before rounding.

    Evaluated in decimal arithmetic on the decimal form of the inputs, so
    round inputs such as eps = 0.1 give exact values.
    """
    n = Decimal(q.moment_order)
    value = n * n * Decimal(2) ** q.n_qubits * Decimal(repr(q.p2_estimate)) ** (q.moment_order - 1)
    return value / (Decimal(repr(q.epsilon)) ** 2 * Decimal(repr(q.delta)))


def sample_complexity(q: BudgetQuery) -> int:
    """Order-of-magnitude copy count M = ceil(budget_value(q))."""
    return int(budget_value(q).to_integral_value(rounding=ROUND_CEILING))


# --- output ------------------------------------------------------------------------------------


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "" if math.isnan(x) else format(x, ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")
