"""Command-line front end: ``ptmoment <command> ...``.

Every command exits with status 0 on success and 2 on malformed input or a
structural error. Detecting entanglement is reported as data, never as a
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io, survey
from .bounds import optimal_bounds
from .config import DEFAULT
from .errors import NotPSDRealizableError, PtMomentError, SingularHankelError
from .moment_problem import membership_Mn, membership_Mn_plus, realize_moments
from .moments import MomentVector, pt_spectrum
from .report import analyze_state
from .states import (
    CounterexampleParams,
    IsingParams,
    bell_state,
    build_counterexample,
    maximally_mixed,
    sample_hs,
    werner,
)

EXIT_INPUT = 2


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _grid(text: str) -> list[float]:
    """Either a list "0,0.5,1" or a range "start:stop:count"."""
    if ":" in text:
        try:
            a, b, n = text.split(":")
            return list(np.linspace(float(a), float(b), int(n)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}") from None
    return _floats(text)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _tol(args):
    return DEFAULT if args.tol is None else DEFAULT.with_detection(args.tol)


# --- commands -----------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    state = io.read_state(args.state)
    rep = analyze_state(state, args.order, _tol(args))
    d = rep.to_dict()
    d["detected"] = rep.detected(_tol(args))
    _emit(json.dumps(d, indent=2), args.out)
    return 0


def cmd_state(args) -> int:
    kind = args.kind
    if kind == "bell":
        st = bell_state()
    elif kind == "mixed":
        st = maximally_mixed(args.dim, args.dim)
    elif kind == "werner":
        st = werner(args.dim)
    else:
        st = sample_hs(args.dim, args.dim, args.seed)
    text = json.dumps(io.state_to_dict(st))
    _emit(text, args.out)
    return 0


def cmd_survey(args) -> int:
    rows: list | None = [] if args.out else None
    res = survey.run_survey(args.dim, args.samples, args.seed, args.criteria or survey.CRITERIA, _tol(args), rows_out=rows)
    if args.out:
        survey.write_csv(args.out, survey.survey_row_header(res.counts), rows)
    if args.summary:
        survey.write_json(args.summary, res.to_dict())
    print(f"D={res.dim} samples={res.samples} seed={res.root_seed} prng={res.prng}")
    for k in res.counts:
        print(f"{k:6s} {100 * res.fractions[k]:7.2f}%  +- {100 * res.stderr[k]:.2f}  ({res.counts[k]})")
    bad = {k: v for k, v in res.diagnostics.items() if v}
    print("diagnostics:", "none" if not bad else bad)
    return 0


def cmd_ising(args) -> int:
    params = IsingParams(args.qubits, args.coupling, args.field, cut=args.cut or ())
    rows = survey.ising_sweep(params, args.betas, _tol(args))
    table = [[r.beta, r.n3, r.n5, r.o3, r.o4, r.o5, r.negativity] for r in rows]
    if args.out:
        survey.write_csv(args.out, survey.SWEEP_HEADER, table)
    else:
        print(",".join(survey.SWEEP_HEADER))
        for r in table:
            print(",".join(survey.fmt(v) for v in r))
    return 0


def cmd_bounds(args) -> int:
    p = [float(args.dim), 1.0, args.p2]
    if args.order >= 4:
        if args.p3 is None:
            raise argparse.ArgumentTypeError("--p3 is required for order >= 4")
        p.append(args.p3)
    if args.order == 5:
        if args.p4 is None:
            raise argparse.ArgumentTypeError("--p4 is required for order 5")
        p.append(args.p4)
    b = optimal_bounds(p, args.order, args.dim)
    if not b.feasible:
        print(f"infeasible: {b.reason}")
        return 0
    print(f"p{args.order}_min = {b.p_min!r}")
    print(f"p{args.order}_max = {b.p_max!r}")
    for k, v in b.multiplicities.items():
        print(f"{k} = {v}")
    print("spectrum_min =", " ".join(repr(float(x)) for x in b.spectrum_min.values))
    print("spectrum_max =", " ".join(repr(float(x)) for x in b.spectrum_max.values))
    return 0


def cmd_budget(args) -> int:
    q = survey.BudgetQuery(args.qubits, args.order, args.p2, args.eps, args.delta)
    print(survey.sample_complexity(q))
    return 0


def moments_check_text(values, stieltjes: bool = False) -> str:
    m = MomentVector(values)
    n = m.order
    if stieltjes:
        member = membership_Mn_plus(m)
        head = f"in cl(M_{n}^+): {'yes' if member else 'no'}"
    else:
        member = membership_Mn(m)
        head = f"in cl(M_{n}): {'yes' if member else 'no'}"
    parts = [head]
    try:
        realize_moments(m)
        parts.append("exactly realizable: yes")
        exact = True
    except SingularHankelError:
        parts.append("exactly realizable: no (singular Hankel)")
        exact = False
    if stieltjes:
        if not exact:
            parts.append("PSD-realizable: no (singular Hankel)")
        else:
            try:
                realize_moments(m, require_psd_observable=True)
                parts.append("PSD-realizable: yes")
            except NotPSDRealizableError as exc:
                w = " ".join(f"{x:.6g}" for x in exc.witness)
                parts.append(f"PSD-realizable: no (witness {w})")
    return "; ".join(parts)


def cmd_moments_check(args) -> int:
    print(moments_check_text(args.moments, args.stieltjes))
    return 0


def cmd_counterexample(args) -> int:
    ce = build_counterexample(CounterexampleParams(args.d1, args.lam, args.blocks))
    x = pt_spectrum(ce.state).values
    p2, p3 = float(np.sum(x**2)), float(np.sum(x**3))
    print(f"dims = {ce.state.dim_a}x{ce.state.dim_b}")
    print(f"noise_weight = {ce.noise_weight!r}")
    print(f"noise_blocks = {ce.noise_blocks}")
    print(f"p3 - p2^2 = {p3 - p2 * p2!r}")
    print(f"lambda_min + lambda_max = {float(x[0] + x[-1])!r}")
    if args.out:
        io.write_state(args.out, ce.state)
    return 0


def cmd_gap_scan(args) -> int:
    g = survey.gap_scan(args.grid)
    print(f"p2* = {g.p2_star!r}")
    print(f"max relative gap = {g.max_gap!r}")
    if args.out:
        survey.write_csv(args.out, ["p2", "relative_gap"], zip(g.p2, g.gap))
    return 0


# --- parser --------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ptmoment", description="PT-moment entanglement criteria")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_help="output file"):
        p.add_argument("--tol", type=float, default=None, help="detection threshold (default 1e-9)")
        p.add_argument("--out", default=None, help=out_help)

    p = sub.add_parser("analyze", help="all criteria for a state file")
    p.add_argument("state")
    p.add_argument("--order", type=int, default=5, choices=(3, 4, 5))
    common(p, "write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("state", help="write a fixture state file")
    p.add_argument("kind", choices=("bell", "mixed", "werner", "hs"))
    p.add_argument("--dim", type=int, default=2, help="local dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("survey", help="detection fractions over random states")
    p.add_argument("--dim", "-D", type=int, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--criteria", type=lambda s: s.split(","), default=None)
    p.add_argument("--summary", default=None, help="JSON summary file")
    common(p, "per-sample CSV")
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("ising", help="criteria along a temperature sweep")
    p.add_argument("--qubits", "-N", type=int, default=8)
    p.add_argument("--coupling", "-J", type=float, default=1.0)
    p.add_argument("--field", "-g", type=float, default=2.5)
    p.add_argument("--cut", type=_ints, default=None, help="1-based sites of A (default first half)")
    p.add_argument("--betas", type=_grid, default=_grid("0:10:41"))
    common(p, "CSV output")
    p.set_defaults(func=cmd_ising)

    p = sub.add_parser("bounds", help="optimal range of p_n")
    p.add_argument("--p2", type=float, required=True)
    p.add_argument("--p3", type=float, default=None)
    p.add_argument("--p4", type=float, default=None)
    p.add_argument("--dim", "-d", type=int, required=True)
    p.add_argument("--order", "-n", type=int, default=3, choices=(3, 4, 5))
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("budget", help="measurement budget estimate")
    p.add_argument("--qubits", "-N", type=int, required=True)
    p.add_argument("--order", "-n", type=int, required=True)
    p.add_argument("--p2", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(func=cmd_budget)

    p = sub.add_parser("moments-check", help="truncated moment problem membership")
    p.add_argument("moments", type=_floats, help="m_0,m_1,...,m_n")
    p.add_argument("--stieltjes", action="store_true", help="require a PSD observable")
    p.set_defaults(func=cmd_moments_check)

    p = sub.add_parser("counterexample", help="state with p3 >= p2^2 but a negative lambda_min + lambda_max")
    p.add_argument("--d1", type=int, default=3)
    p.add_argument("--lam", type=float, default=None)
    p.add_argument("--blocks", type=int, default=None)
    p.add_argument("--out", default=None, help="state file")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("gap-scan", help="largest relative gap between the optimal p3 bound and p2^2")
    p.add_argument("--grid", type=int, default=10_000)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gap_scan)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (PtMomentError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
