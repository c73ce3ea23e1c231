"""Entanglement criteria from moments of the partially transposed density matrix."""

from .bounds import OptimalBounds, OpptViolation, optimal_bounds, oppt_chain, oppt_violation, p3_bounds, p4_bounds, p5_bounds
from .config import DEFAULT, Tolerances
from .errors import PtMomentError
from .hankel import build_hankel, elben_higher_check, hankel_negativity, pn_ppt_check
from .linalg import BipartiteState, Spectrum, partial_transpose, trace_norm
from .moment_problem import flat_extension, membership_Mn, membership_Mn_plus, realize_moments
from .moments import MomentVector, pt_moments, pt_spectrum
from .report import CriterionReport, analyze_spectrum, analyze_state
from .states import IsingParams, bell_state, build_counterexample, ising_gibbs, sample_hs, werner
from .survey import BudgetQuery, SurveyResult, gap_scan, ising_sweep, run_survey, sample_complexity

__version__ = "0.1.0"
