"""Engine for personalized top-k set queries over expensive construct scores.

Candidate sets are scored by a decomposable function whose construct
values come from an oracle one question at a time. The engine keeps
score bounds per candidate, estimates each candidate's probability of
being the true answer, asks the question expected to cut uncertainty
the most and stops as soon as the winner is provable.
"""

from .bounds import Interval, dominates, eliminated_bounds, score_bounds
from .distributions import (DiscretePdf, GridMismatchError, geq_probability,
                            geq_probability_naive, point_mass, uniform_pdf)
from .engine import (Policy, SolveLimitError, SolveResult, TraceStep,
                     enumerate_candidates, find_winner, prune_dominated, solve)
from .harness import (ExperimentConfig, generate_synthetic, load_problem,
                      run_experiment, write_bundle)
from .model import (Candidate, Construct, KnownStore, Problem, Question,
                    ScoringSpec, ValidationError, question_universe,
                    questions_of, unknown_questions)
from .oracle import (LlmOracle, LlmOracleConfig, OracleError, OracleResponse,
                     ResponsePdf, TableOracle, process_responses, snap_to_grid)
from .selection import entropy, qef_score, select_entrred, select_random
from .winner import (CapExceededError, WinnerDistribution, brute_force_dist,
                     normalize, prob_dep, prob_ind)

__version__ = "0.1.0"

__all__ = [
    "Candidate", "CapExceededError", "Construct", "DiscretePdf",
    "ExperimentConfig", "GridMismatchError", "Interval", "KnownStore",
    "LlmOracle", "LlmOracleConfig", "OracleError", "OracleResponse",
    "Policy", "Problem", "Question", "ResponsePdf", "ScoringSpec",
    "SolveLimitError", "SolveResult", "TableOracle", "TraceStep",
    "ValidationError", "WinnerDistribution", "brute_force_dist", "dominates",
    "eliminated_bounds", "entropy", "enumerate_candidates", "find_winner",
    "generate_synthetic", "geq_probability", "geq_probability_naive",
    "load_problem", "normalize", "point_mass", "prob_dep", "prob_ind",
    "process_responses", "prune_dominated", "qef_score", "question_universe",
    "questions_of", "run_experiment", "score_bounds", "select_entrred",
    "select_random", "snap_to_grid", "solve", "uniform_pdf",
    "unknown_questions", "write_bundle",
]
