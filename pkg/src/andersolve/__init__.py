"""Anderson acceleration for perturbed Newton methods with gamma-safeguarding."""

from .anderson import AndersonWindow, anderson_step, combine, depth_one_gamma, solve_gamma
from .bench import SuiteSpec, TrialSummary, parse_label, run_suite
from .driver import IterationTrace, RunRecord, SolveConfig, observed_order, solve
from .errors import AndersolveError
from .library import beh_problem, chandrasekhar, ChandrasekharConfig, get_problem, singular_toy
from .problem import NonlinearProblem, transform
from .safeguard import Controller, SafeguardMode, gamma_safeguard, safeguarded_combine
from .steppers import ForcingConfig, MuSchedule, StepperConfig

__version__ = "0.1.0"

__all__ = [
    "AndersolveError",
    "AndersonWindow",
    "ChandrasekharConfig",
    "Controller",
    "ForcingConfig",
    "IterationTrace",
    "MuSchedule",
    "NonlinearProblem",
    "RunRecord",
    "SafeguardMode",
    "SolveConfig",
    "StepperConfig",
    "SuiteSpec",
    "TrialSummary",
    "anderson_step",
    "beh_problem",
    "chandrasekhar",
    "combine",
    "depth_one_gamma",
    "gamma_safeguard",
    "get_problem",
    "observed_order",
    "parse_label",
    "run_suite",
    "safeguarded_combine",
    "singular_toy",
    "solve",
    "solve_gamma",
    "transform",
]
