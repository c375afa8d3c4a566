"""The solve loop: stepper + Anderson window + safeguard controller."""

import math
from dataclasses import dataclass, field

import numpy as np

from .anderson import AndersonWindow, combine, depth_one_gamma, gain, solve_gamma
from .errors import (
    AndersolveError,
    DegenerateDifference,
    EvaluationError,
    InsufficientHistory,
    NoConvergence,
    SingularMatrix,
)
from .safeguard import Controller, SafeguardMode, gamma_safeguard, safeguarded_combine
from .steppers import Stepper, StepperConfig

STATUSES = ("converged", "max_iter_failure", "linear_solve_failure", "evaluation_failure")


@dataclass(frozen=True)
class SolveConfig:
    stepper: StepperConfig = field(default_factory=StepperConfig)
    aa_depth_m: int = 0
    safeguard: SafeguardMode = field(default_factory=SafeguardMode)
    tol: float = 1e-8
    max_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.aa_depth_m < 0:
            raise ValueError("aa_depth_m must be non-negative")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        # raises ConfigError on an invalid mode/depth pairing
        Controller(self.safeguard, self.aa_depth_m)


@dataclass
class IterationTrace:
    k: int
    residual: float
    grad_norm: float
    step_norm: float
    eta: float
    gamma: float
    lam: float
    theta: float
    regime: str
    mu: float
    branch: str = ""
    forcing: float = 0.0


@dataclass
class RunRecord:
    config: SolveConfig
    traces: list
    status: str
    iterations: int
    final_metric: float
    final_residual: float
    x: np.ndarray
    iterates: list = field(default_factory=list, repr=False)
    message: str = ""

    @property
    def converged(self):
        return self.status == "converged"


def solve(p, x0, cfg=SolveConfig(), keep_iterates=True):
    """Run one solve and return its full :class:`RunRecord`.

    Termination is tested on ``x_k`` before any step is taken, so
    ``iterations`` counts accepted updates.  Stepper and evaluation errors
    end the run with a failure status; they are not raised.
    """
    x = np.array(x0, dtype=float)
    if x.shape != (p.dimension,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({p.dimension},)")
    stepper = Stepper(cfg.stepper)
    controller = Controller(cfg.safeguard, cfg.aa_depth_m)
    window = AndersonWindow(cfg.aa_depth_m)
    sg = cfg.safeguard
    need_jt_f = p.gradient_norm_termination or cfg.stepper.kind in ("lm", "inexact_lm")

    traces = []
    iterates = [x.copy()] if keep_iterates else []
    x_prev = w_prev = None
    status, message = "max_iter_failure", ""
    metric = fnorm = math.nan

    for k in range(cfg.max_iter + 1):
        try:
            fx = p.f(x)
            J = p.jac(x, fx)
        except (EvaluationError, FloatingPointError, OverflowError) as exc:
            status, message = "evaluation_failure", str(exc)
            break
        fnorm = float(np.linalg.norm(fx))
        metric = p.metric(fx, J)
        if metric < cfg.tol:
            status = "converged"
            break
        if k == cfg.max_iter:
            break

        try:
            step = stepper(p, x, fx, J)
        except (SingularMatrix, NoConvergence, AndersolveError, np.linalg.LinAlgError) as exc:
            status, message = "linear_solve_failure", f"{type(exc).__name__}: {exc}"
            break
        w = step.w
        wnorm = float(np.linalg.norm(w))
        grad = float(np.linalg.norm(J.T @ fx)) if need_jt_f else math.nan

        eta, gamma, lam, theta, branch = 0.0, 0.0, 0.0, 1.0, ""
        if k == 0 or wnorm == 0.0:
            regime = "pnm_only"
            x_new = x + w
        else:
            window.push(w - w_prev, x - x_prev)
            regime = controller.update(wnorm, fnorm)
            eta = wnorm / float(np.linalg.norm(w_prev))
            if regime == "aa_m":
                g, theta = solve_gamma(window, w)
                x_new = combine(x, w, window, g)
                gamma = float(g[0]) if g.size == 1 else float(np.linalg.norm(g))
                lam = 1.0
            elif regime == "safeguarded_aa1":
                try:
                    gamma = depth_one_gamma(w, w_prev)
                except DegenerateDifference:
                    gamma = 0.0
                dec = gamma_safeguard(gamma, wnorm, float(np.linalg.norm(w_prev)), sg.r, sg.p_exponent)
                lam, branch = dec.lam, dec.branch
                x_new = safeguarded_combine(x, x_prev, w, w_prev, gamma, lam)
                # gain of the correction actually applied
                theta = min(gain(w, (w - w_prev)[:, None], np.array([lam * gamma])), 1.0)
            else:
                x_new = x + w

        traces.append(
            IterationTrace(
                k=k,
                residual=fnorm,
                grad_norm=grad,
                step_norm=wnorm,
                eta=eta,
                gamma=gamma,
                lam=lam,
                theta=theta,
                regime=regime,
                mu=step.mu_used,
                branch=branch,
                forcing=step.eta_used,
            )
        )
        if not np.all(np.isfinite(x_new)):
            status, message = "evaluation_failure", "iterate became non-finite"
            break
        x_prev, w_prev, x = x, w, x_new
        if keep_iterates:
            iterates.append(x.copy())

    return RunRecord(
        config=cfg,
        traces=traces,
        status=status,
        iterations=len(traces),
        final_metric=metric,
        final_residual=fnorm,
        x=x,
        iterates=iterates,
        message=message,
    )


def observed_order(record, tail=3, reference=None):
    """Fitted convergence order from the tail of a run.

    The order is the least-squares slope of ``log e_{k+1}`` against
    ``log e_k`` over the last ``tail`` error pairs.  Errors are distances to
    ``reference``, or to the final iterate when no reference is given (the
    final iterate itself is then excluded).  Zero errors are skipped.
    """
    xs = record.iterates
    if reference is None:
        if len(xs) < 2:
            raise InsufficientHistory("no iterates recorded")
        reference, xs = xs[-1], xs[:-1]
    errs = [float(np.linalg.norm(np.asarray(x) - reference)) for x in xs]
    while errs and errs[-1] == 0.0:
        errs.pop()
    if len(errs) < tail + 1 or min(errs[-(tail + 1) :]) <= 0.0:
        raise InsufficientHistory(f"need {tail + 1} nonzero errors, have {len(errs)}")
    logs = np.log(errs[-(tail + 1) :])
    slope = np.polyfit(logs[:-1], logs[1:], 1)[0]
    return float(slope)
