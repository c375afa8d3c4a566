"""Multi-trial benchmark suites with seeded random starting vectors.

Algorithm variants are named by labels such as ``Newt``, ``AALM(5)`` or
``γAAinNewt(10,0.9)``; :func:`parse_label` turns a label into a
:class:`~andersolve.driver.SolveConfig`.  A suite runs every variant from
the same set of random starts and reduces each to a :class:`TrialSummary`.
"""

import csv
import io
import json
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .driver import SolveConfig, solve
from .safeguard import SafeguardMode
from .steppers import MuSchedule, StepperConfig

THREADS_ENV = "ANDERSOLVE_THREADS"

_BASES = {"Newt": "newton", "inNewt": "inexact_newton", "LM": "lm", "inLM": "inexact_lm"}
_LABEL_RE = re.compile(
    r"^(?P<g>[γg])?(?P<aa>AA)?(?P<base>inNewt|Newt|inLM|LM)"
    r"(?:\((?P<m>\d+)(?:,(?P<r>[0-9.eE+-]+))?\))?$"
)


def trial_seed(seed, t):
    """Seed of trial ``t``; independent of execution order."""
    return seed ^ t


def parse_label(label, tol=1e-8, max_iter=100, mu=None, tau=0.1, p_exponent=2.0):
    """Build the solver configuration named by ``label``.

    ``γ`` (or ``g``) requests safeguarding: preasymptotic at depth 1 and
    asymptotic with switch threshold ``tau`` at larger depths.  ``mu``
    overrides the problem's default LM schedule.
    """
    match = _LABEL_RE.match(label.strip())
    if match is None:
        raise ValueError(f"cannot parse algorithm label {label!r}")
    safe, aa, m, r = match["g"], match["aa"], match["m"], match["r"]
    if aa is None and (m is not None or safe):
        raise ValueError(f"{label!r}: depth and safeguarding need an AA prefix")
    if aa is not None and m is None:
        raise ValueError(f"{label!r}: AA labels need a depth, e.g. AANewt(1)")
    if r is not None and not safe:
        raise ValueError(f"{label!r}: r is only meaningful with safeguarding")
    depth = int(m) if m is not None else 0
    if safe:
        mode = "preasymptotic" if depth == 1 else "asymptotic"
        sg = SafeguardMode(mode, r=float(r) if r is not None else 0.9, p_exponent=p_exponent, tau=tau)
    else:
        sg = SafeguardMode("off")
    stepper = StepperConfig(_BASES[match["base"]], mu_schedule=mu or MuSchedule())
    return SolveConfig(stepper=stepper, aa_depth_m=depth, safeguard=sg, tol=tol, max_iter=max_iter)


def build_variants(labels, problem=None, mu=None, **kwargs):
    """Map each label to its configuration.

    The LM schedule is ``mu`` when given, else the problem's own default.
    """
    if mu is None and problem is not None:
        mu = problem.mu_schedule
    return {label: parse_label(label, mu=mu, **kwargs) for label in labels}


@dataclass(frozen=True)
class TrialSummary:
    """Outcome of one algorithm variant over all trials.

    The means run over converged trials only and are ``nan`` when every
    trial failed.
    """

    label: str
    trials: int
    failures: int
    mean_iterations: float
    mean_final_residual: float

    @classmethod
    def from_records(cls, label, records):
        ok = [r for r in records if r.converged]
        its = float(np.mean([r.iterations for r in ok])) if ok else math.nan
        res = float(np.mean([r.final_residual for r in ok])) if ok else math.nan
        return cls(label, len(records), len(records) - len(ok), its, res)


@dataclass(frozen=True)
class SuiteSpec:
    """A problem, the variants to compare, and the trial protocol.

    ``variants`` maps labels to configurations.  ``problem`` must provide
    ``sample_x0`` when ``random_start`` is true; otherwise every trial
    starts from ``problem.x0``.
    """

    name: str
    problem: object
    variants: dict
    trials: int = 50
    seed: int = 0
    random_start: bool = True

    def __post_init__(self):
        if not self.variants:
            raise ValueError("suite needs at least one variant")
        if self.trials < 1:
            raise ValueError("suite needs at least one trial")
        if self.random_start and self.problem.sample_x0 is None:
            raise ValueError(f"problem {self.problem.name} has no random start distribution")

    def start(self, t):
        if not self.random_start:
            return np.array(self.problem.x0, dtype=float)
        return self.problem.sample_x0(np.random.default_rng(trial_seed(self.seed, t)))


def worker_count(env=None):
    env = os.environ if env is None else env
    cap = os.cpu_count() or 1
    raw = env.get(THREADS_ENV)
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, cap)


def run_suite(spec, workers=None):
    """Run every variant on every trial and return one summary per variant.

    Trials may run in a thread pool of ``workers`` threads (default from
    ``ANDERSOLVE_THREADS``).  Results are gathered by trial index, so the
    output does not depend on scheduling.
    """
    workers = worker_count() if workers is None else max(1, workers)
    starts = [spec.start(t) for t in range(spec.trials)]
    jobs = [(label, cfg, t) for label, cfg in spec.variants.items() for t in range(spec.trials)]

    def run(job):
        label, cfg, t = job
        cfg = replace(cfg, seed=trial_seed(spec.seed, t))
        return solve(spec.problem, starts[t], cfg, keep_iterates=False)

    if workers == 1:
        records = [run(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, jobs))

    out = []
    for i, label in enumerate(spec.variants):
        out.append(TrialSummary.from_records(label, records[i * spec.trials : (i + 1) * spec.trials]))
    return out


# --- table presets ------------------------------------------------------

_DEPTHS = (1, 5, 10, 50)


def _family(base):
    labels = [base]
    for m in _DEPTHS:
        labels += [f"AA{base}({m})", f"γAA{base}({m},0.9)"]
    return labels


@dataclass(frozen=True)
class TablePreset:
    omega: float
    labels: list = field(default_factory=list)


TABLES = {
    "table1": TablePreset(1.0, _family("Newt") + _family("inNewt")),
    "table2": TablePreset(1.0, _family("LM") + _family("inLM")),
    "table3": TablePreset(0.8, _family("Newt") + _family("LM")),
}


# --- emission -----------------------------------------------------------

CSV_FIELDS = ("label", "trials", "failures", "mean_iters", "mean_resid")


def _row(s):
    return {
        "label": s.label,
        "trials": s.trials,
        "failures": s.failures,
        "mean_iters": s.mean_iterations,
        "mean_resid": s.mean_final_residual,
    }


def summaries_to_csv(summaries):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for s in summaries:
        writer.writerow([s.label, s.trials, s.failures, f"{s.mean_iterations:.17g}", f"{s.mean_final_residual:.17g}"])
    return buf.getvalue()


def summaries_from_csv(text):
    rows = csv.DictReader(io.StringIO(text))
    return [
        TrialSummary(r["label"], int(r["trials"]), int(r["failures"]), float(r["mean_iters"]), float(r["mean_resid"]))
        for r in rows
    ]


def summaries_to_json(summaries, suite, seed):
    rows = []
    for s in summaries:
        row = _row(s)
        # JSON has no nan; all-failure means are null
        for key in ("mean_iters", "mean_resid"):
            if math.isnan(row[key]):
                row[key] = None
        rows.append(row)
    return json.dumps({"suite": suite, "seed": seed, "rows": rows}, indent=2, ensure_ascii=False)


def summaries_from_json(text):
    data = json.loads(text)
    nan = lambda v: math.nan if v is None else float(v)  # noqa: E731
    return [
        TrialSummary(r["label"], r["trials"], r["failures"], nan(r["mean_iters"]), nan(r["mean_resid"]))
        for r in data["rows"]
    ]
