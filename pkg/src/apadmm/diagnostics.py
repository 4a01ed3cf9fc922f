"""Optimality measures and residual checks for recorded runs.

The residual suite replays a stored trace (with per-iteration state
snapshots) and verifies, observationally, the quantities the solver's
certificates promise:

* dual identity: the stored dual of each component equals the negated
  gradient at the copy its stale index points to, recomputed from the
  problem data (not from the solver's own stored gradient);
* per-iteration descent and the telescoped descent bound of the
  augmented Lagrangian, with general-class margins;
* the staleness-window bound on successive dual differences;
* the lower bound on the augmented Lagrangian in terms of the best
  observed objective and the feasible-set diameter.

Checks never abort a run; they return a report with pass/fail/skipped
status, the worst margin seen, and the offending iterations.
"""

from dataclasses import dataclass, field

import numpy as np

from .problems import (
    augmented_lagrangian,
    ball_diameter,
    feasibility_gap,
    smooth_gradient,
)
from .prox import prox_l1_ball
from .stepsize import descent_margin

__all__ = [
    "proximal_gradient",
    "optimality_measure",
    "penalized_surrogates",
    "trace_residuals",
    "CheckOutcome",
    "TraceReport",
]


def proximal_gradient(problem, x):
    """Proximal-gradient residual ``x - prox(x - grad g(x))`` with unit step.

    The prox is the l1-plus-ball operator with the problem's own l1
    weight. A zero residual certifies a stationary point.
    """
    x = np.asarray(x, dtype=float)
    inner = x - smooth_gradient(problem, x)
    return x - prox_l1_ball(inner, problem.l1_weight, problem.radius)


def optimality_measure(problem, state):
    """Progress measure: relative consensus gap plus proximal-gradient norm."""
    _, gap_rel = feasibility_gap(state)
    return gap_rel + float(np.linalg.norm(proximal_gradient(problem, state.x)))


def penalized_surrogates(problem, state, rho, k, at=None):
    """The three penalized subobjectives of component k at a point.

    Returns ``(exact, fresh, stale)`` where all three share the linear
    dual term and quadratic penalty around the state's master vector;
    ``exact`` uses the true component value at the point, ``fresh``
    linearizes the component at the master vector, and ``stale``
    linearizes with the stored (possibly stale) gradient but keeps the
    fresh constant term. The solver's local update is the exact argmin of
    the stale form.
    """
    rho = np.asarray(rho, dtype=float)
    comp = problem.components[k]
    z = np.asarray(state.x_local[k] if at is None else at, dtype=float)
    diff = z - state.x
    shared = float(state.y[k] @ diff) + 0.5 * rho[k] * float(diff @ diff)
    base = comp.value(state.x)
    exact = comp.value(z) + shared
    fresh = base + float(comp.gradient(state.x) @ diff) + shared
    stale = base + float(state.grad_stored[k] @ diff) + shared
    return exact, fresh, stale


@dataclass
class CheckOutcome:
    """One residual check: status, tightest margin, and failing iterations.

    ``worst_slack`` is the smallest (allowed - observed) margin across the
    trace; negative means the check failed at some iteration.
    """

    name: str
    status: str
    worst_slack: float = None
    failing: list = field(default_factory=list)

    def line(self):
        if self.status == "skipped":
            return "SKIP %s (trace too short)" % self.name
        extra = "" if not self.failing else " failing at %s" % self.failing[:5]
        return "%s %s worst_slack=%.3e%s" % (
            self.status.upper(), self.name, self.worst_slack, extra)


@dataclass
class TraceReport:
    outcomes: list

    @property
    def passed(self):
        return all(o.status != "fail" for o in self.outcomes)

    def lines(self):
        return [o.line() for o in self.outcomes]


def _outcome(name, margins, failing):
    if not margins:
        return CheckOutcome(name, "skipped")
    status = "fail" if failing else "pass"
    return CheckOutcome(name, status, float(min(margins)), failing)


def trace_residuals(problem, trace, rho, delay_bounds,
                    dual_tol=1e-9, descent_tol=1e-9, telescope_tol=1e-6,
                    dual_diff_tol=1e-9, lower_tol=1e-6):
    """Residual report for a stored run.

    Needs per-iteration state snapshots (runs recorded with full tracing);
    raises ValueError without them. History-window checks are skipped when
    the trace is shorter than max(T_k) + 2 iterations.
    """
    if trace.states is None or len(trace.states) != len(trace) + 1:
        raise ValueError(
            "trace has no per-iteration state snapshots; "
            "rerun with full_trace enabled")
    rho = np.asarray(rho, dtype=float)
    delay_bounds = np.asarray(delay_bounds, dtype=float)
    states = trace.states
    rows = len(trace)
    K = problem.num_components
    lipschitz = problem.lipschitz_constants()
    outcomes = []

    def x_at(index):
        # master vector of iteration ``index``; indices before the start
        # clamp to the initial state (nothing moved before iteration 1)
        return states[max(int(index) - 1, 0)].x

    # dual identity, recomputed from problem data at the stale copies
    margins, failing = [], []
    for r in range(1, rows + 1):
        st = states[r]
        worst = np.inf
        for k in range(K):
            grad = problem.components[k].gradient(x_at(st.stale_index[k]))
            resid = float(np.linalg.norm(grad + st.y[k]))
            allowed = dual_tol * (1.0 + float(np.linalg.norm(st.y[k])))
            worst = min(worst, allowed - resid)
        margins.append(worst)
        if worst < 0:
            failing.append(r)
    outcomes.append(_outcome("dual_identity", margins, failing))

    # per-iteration descent of the augmented Lagrangian
    lagrangian = [augmented_lagrangian(problem, states[0], rho)]
    lagrangian += list(trace.lagrangian)
    margins, failing = [], []
    for r in range(1, len(lagrangian)):
        allowed = descent_tol * (1.0 + abs(lagrangian[r - 1]))
        margins.append(lagrangian[r - 1] + allowed - lagrangian[r])
        if margins[-1] < 0:
            failing.append(r)
    outcomes.append(_outcome("descent", margins, failing))

    # telescoped descent with general-class margins
    total_claim = 0.0
    alphas = np.array([
        descent_margin(rho[k], lipschitz[k], delay_bounds[k], "general")
        for k in range(K)
    ])
    for r in range(1, rows + 1):
        dxk = states[r].x_local - states[r - 1].x_local
        dx = states[r].x - states[r - 1].x
        total_claim += float(
            ((rho - 7.0 * lipschitz) / 2.0) @ (dxk * dxk).sum(axis=1))
        total_claim += float(alphas.sum() * (dx @ dx))
    drop = lagrangian[0] - lagrangian[-1]
    slack = telescope_tol * (1.0 + max(abs(drop), abs(total_claim)))
    margin = drop + slack - total_claim
    outcomes.append(_outcome("telescoped_descent", [margin],
                             [] if margin >= 0 else [rows]))

    # dual-difference bound over the staleness window
    t_max = int(delay_bounds.max())
    if rows < t_max + 2:
        outcomes.append(CheckOutcome("dual_difference", "skipped"))
    else:
        margins, failing = [], []
        for r in range(1, rows + 1):
            worst = np.inf
            for k in range(K):
                dy = states[r].y[k] - states[r - 1].y[k]
                window = 0.0
                T_k = int(delay_bounds[k])
                for i in range(T_k + 1):
                    step = x_at(r + 1 - i) - x_at(r - i)
                    window += float(step @ step)
                bound = lipschitz[k] ** 2 * (T_k + 1) * window + dual_diff_tol
                worst = min(worst, bound - float(dy @ dy))
            margins.append(worst)
            if worst < 0:
                failing.append(r)
        outcomes.append(_outcome("dual_difference", margins, failing))

    # lower bound from best observed objective and feasible diameter
    objectives = [float(np.asarray(o)) for o in trace.objective]
    f_best = min(objectives) if objectives else np.inf
    floor = f_best - ball_diameter(problem) ** 2 * lipschitz.sum() / 2.0
    margins, failing = [], []
    for r, val in enumerate(lagrangian):
        margins.append(val + lower_tol - floor)
        if margins[-1] < 0:
            failing.append(r)
    outcomes.append(_outcome("lower_bound", margins, failing))

    return TraceReport(outcomes)
