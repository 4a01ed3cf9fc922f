"""Consensus solvers: asynchronous proximal updates plus synchronous baselines.

Every algorithm shares the same master step: average the local copies and
duals, then apply the l1-plus-ball proximal map with weight scaled by the
total penalty. They differ in where the component gradients come from:

* ``async_padmm``: gradients arrive over a simulated star network; each
  master iteration broadcasts the new x, waits one window, and applies
  whatever gradients arrived (stale copies allowed, bounded staleness
  enforced or observed per config). All local copies and duals are
  refreshed every iteration, recently arrived gradients or not.
* ``async_padmm_incremental_variant``: same, but only components whose
  gradient arrived this window refresh their local copy and dual. No
  descent certificate is claimed for this variant.
* ``sync_padmm``: every component contributes a fresh gradient at the new
  x each update (the zero-delay protocol).
* ``sync_admm``: every component solves its penalized subproblem exactly;
  requires components that expose an exact solver and penalties above the
  component curvature.

Time accounting: the reported iteration count is the simulated master
clock in window units. Async iterations cost exactly 1. Synchronous
updates block on the slowest worker and cost ``max(1, ceil(max_k
round_trip_k))``, so delay inflates their clock, not their update count.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .problems import (
    ConsensusProblem,
    IterationTrace,
    SolverState,
    augmented_lagrangian,
    feasibility_gap,
    initial_state,
    objective,
)
from .prox import prox_l1_ball
from .simnet import ComputeModel, DelayModel, LinkModel, StarNetwork
from .stepsize import certify, default_penalties, exact_baseline_penalty, minimal_rho
from . import diagnostics

__all__ = [
    "ALGORITHMS",
    "RunConfig",
    "RunResult",
    "master_step",
    "padmm_apply",
    "sync_padmm_iteration",
    "exact_admm_iteration",
    "run",
]

ALGORITHMS = (
    "async_padmm",
    "sync_padmm",
    "sync_admm",
    "async_padmm_incremental_variant",
)


@dataclass
class RunConfig:
    """Everything a run needs beyond the problem itself.

    Model fields (``compute_delay``, ``downlink``, ``uplink``) hold plain
    JSON-able specs, resolved to simulator models at run time: a number is
    a constant delay, dicts select {"kind": "constant"|"uniform"|
    "empirical", ...}, and link dicts accept {"delay": ..., "loss": ...,
    "allow_reordering": ...}. A single spec applies to every worker; a
    list gives one per worker. ``compute_delay=None`` defaults to
    uniform(0, T_k).

    ``delay_bound`` is the staleness level enforcement acts on;
    ``cert_delay`` is the staleness level the automatic penalty rule
    certifies, defaulting to ``delay_bound``. Campaigns set it to the
    delay model's mean gradient age, which is what reproduces the
    published iteration counts; worst-case penalties over-damp the
    asynchronous updates by roughly the bound-to-mean ratio.
    """

    algorithm: str = "async_padmm"
    rho: object = "auto"
    rho_safety: float = 1.01
    max_iters: int = 5000
    epsilon: float = 1e-3
    seed: int = 0
    delay_bound: object = 0
    cert_delay: object = None
    window: float = 1.0
    enforcement: str = "enforce"
    init: str = "zero"
    force: bool = False
    full_trace: bool = False
    compute_delay: object = None
    downlink: object = None
    uplink: object = None
    curvature_override: object = None

    def validate(self, num_components=None):
        if self.algorithm not in ALGORITHMS:
            raise ValueError("unknown algorithm %r; expected one of %s"
                             % (self.algorithm, list(ALGORITHMS)))
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.window <= 0:
            raise ValueError("window must be positive")
        if self.enforcement not in ("enforce", "observe"):
            raise ValueError("enforcement must be 'enforce' or 'observe'")
        if self.init not in ("zero", "random_ball"):
            raise ValueError("init must be 'zero' or 'random_ball'")
        if num_components is not None:
            for name in ("delay_bound", "cert_delay", "compute_delay",
                         "downlink", "uplink"):
                value = getattr(self, name)
                if isinstance(value, (list, tuple)) and not (
                    name != "delay_bound" and len(value) == 0
                ):
                    if len(value) != num_components:
                        raise ValueError(
                            "%s list has %d entries for %d components"
                            % (name, len(value), num_components))


@dataclass
class RunResult:
    """Outcome of one run.

    ``iterations`` is the simulated clock in window units (the number the
    campaign tables report); ``updates`` the number of state updates,
    which is smaller for synchronous algorithms under delay.
    """

    termination: str
    iterations: int
    updates: int
    state: SolverState
    trace: IterationTrace
    rho: np.ndarray
    certificates: list
    final_measure: float
    violations: list = field(default_factory=list)
    violation: tuple = None

    @property
    def converged(self):
        return self.termination == "converged"


def master_step(problem, state, rho):
    """New master vector: prox of the penalty-weighted average.

    Evaluates ``prox_l1_ball`` at ``(sum_k rho_k x_local_k + sum_k y_k) /
    sum_k rho_k`` with l1 weight ``l1_weight / sum_k rho_k``; the weight
    scaling comes from completing the square in the master subproblem.
    """
    rho = np.asarray(rho, dtype=float)
    total = float(rho.sum())
    v = (rho[:, None] * state.x_local + state.y).sum(axis=0) / total
    return prox_l1_ball(v, problem.l1_weight / total, problem.radius)


def padmm_apply(problem, state, rho, x_new, updates, incremental=False):
    """Commit one proximal update given the new master vector and fresh gradients.

    Parameters
    ----------
    updates : dict
        ``{k: (gradient, copy_index)}`` for the components whose gradient
        arrived this iteration; the rest keep their stored gradient.
    incremental : bool
        When True, only components in ``updates`` refresh their local copy
        and dual; otherwise every component does (with whatever gradient
        is stored).
    """
    rho = np.asarray(rho, dtype=float)
    grad = state.grad_stored.copy()
    stale = state.stale_index.copy()
    x_local = state.x_local.copy()
    y = state.y.copy()
    for k, (g, idx) in updates.items():
        grad[k] = g
        stale[k] = idx
    refresh = sorted(updates) if incremental else range(problem.num_components)
    for k in refresh:
        x_local[k] = x_new - (grad[k] + y[k]) / rho[k]
        y[k] = y[k] + rho[k] * (x_local[k] - x_new)
    return SolverState(state.iteration + 1, np.asarray(x_new, dtype=float),
                       x_local, y, grad, stale)


def sync_padmm_iteration(problem, state, rho):
    """One synchronous proximal update: fresh gradients at the new master vector."""
    x_new = master_step(problem, state, rho)
    t_new = state.iteration + 1
    updates = {
        k: (comp.gradient(x_new), t_new)
        for k, comp in enumerate(problem.components)
    }
    return padmm_apply(problem, state, rho, x_new, updates)


def exact_admm_iteration(problem, state, rho):
    """One synchronous exact update: each component minimizes its penalized cost.

    Requires every component to expose ``penalized_argmin`` and every
    penalty to exceed the component curvature; both are checked by the
    component solver.
    """
    rho = np.asarray(rho, dtype=float)
    x_new = master_step(problem, state, rho)
    t_new = state.iteration + 1
    x_local = np.empty_like(state.x_local)
    y = state.y.copy()
    grad = np.empty_like(state.grad_stored)
    for k, comp in enumerate(problem.components):
        if not hasattr(comp, "penalized_argmin"):
            raise TypeError(
                "component %d has no exact penalized solver; "
                "sync_admm needs one (use the proximal algorithms instead)" % k)
        x_local[k] = comp.penalized_argmin(rho[k], x_new, y[k])
        y[k] = y[k] + rho[k] * (x_local[k] - x_new)
        grad[k] = comp.gradient(x_local[k])
    stale = np.full(problem.num_components, t_new, dtype=int)
    return SolverState(t_new, x_new, x_local, y, grad, stale)


# -- config resolution -------------------------------------------------------


def _delay_model(spec):
    if spec is None:
        return DelayModel.constant(0.0)
    if isinstance(spec, (int, float)):
        return DelayModel.constant(float(spec))
    if isinstance(spec, DelayModel):
        return spec
    kind = spec.get("kind")
    if kind == "constant":
        return DelayModel.constant(spec.get("value", 0.0))
    if kind == "uniform":
        return DelayModel.uniform(spec.get("lo", 0.0), spec["hi"])
    if kind == "empirical":
        return DelayModel.empirical(spec["values"])
    raise ValueError("bad delay spec %r" % (spec,))


def _link_model(spec):
    if spec is None:
        return LinkModel()
    if isinstance(spec, LinkModel):
        return spec
    if not isinstance(spec, dict):
        # bare numbers (or DelayModel) mean a lossless link with that delay
        return LinkModel(delay=_delay_model(spec))
    return LinkModel(
        delay=_delay_model(spec.get("delay")),
        loss=float(spec.get("loss", 0.0)),
        allow_reordering=bool(spec.get("allow_reordering", False)),
    )


def _per_worker(spec, count, build):
    if isinstance(spec, (list, tuple)):
        if len(spec) != count:
            raise ValueError("expected %d per-worker entries, got %d"
                             % (count, len(spec)))
        return [build(s) for s in spec]
    return [build(spec) for _ in range(count)]


def _resolve_models(config, delay_bounds, num_workers):
    downs = _per_worker(config.downlink, num_workers, _link_model)
    ups = _per_worker(config.uplink, num_workers, _link_model)
    if config.compute_delay is None:
        computes = [
            ComputeModel(DelayModel.uniform(0.0, float(delay_bounds[k])))
            if delay_bounds[k] > 0 else ComputeModel(DelayModel.constant(0.0))
            for k in range(num_workers)
        ]
    else:
        computes = [
            ComputeModel(m) for m in
            _per_worker(config.compute_delay, num_workers, _delay_model)
        ]
    return downs, ups, computes


def _resolve_rho(problem, config, cert_delays):
    lipschitz = problem.lipschitz_constants()
    classes = (
        [config.curvature_override] * problem.num_components
        if config.curvature_override else problem.curvature_classes()
    )
    if config.algorithm == "sync_admm":
        cert_bounds = np.zeros(problem.num_components)
        if isinstance(config.rho, str) and config.rho == "auto":
            rho = np.array([
                exact_baseline_penalty(L, c, config.rho_safety)
                for L, c in zip(lipschitz, classes)
            ])
        else:
            rho = np.broadcast_to(
                np.asarray(config.rho, dtype=float), (problem.num_components,)
            ).copy()
    else:
        cert_bounds = (
            np.zeros(problem.num_components)
            if config.algorithm == "sync_padmm"
            else np.asarray(cert_delays, dtype=float)
        )
        if isinstance(config.rho, str) and config.rho == "auto":
            rho = default_penalties(lipschitz, cert_bounds, classes,
                                    config.rho_safety)
        else:
            rho = np.broadcast_to(
                np.asarray(config.rho, dtype=float), (problem.num_components,)
            ).copy()
    certs = [
        certify(r, L, T, c)
        for r, L, T, c in zip(rho, lipschitz, cert_bounds, classes)
    ]
    return rho, certs


def _initial(problem, config):
    # duals start at -gradient so the dual identity holds at iteration 0
    # too, not just after the first completed update
    state = initial_state(problem)
    if config.init == "random_ball":
        rng = np.random.default_rng([int(config.seed), 17])
        direction = rng.standard_normal(problem.dim)
        direction /= max(float(np.linalg.norm(direction)), 1e-300)
        x0 = 0.5 * problem.radius * direction
        state.x = x0
        state.x_local = np.tile(x0, (problem.num_components, 1))
        state.grad_stored = np.stack(
            [c.gradient(x0) for c in problem.components])
        state.y = -state.grad_stored.copy()
    return state


def _record(problem, state, rho, trace, sim_time, collected):
    lag = augmented_lagrangian(problem, state, rho)
    obj = objective(problem, state.x)
    _, gap_rel = feasibility_gap(state)
    pg = diagnostics.proximal_gradient(problem, state.x)
    pg_norm = float(np.linalg.norm(pg))
    measure = diagnostics.optimality_measure(problem, state)
    trace.append(lag, obj, gap_rel, pg_norm, measure, sim_time, collected)
    if trace.states is not None:
        trace.states.append(state.copy())
    return measure


def run(problem, config):
    """Execute one full run and return its trace and termination status.

    Termination is one of ``converged`` (optimality measure dropped below
    epsilon), ``max_iters`` (clock budget exhausted), ``staleness_violation``
    (enforce mode tripped), or ``infeasible_stepsize`` (certificates failed
    and force was not set; no iterations run).
    """
    config.validate(problem.num_components)
    K = problem.num_components
    delay_bounds = np.broadcast_to(
        np.asarray(config.delay_bound, dtype=float), (K,)).copy()
    if np.any(delay_bounds < 0):
        raise ValueError("delay bounds must be nonnegative")
    cert_delays = delay_bounds
    if config.cert_delay is not None:
        cert_delays = np.broadcast_to(
            np.asarray(config.cert_delay, dtype=float), (K,)).copy()
        if np.any(cert_delays < 0):
            raise ValueError("certification delays must be nonnegative")
    rho, certs = _resolve_rho(problem, config, cert_delays)
    trace = IterationTrace(states=[] if config.full_trace else None)
    state = _initial(problem, config)

    hard_reject = config.algorithm == "sync_admm" and any(
        r <= c.lipschitz for r, c in zip(rho, problem.components))
    if hard_reject or (not all(c.feasible for c in certs) and not config.force):
        return RunResult(
            termination="infeasible_stepsize", iterations=0, updates=0,
            state=state, trace=trace, rho=rho, certificates=certs,
            final_measure=float("inf"))

    if trace.states is not None:
        trace.states.append(state.copy())

    if config.algorithm in ("async_padmm", "async_padmm_incremental_variant"):
        return _run_async(problem, config, rho, certs, state, trace,
                          delay_bounds)
    return _run_sync(problem, config, rho, certs, state, trace, delay_bounds)


def _run_async(problem, config, rho, certs, state, trace, delay_bounds):
    K = problem.num_components
    downs, ups, computes = _resolve_models(config, delay_bounds, K)
    net = StarNetwork(
        K, lambda k, x: problem.components[k].gradient(x),
        downs, ups, computes, seed=[int(config.seed), 29],
        window=config.window)
    incremental = config.algorithm == "async_padmm_incremental_variant"
    enforce = config.enforcement == "enforce"
    violations = []
    violation = None
    reason = None
    measure = float("inf")
    clock = 0
    while clock < config.max_iters:
        t = state.iteration
        x_new = master_step(problem, state, rho)
        net.broadcast(x_new, t + 1)
        net.advance(config.window)
        collected = net.collect()
        updates = {
            k: (msg.gradient, msg.copy_index) for k, msg in collected.items()
        }
        new_stale = state.stale_index.copy()
        for k, (_, idx) in updates.items():
            new_stale[k] = idx
        staleness = (t + 1) - new_stale
        over = np.nonzero(staleness > delay_bounds)[0]
        if over.size:
            worst = int(over[np.argmax(staleness[over])])
            violations.append((t + 1, worst, int(staleness[worst])))
            if enforce:
                violation = violations[-1]
                reason = "staleness_violation"
                break
        state = padmm_apply(problem, state, rho, x_new, updates, incremental)
        clock += 1
        measure = _record(problem, state, rho, trace, float(clock), len(updates))
        if measure < config.epsilon:
            reason = "converged"
            break
    if reason is None:
        reason = "max_iters"
    return RunResult(
        termination=reason, iterations=clock, updates=len(trace),
        state=state, trace=trace, rho=rho, certificates=certs,
        final_measure=measure, violations=violations, violation=violation)


def _run_sync(problem, config, rho, certs, state, trace, delay_bounds):
    K = problem.num_components
    downs, ups, computes = _resolve_models(config, delay_bounds, K)
    if any(l.loss > 0 for l in downs) or any(l.loss > 0 for l in ups):
        raise ValueError(
            "synchronous algorithms block on every worker and need lossless "
            "links; set loss to 0 or use an asynchronous algorithm")
    net = StarNetwork(
        K, lambda k, x: problem.components[k].gradient(x),
        downs, ups, computes, seed=[int(config.seed), 29],
        window=config.window)
    exact = config.algorithm == "sync_admm"
    reason = None
    measure = float("inf")
    clock = 0
    while clock < config.max_iters:
        round_trips = net.sample_round_trips()
        cost = max(1, int(math.ceil(float(round_trips.max()) / config.window)))
        if exact:
            state = exact_admm_iteration(problem, state, rho)
        else:
            state = sync_padmm_iteration(problem, state, rho)
        clock += cost
        measure = _record(problem, state, rho, trace, float(clock), K)
        if measure < config.epsilon:
            reason = "converged"
            break
    if reason is None:
        reason = "max_iters"
    return RunResult(
        termination=reason, iterations=clock, updates=len(trace),
        state=state, trace=trace, rho=rho, certificates=certs,
        final_measure=measure)
