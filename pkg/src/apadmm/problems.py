"""Consensus problem container, component costs, solver state, and iteration traces.

The problem solved throughout is

    minimize  sum_k g_k(x) + l1_weight * ||x||_1   subject to  ||x||_2 <= radius,

where each g_k is smooth with Lipschitz gradient. Solvers keep one master
vector ``x``, one local copy ``x_local[k]`` per component, one dual vector
``y[k]`` per component, and the most recently collected gradient of each
component together with the master-iteration index it was evaluated at.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "ConcaveQuadratic",
    "CallableCost",
    "ConsensusProblem",
    "SolverState",
    "IterationTrace",
    "leading_eigenvalue",
    "initial_state",
    "objective",
    "smooth_value",
    "smooth_gradient",
    "augmented_lagrangian",
    "feasibility_gap",
    "ball_diameter",
    "finite_difference_gradient",
    "check_gradients",
    "check_lipschitz",
]

CURVATURE_CLASSES = ("general", "convex", "concave")


def leading_eigenvalue(B, rel_tol=1e-13, max_iter=100000):
    """Largest eigenvalue of ``B.T @ B`` by power iteration.

    Uses a deterministic ramp start vector (1 + i/n, normalized) so repeated
    calls are bit-stable, and the Rayleigh quotient as the eigenvalue
    estimate, stopping when its relative change drops below ``rel_tol``.

    Returns 0.0 for an all-zero matrix.
    """
    B = np.asarray(B, dtype=float)
    n = B.shape[1]
    v = 1.0 + np.arange(n) / max(n, 1)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iter):
        w = B.T @ (B @ v)
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            return 0.0
        new_estimate = float(v @ w)
        v = w / norm_w
        if abs(new_estimate - estimate) <= rel_tol * max(1.0, abs(new_estimate)):
            return new_estimate
        estimate = new_estimate
    return estimate


class ConcaveQuadratic:
    """Component cost ``g(z) = -0.5 * ||B z||^2``.

    Stores the Gram matrix ``B.T @ B`` once; gradients are a single
    symmetric matvec. The component supports the exact penalized argmin
    needed by the synchronous exact-minimization baseline, with one
    Cholesky factorization cached per penalty value.

    Attributes
    ----------
    lipschitz : float
        Gradient Lipschitz constant, the top eigenvalue of the Gram matrix.
        Floored at machine epsilon (and ``degenerate`` set) when B == 0.
    degenerate : bool
        True when the data matrix is identically zero.
    """

    curvature = "concave"

    def __init__(self, B):
        B = np.atleast_2d(np.asarray(B, dtype=float))
        if not np.all(np.isfinite(B)):
            raise ValueError("data matrix contains non-finite entries")
        self.B = B
        self.dim = B.shape[1]
        self.gram = B.T @ B
        self.degenerate = not np.any(B)
        lam = leading_eigenvalue(B)
        if lam <= 0.0:
            lam = float(np.finfo(float).eps)
            self.degenerate = True
        self.lipschitz = lam
        self._cho = {}

    def value(self, z):
        return -0.5 * float(z @ (self.gram @ z))

    def gradient(self, z):
        return -(self.gram @ z)

    def penalized_argmin(self, rho, x_master, y):
        """Exact minimizer of ``g(u) + <y, u - x_master> + rho/2 ||u - x_master||^2``.

        Solves ``(rho I - gram) u = rho * x_master - y``. Requires
        ``rho > lipschitz`` so the subproblem is strongly convex.
        """
        if rho <= self.lipschitz:
            raise ValueError(
                "penalty %g does not exceed the component curvature %g; "
                "the exact subproblem is not strongly convex" % (rho, self.lipschitz)
            )
        key = float(rho)
        if key not in self._cho:
            mat = key * np.eye(self.dim) - self.gram
            self._cho[key] = scipy.linalg.cho_factor(mat)
        return scipy.linalg.cho_solve(self._cho[key], key * x_master - y)


class CallableCost:
    """Component cost backed by explicit value/gradient callables.

    For problems outside the built-in quadratic family. No exact penalized
    argmin is available, so the exact-minimization baseline rejects it.
    """

    def __init__(self, value, gradient, dim, lipschitz, curvature="general"):
        if curvature not in CURVATURE_CLASSES:
            raise ValueError("curvature must be one of %s" % (CURVATURE_CLASSES,))
        if lipschitz <= 0:
            raise ValueError("lipschitz must be positive")
        self._value = value
        self._gradient = gradient
        self.dim = int(dim)
        self.lipschitz = float(lipschitz)
        self.curvature = curvature
        self.degenerate = False

    def value(self, z):
        return float(self._value(z))

    def gradient(self, z):
        return np.asarray(self._gradient(z), dtype=float)


@dataclass
class ConsensusProblem:
    """Problem data: component costs plus the shared l1 + ball regularizer."""

    components: list
    l1_weight: float = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if len(self.components) < 1:
            raise ValueError("need at least one component")
        if self.l1_weight < 0:
            raise ValueError("l1_weight must be nonnegative")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise ValueError("components disagree on dimension: %s" % sorted(dims))
        for i, c in enumerate(self.components):
            if c.lipschitz <= 0:
                raise ValueError("component %d has nonpositive Lipschitz constant" % i)
            if c.curvature not in CURVATURE_CLASSES:
                raise ValueError("component %d has unknown curvature class" % i)

    @property
    def dim(self):
        return self.components[0].dim

    @property
    def num_components(self):
        return len(self.components)

    def lipschitz_constants(self):
        return np.array([c.lipschitz for c in self.components])

    def curvature_classes(self):
        return [c.curvature for c in self.components]


@dataclass
class SolverState:
    """Master-side state after a completed iteration.

    ``stale_index[k]`` is the master-iteration index of the x copy whose
    gradient is currently stored for component k; staleness at iteration t
    is ``t - stale_index[k]``.
    """

    iteration: int
    x: np.ndarray
    x_local: np.ndarray
    y: np.ndarray
    grad_stored: np.ndarray
    stale_index: np.ndarray

    def copy(self):
        return SolverState(
            self.iteration,
            self.x.copy(),
            self.x_local.copy(),
            self.y.copy(),
            self.grad_stored.copy(),
            self.stale_index.copy(),
        )


def initial_state(problem):
    """Zero-start state: x, local copies, and duals all zero.

    Stored gradients are evaluated at the zero vector with stale index 1,
    and the iteration counter starts at 1.
    """
    n = problem.dim
    k = problem.num_components
    zero = np.zeros(n)
    grads = np.stack([c.gradient(zero) for c in problem.components])
    return SolverState(
        iteration=1,
        x=np.zeros(n),
        x_local=np.zeros((k, n)),
        y=np.zeros((k, n)),
        grad_stored=grads,
        stale_index=np.ones(k, dtype=int),
    )


def smooth_value(problem, x):
    """Sum of component values at the consensus point."""
    return float(sum(c.value(x) for c in problem.components))


def smooth_gradient(problem, x):
    """Sum of component gradients at the consensus point."""
    total = np.zeros(problem.dim)
    for c in problem.components:
        total += c.gradient(x)
    return total


def objective(problem, x):
    """Full objective ``sum_k g_k(x) + l1_weight * ||x||_1`` at a consensus point.

    The ball constraint is not folded in; callers keep x feasible.
    """
    x = np.asarray(x, dtype=float)
    return smooth_value(problem, x) + problem.l1_weight * float(np.abs(x).sum())


def augmented_lagrangian(problem, state, rho):
    """Augmented Lagrangian at the given state.

    ``sum_k [g_k(x_local_k) + <y_k, x_local_k - x> + rho_k/2 ||x_local_k - x||^2]
    + l1_weight * ||x||_1``, with per-component penalties ``rho``.
    """
    rho = np.asarray(rho, dtype=float)
    total = problem.l1_weight * float(np.abs(state.x).sum())
    for k, comp in enumerate(problem.components):
        diff = state.x_local[k] - state.x
        total += comp.value(state.x_local[k])
        total += float(state.y[k] @ diff)
        total += 0.5 * rho[k] * float(diff @ diff)
    return total


def feasibility_gap(state):
    """Consensus gaps ``(absolute, relative)``.

    Absolute: ``max_k ||x_local_k - x||``. Relative divides by ``||x||``,
    falling back to the absolute gap when ``||x|| == 0``.
    """
    gaps = np.linalg.norm(state.x_local - state.x[None, :], axis=1)
    absolute = float(gaps.max())
    norm_x = float(np.linalg.norm(state.x))
    relative = absolute / norm_x if norm_x > 0 else absolute
    return absolute, relative


def ball_diameter(problem):
    """Diameter of the feasible ball, ``2 * radius``."""
    return 2.0 * problem.radius


@dataclass
class IterationTrace:
    """Per-iteration records of a run; one row per completed update.

    ``sim_time`` is the cumulative simulated clock in master-iteration
    units. When state snapshots are kept, ``x_hist[0]`` is the initial
    state and ``x_hist[t]`` the state after iteration row t.
    """

    lagrangian: list = field(default_factory=list)
    objective: list = field(default_factory=list)
    feas_gap: list = field(default_factory=list)
    prox_grad_norm: list = field(default_factory=list)
    measure: list = field(default_factory=list)
    sim_time: list = field(default_factory=list)
    collected: list = field(default_factory=list)
    states: list = None

    def __len__(self):
        return len(self.lagrangian)

    def append(self, lagrangian, objective, feas_gap, prox_grad_norm, measure,
               sim_time, collected):
        self.lagrangian.append(float(lagrangian))
        self.objective.append(float(objective))
        self.feas_gap.append(float(feas_gap))
        self.prox_grad_norm.append(float(prox_grad_norm))
        self.measure.append(float(measure))
        self.sim_time.append(float(sim_time))
        self.collected.append(int(collected))


def finite_difference_gradient(fn, x, step=1e-6):
    """Central-difference gradient of a scalar function, for validation."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        bump = np.zeros_like(x)
        bump[i] = step
        grad[i] = (fn(x + bump) - fn(x - bump)) / (2.0 * step)
    return grad


def check_gradients(problem, seed=0, points=3, rel_tol=1e-5):
    """Compare each component gradient against central differences.

    Probes random interior points of the ball. Raises AssertionError with
    the offending component index on mismatch.
    """
    rng = np.random.default_rng(seed)
    for _ in range(points):
        direction = rng.standard_normal(problem.dim)
        direction /= max(np.linalg.norm(direction), 1e-12)
        x = direction * (0.5 * problem.radius * rng.uniform())
        for k, comp in enumerate(problem.components):
            numeric = finite_difference_gradient(comp.value, x)
            exact = comp.gradient(x)
            err = np.linalg.norm(numeric - exact)
            scale = 1.0 + np.linalg.norm(exact)
            assert err <= rel_tol * scale, (
                "component %d gradient mismatch: fd error %g" % (k, err)
            )


def check_lipschitz(problem, seed=0, pairs=100, slack=1e-8):
    """Spot-check ``||grad(a) - grad(b)|| <= L (1 + slack) ||a - b||`` on random ball pairs."""
    rng = np.random.default_rng(seed)
    for _ in range(pairs):
        a = rng.standard_normal(problem.dim)
        b = rng.standard_normal(problem.dim)
        for v in (a, b):
            norm = np.linalg.norm(v)
            if norm > problem.radius:
                v *= problem.radius / norm
        dist = np.linalg.norm(a - b)
        for k, comp in enumerate(problem.components):
            jump = np.linalg.norm(comp.gradient(a) - comp.gradient(b))
            assert jump <= comp.lipschitz * (1.0 + slack) * dist + 1e-12, (
                "component %d violates its Lipschitz constant" % k
            )
