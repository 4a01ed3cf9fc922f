"""Penalty certification for delayed proximal consensus updates.

For a component with gradient Lipschitz constant L, staleness bound T, and
penalty rho, the certified descent margin is

    margin(rho) = rho - 2 * (1/rho + m*L/(2*rho^2)) * L^2 * (T+1)^2 - L * T^2

with the curvature-dependent constant m and penalty floor:

    general : m = 7, requires rho >  7*L   (strict)
    convex  : m = 1, requires rho >=   L
    concave : m = 5, requires rho >= 5*L

A penalty is feasible when the floor holds and the margin is positive. The
margin is strictly increasing in rho, so the minimal feasible penalty is
found by doubling then bisection; the search asserts monotonicity of the
sampled margins as a self-check.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "descent_margin",
    "certify",
    "minimal_rho",
    "default_penalties",
    "exact_baseline_penalty",
    "StepsizeCertificate",
]

_CLASS_MULTIPLIER = {"general": 7.0, "convex": 1.0, "concave": 5.0}
_CLASS_STRICT = {"general": True, "convex": False, "concave": False}


def _validate(rho, lipschitz, delay_bound, curvature):
    if curvature not in _CLASS_MULTIPLIER:
        raise ValueError("unknown curvature class %r" % (curvature,))
    if lipschitz <= 0:
        raise ValueError("lipschitz must be positive, got %r" % (lipschitz,))
    if delay_bound < 0:
        raise ValueError("delay bound must be nonnegative, got %r" % (delay_bound,))
    if rho is not None and rho <= 0:
        raise ValueError("rho must be positive, got %r" % (rho,))


def descent_margin(rho, lipschitz, delay_bound, curvature):
    """Descent margin of the given penalty; positive margin is necessary for feasibility."""
    _validate(rho, lipschitz, delay_bound, curvature)
    m = _CLASS_MULTIPLIER[curvature]
    L = float(lipschitz)
    T = float(delay_bound)
    inner = 1.0 / rho + m * L / (2.0 * rho * rho)
    return rho - 2.0 * inner * L * L * (T + 1.0) ** 2 - L * T * T


def _floor_holds(rho, lipschitz, curvature):
    floor = _CLASS_MULTIPLIER[curvature] * lipschitz
    if _CLASS_STRICT[curvature]:
        return rho > floor
    return rho >= floor


@dataclass
class StepsizeCertificate:
    """Verdict for one (penalty, component) pair."""

    rho: float
    lipschitz: float
    delay_bound: float
    curvature: str
    margin: float
    feasible: bool

    @property
    def rule(self):
        m = _CLASS_MULTIPLIER[self.curvature]
        op = ">" if _CLASS_STRICT[self.curvature] else ">="
        return "%s: rho %s %g*L and margin > 0" % (self.curvature, op, m)


def certify(rho, lipschitz, delay_bound, curvature):
    """Certificate for a penalty: margin value plus the class floor check."""
    margin = descent_margin(rho, lipschitz, delay_bound, curvature)
    feasible = margin > 0.0 and _floor_holds(rho, lipschitz, curvature)
    return StepsizeCertificate(
        rho=float(rho),
        lipschitz=float(lipschitz),
        delay_bound=float(delay_bound),
        curvature=curvature,
        margin=float(margin),
        feasible=feasible,
    )


def minimal_rho(lipschitz, delay_bound, curvature, precision=1e-9):
    """Smallest feasible penalty, to additive ``precision``.

    Returns a certified-feasible value; ``certify(result - 2*precision)``
    is infeasible. Doubling finds a feasible bracket endpoint, bisection
    shrinks it; sampled margins are asserted to increase with rho.
    """
    _validate(None, lipschitz, delay_bound, curvature)
    if precision <= 0:
        raise ValueError("precision must be positive")
    floor = _CLASS_MULTIPLIER[curvature] * lipschitz
    samples = []

    def feasible(rho):
        cert = certify(rho, lipschitz, delay_bound, curvature)
        samples.append((rho, cert.margin))
        return cert.feasible

    if not _CLASS_STRICT[curvature] and feasible(floor):
        return float(floor)
    lo, hi = floor, floor
    for _ in range(200):
        hi = 2.0 * hi
        if feasible(hi):
            break
        lo = hi
    else:
        raise RuntimeError("no feasible penalty found while doubling")
    while hi - lo > precision:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    samples.sort()
    margins = [m for _, m in samples]
    assert all(b >= a for a, b in zip(margins, margins[1:])), (
        "descent margin is not monotone in rho; certification logic is broken"
    )
    return float(hi)


def default_penalties(lipschitz, delay_bounds, curvatures, safety=1.01):
    """Per-component penalties ``safety * minimal_rho(L_k, T_k, class_k)``."""
    lipschitz = np.atleast_1d(np.asarray(lipschitz, dtype=float))
    delay_bounds = np.broadcast_to(
        np.asarray(delay_bounds, dtype=float), lipschitz.shape
    )
    return np.array([
        safety * minimal_rho(L, T, c)
        for L, T, c in zip(lipschitz, delay_bounds, curvatures)
    ])


def exact_baseline_penalty(lipschitz, curvature, safety=1.01):
    """Penalty for the exact-minimization baseline: ``safety * max(7L, minimal_rho(L, 0, class))``."""
    return safety * max(7.0 * lipschitz, minimal_rho(lipschitz, 0.0, curvature))
