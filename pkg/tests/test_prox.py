"""Proximal operator tests: hand values, invariants, independent oracles.

The oracles here deliberately avoid the library's own closed forms:
dense grid search over a ball-covering candidate set, plain projected
subgradient descent, and a penalized L-BFGS solve. They are reused by
the acceptance suite at larger input counts.
"""

import numpy as np
import pytest
from scipy.optimize import minimize

from apadmm import prox_l1_ball, project_ball, soft_threshold


# -- independent oracles -----------------------------------------------------

def prox_objective(u, v, tau):
    u = np.asarray(u, dtype=float)
    return tau * np.abs(u).sum(axis=-1) + 0.5 * ((u - v) ** 2).sum(axis=-1)


def ball_candidates(dim, radius, lo, hi, res):
    """Grid points inside the ball plus sphere points covering the boundary.

    A plain grid cannot certify boundary minimizers: the objective is
    tangentially flat along the sphere, so interior grid points with
    O(res) radial depth beat tangentially nearby ones and the argmin can
    sit O(sqrt(res)) away. Radially projecting the grid shell onto the
    sphere restores a res-dense covering of the whole feasible set.
    """
    axes = [np.arange(lo[i], hi[i] + res / 2, res) for i in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    norms = np.linalg.norm(pts, axis=-1)
    keep = pts[norms <= radius]
    shell = (np.abs(norms - radius) <= res * np.sqrt(dim) * 1.01) & (norms > 1e-12)
    if shell.any():
        near = pts[shell]
        sphere = near * (radius / np.linalg.norm(near, axis=-1))[:, None]
        keep = np.concatenate([keep, sphere])
    return keep


def grid_prox(v, tau, radius, res=1e-3, coarse=None, candidates=None):
    """Dense-search oracle for argmin ``tau*|u|_1 + 0.5*|u-v|^2`` over the ball.

    ``coarse`` switches on a coarse-to-fine pass for dimension 3, where a
    flat res-1e-3 grid would be billions of points; convexity keeps the
    refinement exact to the final resolution. ``candidates`` lets callers
    reuse a precomputed full-ball candidate set across many inputs.
    """
    v = np.asarray(v, dtype=float)
    dim = len(v)
    if candidates is None:
        lo, hi = -radius * np.ones(dim), radius * np.ones(dim)
        if coarse is not None:
            rough_cand = ball_candidates(dim, radius, lo, hi, coarse)
            rough = rough_cand[np.argmin(prox_objective(rough_cand, v, tau))]
            pad = 1.5 * coarse
            lo, hi = rough - pad, rough + pad
        candidates = ball_candidates(dim, radius, lo, hi, res)
    return candidates[np.argmin(prox_objective(candidates, v, tau))]


def subgradient_prox(v, tau, radius, steps=10 ** 4):
    """Projected subgradient descent on the prox objective, zero start.

    Step 1/t exploits the unit strong convexity; the last iterate lands
    within about 1e-4 of the minimizer after 1e4 steps.
    """
    u = np.zeros_like(v, dtype=float)
    for t in range(1, steps + 1):
        g = (u - v) + tau * np.sign(u)
        w = u - g / t
        norm = np.linalg.norm(w)
        if norm > radius:
            w = w * (radius / norm)
        u = w
    return u


def penalty_projection(v, radius, beta=1e8):
    """L-BFGS on a quadratic-penalty relaxation of the ball constraint."""
    v = np.asarray(v, dtype=float)

    def fun(u):
        excess = max(np.linalg.norm(u) - radius, 0.0)
        return 0.5 * float((u - v) @ (u - v)) + 0.5 * beta * excess ** 2

    res = minimize(fun, np.zeros_like(v), method="L-BFGS-B",
                   options={"maxiter": 500, "ftol": 1e-18, "gtol": 1e-10})
    return res.x


# -- soft_threshold ----------------------------------------------------------

def test_soft_threshold_hand_values():
    np.testing.assert_array_equal(
        soft_threshold(np.array([3.0, -0.5, 0.0]), 1.0),
        np.array([2.0, 0.0, 0.0]))


def test_soft_threshold_zero_weight_is_identity():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(7)
    np.testing.assert_array_equal(soft_threshold(v, 0.0), v)


def test_soft_threshold_ties_map_to_zero():
    # |v_i| == tau sits exactly on the kink; max(|v|-tau, 0) forces 0
    out = soft_threshold(np.array([2.0, -2.0, 1.9999]), 2.0)
    np.testing.assert_array_equal(out[:2], [0.0, 0.0])
    assert out[2] == 0.0


def test_soft_threshold_rejects_negative_weight():
    with pytest.raises(ValueError):
        soft_threshold(np.array([1.0]), -0.1)


def test_soft_threshold_matches_per_coordinate_grid():
    """1-D grid oracle per coordinate; the objective is separable."""
    rng = np.random.default_rng(3)
    for _ in range(5):
        v = rng.standard_normal(4) * 2.0
        tau = float(rng.uniform(0.0, 1.5))
        out = soft_threshold(v, tau)
        span = np.abs(v).max() + 1.0
        axis = np.arange(-span, span, 1e-4)
        for i in range(len(v)):
            obj = tau * np.abs(axis) + 0.5 * (axis - v[i]) ** 2
            assert abs(out[i] - axis[np.argmin(obj)]) < 2e-4


# -- project_ball ------------------------------------------------------------

def test_project_ball_hand_values():
    np.testing.assert_allclose(project_ball(np.array([3.0, 4.0]), 1.0),
                               [0.6, 0.8], rtol=1e-15)
    np.testing.assert_array_equal(project_ball(np.array([0.1, 0.0]), 1.0),
                                  [0.1, 0.0])


def test_project_ball_idempotent_and_copies():
    v = np.array([5.0, 0.0, 0.0])
    out = project_ball(v, 2.0)
    np.testing.assert_allclose(project_ball(out, 2.0), out, rtol=1e-15)
    out2 = project_ball(np.array([0.5, 0.0, 0.0]), 2.0)
    out2[0] = -1.0
    # interior input must not alias the output
    assert v[0] == 5.0


def test_project_ball_matches_penalty_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        v = rng.standard_normal(4) * 2.0
        ref = penalty_projection(v, 1.0)
        np.testing.assert_allclose(project_ball(v, 1.0), ref, atol=2e-5)


# -- prox_l1_ball ------------------------------------------------------------

def test_prox_l1_ball_hand_value():
    # KKT: shrink then radially rescale; [3,4] with tau=1 shrinks to [2,3]
    out = prox_l1_ball(np.array([3.0, 4.0]), 1.0, 1.0)
    np.testing.assert_allclose(out, np.array([2.0, 3.0]) / np.sqrt(13.0),
                               rtol=1e-14)


def test_prox_l1_ball_zero_weight_reduces_to_projection():
    rng = np.random.default_rng(8)
    v = rng.standard_normal(6) * 3.0
    np.testing.assert_array_equal(prox_l1_ball(v, 0.0, 2.0),
                                  project_ball(v, 2.0))


def test_prox_l1_ball_full_shrinkage():
    v = np.array([0.3, -0.2, 0.1])
    np.testing.assert_array_equal(prox_l1_ball(v, 0.5, 1.0), np.zeros(3))


def test_prox_l1_ball_is_projection_of_shrinkage():
    rng = np.random.default_rng(13)
    for _ in range(20):
        v = rng.standard_normal(5) * 2.0
        tau = float(rng.uniform(0.0, 1.0))
        r = float(rng.uniform(0.5, 2.0))
        np.testing.assert_array_equal(
            prox_l1_ball(v, tau, r),
            project_ball(soft_threshold(v, tau), r))


def test_nonexpansiveness():
    rng = np.random.default_rng(21)
    for _ in range(100):
        dim = int(rng.integers(1, 7))
        a = rng.standard_normal(dim) * 3.0
        b = rng.standard_normal(dim) * 3.0
        tau = float(rng.uniform(0.0, 2.0))
        gap = np.linalg.norm(a - b) + 1e-12
        assert np.linalg.norm(soft_threshold(a, tau) - soft_threshold(b, tau)) <= gap
        assert np.linalg.norm(project_ball(a, 1.0) - project_ball(b, 1.0)) <= gap
        assert np.linalg.norm(prox_l1_ball(a, tau, 1.0) - prox_l1_ball(b, tau, 1.0)) <= gap


def test_prox_l1_ball_perturbation_optimality():
    """Feasible perturbations never improve the prox objective."""
    rng = np.random.default_rng(34)
    eps = 1e-4
    for _ in range(10):
        v = rng.standard_normal(4) * 1.5
        tau = float(rng.uniform(0.0, 0.8))
        u = prox_l1_ball(v, tau, 1.0)
        base = prox_objective(u, v, tau)
        for _ in range(50):
            d = rng.standard_normal(4)
            d /= np.linalg.norm(d)
            w = u + eps * d
            norm = np.linalg.norm(w)
            if norm > 1.0:
                w = w / norm
            assert prox_objective(w, v, tau) >= base - 1e-8


def test_prox_l1_ball_matches_grid_2d():
    rng = np.random.default_rng(11)
    cand = ball_candidates(2, 1.0, -np.ones(2), np.ones(2), 1e-3)
    for _ in range(6):
        v = rng.standard_normal(2) * 1.2
        tau = float(rng.uniform(0.0, 0.8))
        ref = grid_prox(v, tau, 1.0, candidates=cand)
        assert np.linalg.norm(prox_l1_ball(v, tau, 1.0) - ref) < 2e-3


def test_prox_l1_ball_matches_grid_3d():
    rng = np.random.default_rng(12)
    for _ in range(4):
        v = rng.standard_normal(3) * 1.2
        tau = float(rng.uniform(0.0, 0.8))
        ref = grid_prox(v, tau, 1.0, coarse=0.02)
        assert np.linalg.norm(prox_l1_ball(v, tau, 1.0) - ref) < 2e-3


def test_prox_l1_ball_matches_subgradient_oracle():
    rng = np.random.default_rng(17)
    for _ in range(4):
        v = rng.standard_normal(10)
        tau = float(rng.uniform(0.05, 0.6))
        ref = subgradient_prox(v, tau, 1.0)
        assert np.linalg.norm(prox_l1_ball(v, tau, 1.0) - ref) < 1e-4


def test_rejects_bad_vectors():
    with pytest.raises(ValueError):
        soft_threshold(np.ones((2, 2)), 0.5)
    with pytest.raises(ValueError):
        prox_l1_ball(np.array([np.nan, 0.0]), 0.5, 1.0)
    with pytest.raises(ValueError):
        project_ball(np.array([1.0, np.inf]), 1.0)
