"""Proximal and projection operators for the l1-penalized ball-constrained master step.

All operators act on 1-D numpy arrays and return new arrays. The composite
operator ``prox_l1_ball`` evaluates the proximal map of
``tau * ||u||_1 + indicator(||u||_2 <= radius)`` exactly: shrink first, then
project. The order matters and is correct because the ball projection is a
uniform radial scaling, which commutes with the KKT conditions of the
shrinkage subproblem (the multiplier of the norm constraint only rescales
every coordinate by the same positive factor, leaving the active set and
signs of the soft-thresholding solution unchanged).
"""

import numpy as np

__all__ = ["soft_threshold", "project_ball", "prox_l1_ball"]


def _check_vector(v, name="v"):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("%s must be a 1-D vector, got shape %s" % (name, v.shape))
    if not np.all(np.isfinite(v)):
        raise ValueError("%s contains non-finite entries" % name)
    return v


def soft_threshold(v, tau):
    """Proximal map of ``tau * ||.||_1``.

    Parameters
    ----------
    v : array_like, shape (n,)
        Input vector.
    tau : float
        Nonnegative threshold.

    Returns
    -------
    ndarray
        ``sign(v) * max(|v| - tau, 0)`` evaluated componentwise.
    """
    v = _check_vector(v)
    if tau < 0:
        raise ValueError("tau must be nonnegative, got %r" % tau)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def project_ball(v, radius):
    """Euclidean projection onto the l2 ball of the given radius.

    Returns ``v`` unchanged (as a copy) when it is already feasible, else
    ``v * radius / ||v||``. Exactly idempotent: projecting a feasible
    point multiplies by 1.0, so project(project(v)) == project(v) bitwise.
    """
    v = _check_vector(v)
    if radius <= 0:
        raise ValueError("radius must be positive, got %r" % radius)
    norm = float(np.linalg.norm(v))
    if norm <= radius:
        return v.copy()
    return v * (radius / norm)


def prox_l1_ball(v, tau, radius):
    """Proximal map of ``tau * ||.||_1 + indicator(||.||_2 <= radius)``.

    Parameters
    ----------
    v : array_like, shape (n,)
        Input vector.
    tau : float
        Nonnegative l1 weight (already divided by any quadratic scaling).
    radius : float
        Positive ball radius.

    Returns
    -------
    ndarray
        The unique minimizer of ``tau * ||u||_1 + 0.5 * ||u - v||^2``
        over the ball, computed as ``project_ball(soft_threshold(v, tau))``.
    """
    return project_ball(soft_threshold(v, tau), radius)
