"""
Proximal building blocks
========================

Soft thresholding, Euclidean ball projection, and their composition,
which is the master-side update the solver applies every iteration.
"""

import numpy as np

from apadmm import project_ball, prox_l1_ball, soft_threshold

# soft thresholding shrinks toward zero and kills small coordinates
v = np.array([3.0, -0.5, 0.0, 1.2])
print("v                 =", v)
print("soft_threshold(1) =", soft_threshold(v, 1.0))

# projection rescales anything outside the radius onto the sphere
w = np.array([3.0, 4.0])
print("project_ball([3,4], r=1) =", project_ball(w, 1.0))

# the composed operator: shrink first, then project
u = np.array([2.0, 3.0])
p = prox_l1_ball(u, 1.0, 1.0)
print("prox_l1_ball([2,3], tau=1, r=1) =", p, " norm =", np.linalg.norm(p))

# the composition really is the minimizer: random perturbations on the
# ball never improve the objective
rng = np.random.default_rng(0)
obj = lambda z: 0.5 * np.sum((z - u) ** 2) + 1.0 * np.sum(np.abs(z))
trials = []
for _ in range(200):
    d = rng.standard_normal(2)
    z = p + 1e-4 * d / np.linalg.norm(d)
    if np.linalg.norm(z) > 1.0:
        z = project_ball(z, 1.0)
    trials.append(obj(z) - obj(p))
print("worst perturbation gain: %.2e (>= 0 means p is optimal)" % min(trials))
