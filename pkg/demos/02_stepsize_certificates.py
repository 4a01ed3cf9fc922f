"""
Penalty certification
=====================

How large must the per-worker penalty be before descent is guaranteed?
The answer depends on the component's smoothness constant L, the
staleness bound T, and its curvature class.
"""

from apadmm import certify, descent_margin, minimal_rho

# the margin is the certified per-iteration decrease coefficient;
# positive means every iteration makes progress
for rho in (6.0, 8.0, 12.0, 20.0):
    print("margin(rho=%4.1f, L=1, T=0) = %9.6f" % (
        rho, descent_margin(rho, 1.0, 0, "general")))

print()

# staleness eats into the margin: the same penalty certifies less as T grows
for T in range(5):
    print("margin(rho=12, L=1, T=%d) = %9.4f" % (
        T, descent_margin(12.0, 1.0, T, "general")))

print()

# the smallest certified penalty, per curvature class
for cls in ("general", "convex", "concave"):
    for T in (0, 2, 5):
        print("minimal_rho(L=1, T=%d, %-8s) = %.6f" % (
            T, cls, minimal_rho(1.0, T, cls)))

print()

# certify() packages the verdict with the rule that produced it
cert = certify(8.0, 1.0, 0, "general")
print("rho=8:", "feasible" if cert.feasible else "infeasible",
      "| margin %.6f | rule: %s" % (cert.margin, cert.rule))
cert = certify(7.0, 1.0, 0, "general")
print("rho=7:", "feasible" if cert.feasible else "infeasible",
      "(the floor is strict for the general class)")
