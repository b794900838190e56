"""
Adaptive SOR on the Poisson model problem
=========================================

Fixed SOR needs a good relaxation parameter. For the five-point Poisson
matrix the optimum is known in closed form, so it makes a fair baseline
for the three adaptive variants, which start from omega = 1 and tune it
on the fly.
"""

import numpy as np

from relaxo import omega_opt, poisson_matrix, poisson_rhs, solve

# %%
# The model problem on a 60 x 60 mesh has 59**2 unknowns.
N = 60
A, b = poisson_matrix(N), poisson_rhs(N)
print(f"n = {A.n}, nnz = {A.nnz}, omega_opt = {omega_opt(N):.6f}")

# %%
# Gauss-Seidel, SOR at the optimum, and the adaptive methods.
runs = {
    "gauss-seidel": solve(A, b, "fixed-sor", omega=1.0),
    "sor(omega_opt)": solve(A, b, "fixed-sor", omega=omega_opt(N)),
    "adaptive-sd": solve(A, b, "adaptive-sd"),
    "adaptive-armijo": solve(A, b, "adaptive-armijo"),
    "adaptive-wolfe": solve(A, b, "adaptive-wolfe"),
}
base = runs["sor(omega_opt)"].iterations
print(f"{'method':<18}{'iters':>8}{'matvecs':>9}{'ratio':>8}")
for name, rep in runs.items():
    print(f"{name:<18}{rep.iterations:>8}{rep.matvecs:>9}{rep.iterations / base:>8.2f}")

# %%
# The steepest-descent variant pays one extra matrix-vector product per
# sweep, the line searches reuse the residual they need anyway.

# %%
# How omega evolves along the Wolfe run.
trace = runs["adaptive-wolfe"].trace
for rec in trace[:: len(trace) // 10]:
    print(f"k={rec.k:>4}  omega={rec.omega:.4f}  rel_res={rec.rel_residual:.2e}")

# %%
# All runs reach the same solution.
ref = runs["sor(omega_opt)"].solution
for name, rep in runs.items():
    print(name, np.max(np.abs(rep.solution - ref)))
