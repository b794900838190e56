"""
Grid search for the relaxation parameter
========================================

The textbook way to pick omega is to try a grid and keep the fastest.
Here the grid result is compared with the closed-form optimum and with
the adaptive Wolfe method, which needs no grid at all.
"""

from relaxo import best_omega, omega_opt, omega_sweep, poisson_matrix, poisson_rhs, solve

for N in (20, 40):
    A, b = poisson_matrix(N), poisson_rhs(N)
    rows = omega_sweep(A, b)
    w, its, _ = best_omega(rows)
    print(f"N={N}: best grid omega {w:.1f} ({its} iters), omega_opt {omega_opt(N):.4f}, "
          f"wolfe {solve(A, b, 'adaptive-wolfe').iterations} iters")

# %%
# The full table for the last mesh. Small omega is painfully slow.
for w, its, ok in rows:
    print(f"{w:4.1f} {its:>7} {'' if ok else 'not converged'}")
