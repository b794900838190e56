"""
Solving a system read from a Matrix Market file
===============================================

Matrices from the SuiteSparse collection come as Matrix Market files,
usually storing only one triangle. The reader mirrors them into full
symmetric CSR storage. Pass a path on the command line, or run without
arguments to use a small generated matrix.
"""

import io
import sys

import numpy as np

from relaxo import ones_rhs, parse_matrix_market, random_spd, read_matrix_market, solve, write_matrix_market

if len(sys.argv) > 1:
    A = read_matrix_market(sys.argv[1])
else:
    text = write_matrix_market(random_spd(200, np.random.default_rng(7)))
    print(text.splitlines()[0])
    A = parse_matrix_market(io.StringIO(text))
print(f"n = {A.n}, stored entries = {A.nnz}")

# %%
# The solvers apply symmetric Jacobi scaling internally, so the raw
# matrix can be passed straight in.
b = ones_rhs(A.n)
for method in ("fixed-sor", "adaptive-sd", "adaptive-armijo", "adaptive-wolfe"):
    rep = solve(A, b, method, max_iter=20000)
    print(f"{method:<16} converged={rep.converged} iters={rep.iterations} "
          f"final omega={rep.trace[-1].omega:.3f}")

# %%
# Traces write straight to CSV for plotting elsewhere.
from relaxo.traces import trace_to_csv

print(trace_to_csv(rep.trace[:3]))
