"""Compiled CSR kernels shared by the solvers."""

import numba
import numpy as np


@numba.njit(cache=True)
def csr_matvec(row_ptr, col_idx, values, x):
    n = row_ptr.shape[0] - 1
    y = np.empty(n)
    for i in range(n):
        s = 0.0
        for p in range(row_ptr[i], row_ptr[i + 1]):
            s += values[p] * x[col_idx[p]]
        y[i] = s
    return y


@numba.njit(cache=True)
def csr_sor_sweep(row_ptr, col_idx, values, b, x, omega):
    """Forward SOR sweep, overwriting ``x``.

    Entries left of the diagonal see already-updated components, entries
    right of it see the previous iterate.
    """
    n = row_ptr.shape[0] - 1
    for i in range(n):
        s = b[i]
        diag = 0.0
        for p in range(row_ptr[i], row_ptr[i + 1]):
            j = col_idx[p]
            if j == i:
                diag = values[p]
            else:
                s -= values[p] * x[j]
        x[i] = (1.0 - omega) * x[i] + omega * s / diag
