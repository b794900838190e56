"""Itoh-Abe discrete gradients and the implicit gradient-flow scheme.

For ``f(x) = x.A.x/2 - x.b`` the scheme

    x' = x - h D^-1 DG(x', x)

with the Itoh-Abe discrete gradient ``DG`` generates exactly the SOR
iterates with ``omega = 2h/(2+h)``. This module keeps an implementation of
the scheme that is independent of :func:`relaxo.solvers.sor_sweep`, so the
two can be run side by side as mutual checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from relaxo.solvers import h_from_omega, sor_sweep
from relaxo.sparse import SparseMatrix

__all__ = [
    "QuadraticObjective",
    "dg_scheme_step",
    "itoh_abe_dg_generic",
    "itoh_abe_dg_quadratic",
    "verify_equivalence",
]

_COINCIDE = 1e-14


@dataclass(frozen=True, eq=False)
class QuadraticObjective:
    """``f(x) = x.A.x/2 - x.b`` for symmetric ``A`` with positive diagonal."""

    matrix: SparseMatrix
    rhs: np.ndarray

    def __post_init__(self):
        rhs = np.array(self.rhs, dtype=np.float64)
        if rhs.shape != (self.matrix.n,):
            raise ValueError("rhs length does not match the matrix")
        rhs.setflags(write=False)
        object.__setattr__(self, "rhs", rhs)

    @property
    def n(self):
        return self.matrix.n

    def _apply(self, x):
        # plain numpy product; deliberately not the compiled kernel
        A = self.matrix
        return np.bincount(A.row_indices(), A.values * x[A.col_idx], minlength=A.n)

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        return float(0.5 * x @ self._apply(x) - x @ self.rhs)

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return self._apply(x) - self.rhs

    __call__ = objective


def itoh_abe_dg_generic(f, x, y, grad=None) -> np.ndarray:
    """Itoh-Abe discrete gradient of an arbitrary scalar function.

    Component ``i`` is the difference quotient of ``f`` between the mixed
    points ``(x_1..x_i, y_{i+1}..y_n)`` and ``(x_1..x_{i-1}, y_i..y_n)``.
    Where ``x_i`` and ``y_i`` coincide (to ``1e-14`` relative) the quotient
    is replaced by its limit, the partial derivative ``grad(z)[i]`` at the
    shared point; ``grad`` must then be supplied.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be vectors of equal length")
    out = np.empty_like(x)
    z = y.copy()
    f_prev = float(f(z))
    if not np.isfinite(f_prev):
        raise FloatingPointError("non-finite objective value")
    for i in range(x.size):
        delta = x[i] - y[i]
        if abs(delta) <= _COINCIDE * (1.0 + abs(x[i])):
            if grad is None:
                raise ValueError(
                    f"x and y coincide in component {i}; a gradient callable is required"
                )
            z[i] = x[i]
            out[i] = np.asarray(grad(z), dtype=np.float64)[i]
            f_prev = float(f(z))
        else:
            z[i] = x[i]
            f_next = float(f(z))
            if not np.isfinite(f_next):
                raise FloatingPointError("non-finite objective value")
            out[i] = (f_next - f_prev) / delta
            f_prev = f_next
    return out


def itoh_abe_dg_quadratic(q: QuadraticObjective, x, y) -> np.ndarray:
    """Closed form for quadratics:
    ``sum_{j<i} a_ij x_j + a_ii (x_i + y_i)/2 + sum_{j>i} a_ij y_j - b_i``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != (q.n,) or y.shape != (q.n,):
        raise ValueError("dimension mismatch")
    A = q.matrix
    rows = A.row_indices()
    cols = A.col_idx
    picked = np.where(cols < rows, x[cols], np.where(cols > rows, y[cols], 0.5 * (x[cols] + y[cols])))
    return np.bincount(rows, A.values * picked, minlength=q.n) - q.rhs


def dg_scheme_step(q: QuadraticObjective, x, h: float) -> np.ndarray:
    """One step of ``x' = x - h D^-1 DG(x', x)``.

    Row ``i`` of the implicit system only involves ``x'_1..x'_i``, so it is
    solved exactly, one component at a time, in increasing order.
    """
    if not h > 0.0:
        raise ValueError(f"step size must be positive, got {h}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (q.n,):
        raise ValueError("dimension mismatch")
    A = q.matrix
    b = q.rhs
    new = x.copy()
    half = 0.5 * h
    for i in range(q.n):
        lo, hi = A.row_ptr[i], A.row_ptr[i + 1]
        cols = A.col_idx[lo:hi]
        vals = A.values[lo:hi]
        lower = cols < i
        upper = cols > i
        a_ii = vals[~(lower | upper)][0]
        s = vals[lower] @ new[cols[lower]] + vals[upper] @ x[cols[upper]] - b[i]
        # x'_i (1 + h/2) = (1 - h/2) x_i - (h / a_ii) s
        new[i] = ((1.0 - half) * x[i] - h * s / a_ii) / (1.0 + half)
    return new


def verify_equivalence(q: QuadraticObjective, x0, omega: float, steps: int) -> float:
    """Largest relative gap between SOR and the discrete-gradient scheme.

    Both are started from ``x0`` and run ``steps`` times, SOR with ``omega``
    and the scheme with ``h = 2 omega/(2 - omega)``. The gap at each step is
    ``max|x_sor - x_dg| / max(|x_sor|, |x_dg|)`` (infinity norms).
    """
    h = h_from_omega(omega)
    x_sor = np.array(x0, dtype=np.float64)
    x_dg = x_sor.copy()
    worst = 0.0
    for _ in range(int(steps)):
        x_sor = sor_sweep(q.matrix, q.rhs, x_sor, omega)
        x_dg = dg_scheme_step(q, x_dg, h)
        gap = np.max(np.abs(x_sor - x_dg), initial=0.0)
        size = max(np.max(np.abs(x_sor), initial=0.0), np.max(np.abs(x_dg), initial=0.0))
        if gap > 0.0:
            worst = max(worst, gap / size)
    return worst
