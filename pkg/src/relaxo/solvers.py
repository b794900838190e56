"""SOR sweeps and the adaptive SOR iterations.

All iterations run on the Jacobi-scaled (unit-diagonal) system. The
relaxation parameter ``omega`` is handled through the step size
``h = 2*omega/(2 - omega)``, which maps ``(0, 2)`` onto ``(0, inf)``. In
that variable SOR is a dissipative gradient-flow discretisation of
``f(x) = x.A.x/2 - x.b``, so standard line-search tests on ``f`` can
steer ``h`` without spending extra matrix-vector products.

Methods
-------
``fixed-sor``
    Plain SOR with a constant ``omega`` (Gauss-Seidel for ``omega = 1``).
``adaptive-sd``
    ``h`` is the exact steepest-descent step ``r.r / r.Ar``; one extra
    product ``A r`` per iteration.
``adaptive-armijo``
    ``h`` grows by ``lambda1`` when the sweep just taken satisfied the
    sufficient-decrease test and shrinks by ``rho1`` otherwise.
``adaptive-wolfe``
    As ``adaptive-armijo``, but a step that passes sufficient decrease and
    fails the curvature test grows by the larger ``lambda2``.

The two line-search methods restart from ``(h, omega) = (2, 1)`` whenever
the updated ``omega`` leaves ``(eps_omega, M_omega)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from relaxo._kernels import csr_sor_sweep
from relaxo.sparse import (
    MatvecCounter,
    SparseMatrix,
    dot,
    jacobi_scale,
    matvec,
    norm2,
)

__all__ = [
    "METHODS",
    "IterationRecord",
    "NonFiniteError",
    "SolveReport",
    "SolverConfig",
    "armijo_holds",
    "curvature_holds",
    "h_from_omega",
    "objective_from_residual",
    "omega_from_h",
    "omega_sweep",
    "solve",
    "sor_sweep",
    "steepest_step",
    "update_step_size",
]

METHODS = ("fixed-sor", "adaptive-sd", "adaptive-armijo", "adaptive-wolfe")


class NonFiniteError(FloatingPointError):
    """An iterate or residual became NaN/inf."""

    def __init__(self, iteration, what):
        super().__init__(f"non-finite {what} at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class SolverConfig:
    """Method choice and every tunable constant of the iterations.

    The line-search defaults ``(c1, c2, lambda1, lambda2, rho1) =
    (0.89, 0.95, 1.15, 1.4, 0.85)`` are the published empirical
    combination. ``update_every`` throttles how often the step size is
    re-estimated; 1 means every iteration.
    """

    method: str = "adaptive-wolfe"
    omega: float = 1.0
    c1: float = 0.89
    c2: float = 0.95
    lambda1: float = 1.15
    lambda2: float = 1.4
    rho1: float = 0.85
    eps_omega: float = 0.05
    M_omega: float = 1.995
    tol: float = 1e-12
    max_iter: int = 100_000
    x0: np.ndarray | None = field(default=None, compare=False)
    update_every: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        checks = [
            (0.0 < self.omega < 2.0, "omega must lie in (0, 2)"),
            (0.0 < self.c1 < self.c2 < 1.0, "need 0 < c1 < c2 < 1"),
            (1.0 < self.lambda1 < self.lambda2, "need 1 < lambda1 < lambda2"),
            (0.0 < self.rho1 < 1.0, "need 0 < rho1 < 1"),
            (0.0 < self.eps_omega < 1.0 < self.M_omega < 2.0,
             "need 0 < eps_omega < 1 < M_omega < 2"),
            (self.tol > 0.0, "tol must be positive"),
            (int(self.max_iter) >= 1, "max_iter must be at least 1"),
            (int(self.update_every) >= 1, "update_every must be at least 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    def with_overrides(self, **kwargs) -> "SolverConfig":
        known = {f.name for f in fields(self)}
        unknown = set(kwargs) - known
        if unknown:
            raise TypeError(f"unknown config fields: {sorted(unknown)}")
        return replace(self, **kwargs)


@dataclass(frozen=True)
class IterationRecord:
    """State of an iteration at the start of step ``k``.

    ``omega``/``h`` are the parameters assigned to step ``k``;
    ``rel_residual`` and ``f_value`` describe ``x^(k)`` in scaled variables;
    ``matvecs`` counts the products spent to reach ``x^(k)`` and its
    residual. ``f_decrease`` is ``f(x^(k-1)) - f(x^(k))`` evaluated without
    cancellation (0 for the first record), so dissipation stays observable
    after the decrease drops below the resolution of ``f_value`` itself.
    """

    k: int
    omega: float
    h: float
    rel_residual: float
    f_value: float
    matvecs: int
    f_decrease: float = 0.0


@dataclass(frozen=True)
class SolveReport:
    converged: bool
    iterations: int
    solution: np.ndarray
    trace: tuple
    method: str = ""

    @property
    def matvecs(self) -> int:
        return self.trace[-1].matvecs if self.trace else 0

    @property
    def rel_residual(self) -> float:
        return self.trace[-1].rel_residual


# -- building blocks ---------------------------------------------------------


def omega_from_h(h: float) -> float:
    if not h > 0.0 or not math.isfinite(h):
        raise ValueError(f"step size must be positive and finite, got {h}")
    return 2.0 * h / (2.0 + h)


def h_from_omega(omega: float) -> float:
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    return 2.0 * omega / (2.0 - omega)


def sor_sweep(A: SparseMatrix, b, x, omega: float) -> np.ndarray:
    """One forward SOR sweep; returns a new vector, ``x`` is left untouched.

    Equivalent to ``G_omega x + c_omega`` without forming the iteration
    matrix. Meant for unit-diagonal systems, though the sweep divides by
    ``a_ii`` and is the textbook update for any positive diagonal.
    """
    if not 0.0 < omega < 2.0:
        raise ValueError(f"omega must lie in (0, 2), got {omega}")
    b = np.ascontiguousarray(b, dtype=np.float64)
    out = np.array(x, dtype=np.float64, copy=True)
    if b.shape != (A.n,) or out.shape != (A.n,):
        raise ValueError("dimension mismatch")
    csr_sor_sweep(A.row_ptr, A.col_idx, A.values, b, out, float(omega))
    return out


def steepest_step(r, Ar) -> float:
    """Exact minimising step of ``f`` along ``r``: ``r.r / r.Ar``."""
    rr = dot(r, r)
    if rr == 0.0:
        raise ValueError("zero residual; convergence should have been detected first")
    return rr / dot(r, Ar)


def objective_from_residual(x, r, b) -> float:
    """``f(x) = x.A.x/2 - x.b`` from the residual ``r = b - A x``, no product needed."""
    x, r = np.asarray(x, dtype=np.float64), np.asarray(r, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if not (x.shape == r.shape == b.shape):
        raise ValueError("dimension mismatch")
    return -0.5 * float(np.dot(x, r + b)) + 0.0


def armijo_holds(f_next: float, f_curr: float, g_dot_dx: float, c1: float) -> bool:
    """Sufficient decrease with the true gradient at the old point."""
    return f_next <= f_curr + c1 * g_dot_dx


def curvature_holds(g_curr_dot_dx: float, g_next_dot_dx: float, c2: float) -> bool:
    return c2 * g_curr_dot_dx <= g_next_dot_dx


def update_step_size(h: float, armijo: bool, curvature: bool, cfg: SolverConfig):
    """Next ``(h, omega, reset)`` for the line-search methods.

    ``curvature`` only matters for ``adaptive-wolfe``.
    """
    if not armijo:
        h = cfg.rho1 * h
    elif cfg.method == "adaptive-wolfe" and not curvature:
        h = cfg.lambda2 * h
    else:
        h = cfg.lambda1 * h
    omega = 2.0 * h / (2.0 + h)
    if not cfg.eps_omega < omega < cfg.M_omega:
        return 2.0, 1.0, True
    return h, omega, False


# -- driver ------------------------------------------------------------------


def _as_config(config, overrides) -> SolverConfig:
    if config is None:
        config = SolverConfig()
    elif isinstance(config, str):
        config = SolverConfig(method=config)
    return config.with_overrides(**overrides) if overrides else config


def solve(A: SparseMatrix, b, config: SolverConfig | str | None = None, **overrides) -> SolveReport:
    """Solve ``A x = b`` for SPD ``A`` with the selected SOR variant.

    The system is Jacobi-scaled internally; the returned solution is in the
    original variables, while the trace (residuals, objective values)
    refers to the scaled system. Iteration stops once
    ``||r|| <= tol * ||b||`` (checked before each sweep) or after
    ``max_iter`` sweeps.

    Examples
    --------
    >>> from relaxo.problems import poisson_matrix, poisson_rhs
    >>> rep = solve(poisson_matrix(8), poisson_rhs(8), "adaptive-wolfe")
    >>> rep.converged
    True
    """
    cfg = _as_config(config, overrides)
    system = jacobi_scale(A, b)
    M, rhs = system.matrix, np.asarray(system.rhs)
    n = M.n
    method = cfg.method
    stride = int(cfg.update_every)
    max_iter = int(cfg.max_iter)

    if cfg.x0 is None:
        x = np.zeros(n)
    else:
        x0 = np.asarray(cfg.x0, dtype=np.float64)
        if x0.shape != (n,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({n},)")
        x = system.to_scaled(x0)

    counter = MatvecCounter()
    r = rhs - matvec(M, x, counter)
    bnorm = norm2(rhs)
    denom = bnorm if bnorm > 0.0 else 1.0
    f = objective_from_residual(x, r, rhs)

    if method == "fixed-sor":
        omega = float(cfg.omega)
        h = h_from_omega(omega)
    else:
        h, omega = 2.0, 1.0

    trace = []
    converged = False
    f_drop = 0.0
    k = 0
    while True:
        rel = norm2(r) / denom
        if not (math.isfinite(rel) and math.isfinite(f)):
            raise NonFiniteError(k, "residual")
        state_matvecs = counter.count
        if rel <= cfg.tol:
            converged = True
        if converged or k >= max_iter:
            trace.append(IterationRecord(k, omega, h, rel, f, state_matvecs, f_drop))
            break

        if method == "adaptive-sd" and k % stride == 0:
            h = steepest_step(r, matvec(M, r, counter))
            if not (h > 0.0 and math.isfinite(h)):
                raise NonFiniteError(k, "step size")
            omega = omega_from_h(h)
        trace.append(IterationRecord(k, omega, h, rel, f, state_matvecs, f_drop))

        x_next = sor_sweep(M, rhs, x, omega)
        r_next = rhs - matvec(M, x_next, counter)
        if not np.all(np.isfinite(x_next)):
            raise NonFiniteError(k + 1, "iterate")
        dx = x_next - x
        g_dx = -dot(r, dx)
        # f(x+dx) - f(x) = -dx.(r + r_next)/2 exactly for a quadratic
        df = -0.5 * dot(dx, r + r_next)

        if method in ("adaptive-armijo", "adaptive-wolfe") and k % stride == 0:
            armijo = armijo_holds(df, 0.0, g_dx, cfg.c1)
            curvature = curvature_holds(g_dx, -dot(r_next, dx), cfg.c2)
            h, omega, _ = update_step_size(h, armijo, curvature, cfg)

        x, r = x_next, r_next
        f = f + df
        f_drop = -df
        k += 1

    return SolveReport(
        converged=converged,
        iterations=k,
        solution=system.unscale(x),
        trace=tuple(trace),
        method=method,
    )


def omega_sweep(A: SparseMatrix, b, grid=None, config: SolverConfig | None = None):
    """Fixed-omega SOR over a grid of relaxation parameters.

    Returns a list of ``(omega, iterations, converged)``; the default grid
    is ``0.1, 0.2, ..., 1.9``.
    """
    if grid is None:
        grid = [round(0.1 * i, 10) for i in range(1, 20)]
    base = config if config is not None else SolverConfig()
    rows = []
    for w in grid:
        rep = solve(A, b, base.with_overrides(method="fixed-sor", omega=float(w)))
        rows.append((float(w), rep.iterations, rep.converged))
    return rows


def best_omega(rows):
    """Fastest converged entry of an :func:`omega_sweep` table, or None."""
    ok = [row for row in rows if row[2]]
    if not ok:
        return None
    return min(ok, key=lambda row: (row[1], row[0]))
