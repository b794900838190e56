"""Model problems: the 2-D Dirichlet Poisson system and standard right-hand sides."""

import math

import numpy as np
import scipy.sparse

from relaxo.sparse import SparseMatrix

__all__ = ["omega_opt", "ones_rhs", "poisson_matrix", "poisson_rhs", "random_spd"]


def poisson_matrix(N: int) -> SparseMatrix:
    """Five-point Laplacian on the interior of a uniform ``N x N`` mesh.

    Returns the SPD matrix ``(4I - B(x)I - I(x)B) / dx**2`` of dimension
    ``(N-1)**2`` with ``dx = 1/N``, where ``B`` is the tridiagonal 0/1
    adjacency of a path. Unknowns are ordered row-major with the
    x-index running fastest.
    """
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}")
    m = N - 1
    inv_dx2 = float(N * N)
    B = scipy.sparse.diags([np.ones(m - 1), np.ones(m - 1)], [-1, 1], shape=(m, m))
    I = scipy.sparse.identity(m)
    A = (4.0 * scipy.sparse.identity(m * m) - scipy.sparse.kron(B, I) - scipy.sparse.kron(I, B))
    return SparseMatrix.from_scipy(inv_dx2 * A.tocsr())


def poisson_rhs(N: int) -> np.ndarray:
    """``sin(pi x) sin(pi y)`` sampled at the interior nodes, same ordering as
    :func:`poisson_matrix`."""
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}")
    s = np.sin(np.pi * np.arange(1, N) / N)
    # y (slow) outer, x (fast) inner
    return np.outer(s, s).ravel()


def omega_opt(N: int) -> float:
    """Optimal SOR parameter for the model problem, ``2 / (1 + sin(pi/(N+1)))``."""
    if N < 2:
        raise ValueError(f"N must be at least 2, got {N}")
    c = math.cos(math.pi / (N + 1))
    return 2.0 / (1.0 + math.sqrt(1.0 - c * c))


def ones_rhs(n: int) -> np.ndarray:
    return np.ones(n)


def random_spd(n: int, rng=None, spread: float = 0.9) -> SparseMatrix:
    """Dense random SPD matrix with unit diagonal (stored sparsely).

    Eigenvalues come in pairs ``1 +/- u`` with ``u`` uniform on
    ``[0, spread]``, so they sum to ``n`` and stay inside
    ``[1 - spread, 1 + spread]``; the eigenvectors are those of a random
    correlation matrix with that spectrum.
    """
    from scipy.stats import random_correlation

    if n < 1:
        raise ValueError("n must be positive")
    if not 0.0 <= spread < 1.0:
        raise ValueError("spread must lie in [0, 1)")
    rng = np.random.default_rng(rng)
    if n == 1:
        return SparseMatrix.from_dense([[1.0]])
    u = rng.uniform(0.0, spread, n // 2)
    eigs = np.concatenate([1.0 + u, 1.0 - u, np.ones(n % 2)])
    eigs *= n / eigs.sum()
    C = random_correlation.rvs(eigs, random_state=rng)
    C = 0.5 * (C + C.T)
    np.fill_diagonal(C, 1.0)
    return SparseMatrix.from_dense(C)
