"""Sparse matrix storage, Matrix Market I/O and Jacobi scaling.

Matrices are held in compressed sparse row (CSR) form with full symmetric
storage. Every constructor validates the properties the SOR-type solvers
rely on: sorted column indices, exact symmetry, and a strictly positive
stored diagonal.
"""

from __future__ import annotations

import gzip
import io
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from relaxo._kernels import csr_matvec

__all__ = [
    "MatrixMarketError",
    "MatvecCounter",
    "ScaledSystem",
    "SparseMatrix",
    "dot",
    "jacobi_scale",
    "matvec",
    "norm2",
    "parse_matrix_market",
    "read_matrix_market",
    "write_matrix_market",
]


class MatrixMarketError(ValueError):
    """Raised for malformed or unsupported Matrix Market input."""


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Square real matrix in CSR storage.

    Parameters
    ----------
    n : int
        Dimension.
    row_ptr : array of int, shape (n + 1,)
        Row offsets into ``col_idx`` and ``values``.
    col_idx : array of int, shape (nnz,)
        0-based column index of each stored entry, strictly increasing
        within a row.
    values : array of float, shape (nnz,)
        Stored coefficients.

    Raises
    ------
    ValueError
        If the structure is inconsistent, the matrix is not exactly
        symmetric, or a diagonal entry is missing or non-positive.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray
    _diag_pos: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n)
        row_ptr = _frozen(self.row_ptr, np.int64)
        col_idx = _frozen(self.col_idx, np.int64)
        values = _frozen(self.values, np.float64)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "row_ptr", row_ptr)
        object.__setattr__(self, "col_idx", col_idx)
        object.__setattr__(self, "values", values)

        if n < 1:
            raise ValueError(f"dimension must be positive, got {n}")
        if row_ptr.shape != (n + 1,):
            raise ValueError("row_ptr must have n + 1 entries")
        nnz = col_idx.shape[0]
        if values.shape != (nnz,):
            raise ValueError("col_idx and values differ in length")
        if row_ptr[0] != 0 or row_ptr[-1] != nnz:
            raise ValueError("row_ptr must start at 0 and end at nnz")
        if np.any(np.diff(row_ptr) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        if nnz and (col_idx.min() < 0 or col_idx.max() >= n):
            raise ValueError("column index out of range")
        if not np.all(np.isfinite(values)):
            raise ValueError("matrix contains non-finite values")

        rows = self.row_indices()
        same_row = rows[1:] == rows[:-1]
        if np.any(same_row & (col_idx[1:] <= col_idx[:-1])):
            raise ValueError("column indices must be strictly increasing within each row")

        diag_pos = np.full(n, -1, dtype=np.int64)
        on_diag = np.flatnonzero(rows == col_idx)
        diag_pos[rows[on_diag]] = on_diag
        missing = np.flatnonzero(diag_pos < 0)
        if missing.size:
            raise ValueError(f"missing diagonal entry in row {missing[0] + 1}")
        bad = np.flatnonzero(values[diag_pos] <= 0.0)
        if bad.size:
            raise ValueError(
                f"non-positive diagonal entry {values[diag_pos[bad[0]]]!r} in row {bad[0] + 1}"
            )
        diag_pos.setflags(write=False)
        object.__setattr__(self, "_diag_pos", diag_pos)

        # exact symmetry: the transposed coordinate list, re-sorted, must
        # reproduce the original one entry for entry
        order = np.lexsort((rows, col_idx))
        if not (
            np.array_equal(col_idx[order], rows)
            and np.array_equal(rows[order], col_idx)
            and np.array_equal(values[order], values)
        ):
            raise ValueError("matrix is not symmetric")

    @property
    def nnz(self) -> int:
        return int(self.col_idx.shape[0])

    @property
    def shape(self):
        return (self.n, self.n)

    def row_indices(self) -> np.ndarray:
        """Row index of every stored entry."""
        return np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.row_ptr))

    def diagonal(self) -> np.ndarray:
        return self.values[self._diag_pos].copy()

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n))
        dense[self.row_indices(), self.col_idx] = self.values
        return dense

    def to_scipy(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.csr_matrix(
            (self.values, self.col_idx, self.row_ptr), shape=self.shape
        )

    @classmethod
    def from_coo(cls, n, rows, cols, vals) -> "SparseMatrix":
        """Build from 0-based coordinates; duplicate coordinates are rejected."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("coordinate arrays differ in length")
        if rows.size and (min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= n):
            raise ValueError("index out of range")
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
        if np.any(dup):
            k = np.flatnonzero(dup)[0]
            raise ValueError(f"duplicate entry at ({rows[k] + 1}, {cols[k] + 1})")
        row_ptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(row_ptr, rows + 1, 1)
        return cls(n, np.cumsum(row_ptr), cols, vals)

    @classmethod
    def from_dense(cls, a, keep_zeros_on_diagonal=True) -> "SparseMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("expected a square 2-D array")
        mask = a != 0.0
        if keep_zeros_on_diagonal:
            np.fill_diagonal(mask, True)
        rows, cols = np.nonzero(mask)
        return cls.from_coo(a.shape[0], rows, cols, a[rows, cols])

    @classmethod
    def from_scipy(cls, m) -> "SparseMatrix":
        coo = scipy.sparse.coo_matrix(m)
        if coo.shape[0] != coo.shape[1]:
            raise ValueError("matrix must be square")
        coo.sum_duplicates()
        return cls.from_coo(coo.shape[0], coo.row, coo.col, coo.data)

    def __matmul__(self, x):
        return matvec(self, x)


class MatvecCounter:
    """Tally of matrix-vector products, passed to :func:`matvec`."""

    def __init__(self):
        self.count = 0

    def __repr__(self):
        return f"MatvecCounter(count={self.count})"


def matvec(A: SparseMatrix, x, counter: MatvecCounter | None = None) -> np.ndarray:
    """Return ``A @ x``, adding one to ``counter`` if given."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix is {A.n}x{A.n}, vector has shape {x.shape}")
    y = csr_matvec(A.row_ptr, A.col_idx, A.values, np.ascontiguousarray(x))
    if counter is not None:
        counter.count += 1
    return y


def _check_pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return x, y


def dot(x, y) -> float:
    x, y = _check_pair(x, y)
    return float(np.dot(x, y))


def norm2(x) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=np.float64)))


@dataclass(frozen=True, eq=False)
class ScaledSystem:
    """A system ``D^-1/2 A D^-1/2 xhat = D^-1/2 b`` with unit diagonal.

    ``scale`` holds the factors ``1/sqrt(a_ii)``; the original unknowns are
    recovered as ``x = scale * xhat``.
    """

    matrix: SparseMatrix
    rhs: np.ndarray
    scale: np.ndarray

    def unscale(self, xhat) -> np.ndarray:
        return self.scale * np.asarray(xhat, dtype=np.float64)

    def to_scaled(self, x) -> np.ndarray:
        """Map original unknowns to scaled ones (inverse of :meth:`unscale`)."""
        return np.asarray(x, dtype=np.float64) / self.scale


def jacobi_scale(A: SparseMatrix, b) -> ScaledSystem:
    """Symmetric diagonal scaling to a unit-diagonal system.

    Off-diagonal entries become ``a_ij / sqrt(a_ii * a_jj)``; the product
    under the root is commutative, so exact symmetry survives the scaling.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.n,):
        raise ValueError(f"rhs has shape {b.shape}, expected ({A.n},)")
    d = A.diagonal()
    if np.any(d <= 0.0):
        raise ValueError("non-positive diagonal; matrix is not SPD")
    rows = A.row_indices()
    vals = A.values / np.sqrt(d[rows] * d[A.col_idx])
    vals[rows == A.col_idx] = 1.0
    root = np.sqrt(d)
    scale = _frozen(1.0 / root, np.float64)
    rhs = _frozen(b / root, np.float64)
    return ScaledSystem(SparseMatrix(A.n, A.row_ptr, A.col_idx, vals), rhs, scale)


# -- Matrix Market -----------------------------------------------------------


def parse_matrix_market(text) -> SparseMatrix:
    """Parse a real coordinate Matrix Market file into full symmetric storage.

    ``text`` may be a string or a text stream. Indices in the file are
    1-based. For ``symmetric`` files only one triangle is listed and it is
    mirrored here; a coordinate appearing twice after mirroring is an error.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    header = stream.readline()
    tokens = header.strip().split()
    if len(tokens) != 5 or tokens[0] != "%%MatrixMarket":
        raise MatrixMarketError(f"malformed header: {header.strip()!r}")
    obj, fmt, field_, symmetry = (t.lower() for t in tokens[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"unsupported format: {obj} {fmt}")
    if field_ not in ("real", "integer", "double"):
        raise MatrixMarketError(f"unsupported field: {field_}")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"unsupported symmetry: {symmetry}")

    size = None
    for line in stream:
        s = line.strip()
        if s and not s.startswith("%"):
            size = s.split()
            break
    if size is None or len(size) != 3:
        raise MatrixMarketError("missing or malformed size line")
    try:
        nrows, ncols, nnz = (int(t) for t in size)
    except ValueError as exc:
        raise MatrixMarketError(f"malformed size line: {' '.join(size)!r}") from exc
    if nrows != ncols:
        raise MatrixMarketError(f"matrix is not square: {nrows}x{ncols}")

    entries = []
    for line in stream:
        s = line.strip()
        if not s or s.startswith("%"):
            continue
        entries.append(s)
    if len(entries) != nnz:
        raise MatrixMarketError(f"expected {nnz} entries, found {len(entries)}")
    try:
        data = np.loadtxt(entries, ndmin=2) if entries else np.empty((0, 3))
    except ValueError as exc:
        raise MatrixMarketError(f"malformed entry line: {exc}") from exc
    if data.shape[1] != 3:
        raise MatrixMarketError("entry lines must hold 'i j value'")
    rows = data[:, 0].astype(np.int64) - 1
    cols = data[:, 1].astype(np.int64) - 1
    vals = data[:, 2]
    if np.any(rows != data[:, 0] - 1) or np.any(cols != data[:, 1] - 1):
        raise MatrixMarketError("non-integer index")
    bad = (rows < 0) | (rows >= nrows) | (cols < 0) | (cols >= ncols)
    if np.any(bad):
        k = np.flatnonzero(bad)[0]
        raise MatrixMarketError(f"index out of range: ({rows[k] + 1}, {cols[k] + 1})")

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    try:
        return SparseMatrix.from_coo(nrows, rows, cols, vals)
    except ValueError as exc:
        raise MatrixMarketError(str(exc)) from exc


def read_matrix_market(path) -> SparseMatrix:
    """Read a ``.mtx`` file (optionally gzip-compressed)."""
    path = os.fspath(path)
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt") as fh:
        return parse_matrix_market(fh)


def write_matrix_market(A: SparseMatrix, stream=None, symmetric=True) -> str | None:
    """Serialize ``A``; with ``symmetric`` only the lower triangle is written.

    Returns the text when ``stream`` is None.
    """
    rows = A.row_indices()
    cols = A.col_idx
    vals = A.values
    if symmetric:
        keep = cols <= rows
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
    out = io.StringIO() if stream is None else stream
    kind = "symmetric" if symmetric else "general"
    out.write(f"%%MatrixMarket matrix coordinate real {kind}\n")
    out.write(f"{A.n} {A.n} {rows.size}\n")
    for i, j, v in zip(rows, cols, vals):
        out.write(f"{i + 1} {j + 1} {v:.17g}\n")
    if stream is None:
        return out.getvalue()
    return None
