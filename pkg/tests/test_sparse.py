import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaxo import (
    MatrixMarketError,
    MatvecCounter,
    SparseMatrix,
    dot,
    jacobi_scale,
    matvec,
    norm2,
    parse_matrix_market,
    poisson_matrix,
    random_spd,
    write_matrix_market,
)

from conftest import find_matrix, random_dense_spd

SYM_2x2 = """%%MatrixMarket matrix coordinate real symmetric
% a comment
2 2 3
1 1 2.0
2 1 1.0
2 2 2.0
"""


def mm(body, header="%%MatrixMarket matrix coordinate real general"):
    return header + "\n" + body


class TestParse:
    def test_symmetric_2x2_is_mirrored(self):
        A = parse_matrix_market(SYM_2x2)
        assert A.n == 2
        assert A.nnz == 4
        np.testing.assert_array_equal(A.to_dense(), [[2.0, 1.0], [1.0, 2.0]])

    def test_upper_triangle_symmetric_file(self):
        text = SYM_2x2.replace("2 1 1.0", "1 2 1.0")
        np.testing.assert_array_equal(parse_matrix_market(text).to_dense(), [[2, 1], [1, 2]])

    def test_one_by_one(self):
        A = parse_matrix_market(mm("1 1 1\n1 1 5.0\n"))
        assert A.n == 1
        np.testing.assert_array_equal(A.to_dense(), [[5.0]])

    def test_stream_input(self):
        A = parse_matrix_market(io.StringIO(SYM_2x2))
        assert A.nnz == 4

    def test_general_symmetric_file(self):
        A = parse_matrix_market(mm("2 2 4\n1 1 2\n1 2 -1\n2 1 -1\n2 2 3\n"))
        np.testing.assert_array_equal(A.to_dense(), [[2, -1], [-1, 3]])

    def test_explicit_zero_kept(self):
        A = parse_matrix_market(mm("2 2 4\n1 1 2\n1 2 0\n2 1 0\n2 2 3\n"))
        assert A.nnz == 4

    @pytest.mark.parametrize(
        "text, match",
        [
            ("%%MatrixMarket matrix array real general\n1 1\n1\n", "unsupported"),
            ("%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n", "header"),
            ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n", "field"),
            ("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n", "field"),
            (mm("2 3 1\n1 1 1\n"), "square"),
            (mm("2 2 2\n1 1 1\n3 2 1\n"), "out of range"),
            (mm("2 2 3\n1 1 1\n1 1 2\n2 2 1\n"), "duplicate"),
            (mm("2 2 1\n1 1 1\n"), "missing diagonal"),
            (mm("2 2 2\n1 1 1\n2 2 -1\n"), "non-positive"),
            (mm("2 2 2\n1 1 1\n2 2 0\n"), "non-positive"),
            (mm("2 2 3\n1 1 1\n2 2 1\n"), "expected 3 entries"),
            (mm("2 2\n1 1 1\n"), "size line"),
            (mm("2 2 3\n1 1 2\n1 2 1\n2 2 2\n"), "symmetric"),
            (SYM_2x2.replace("2 2 3\n", "2 2 4\n") + "1 2 1.0\n", "duplicate"),
        ],
    )
    def test_errors(self, text, match):
        with pytest.raises(MatrixMarketError, match=match):
            parse_matrix_market(text)

    def test_round_trip(self, rng):
        A = random_spd(12, rng)
        for symmetric in (True, False):
            B = parse_matrix_market(write_matrix_market(A, symmetric=symmetric))
            np.testing.assert_array_equal(B.row_ptr, A.row_ptr)
            np.testing.assert_array_equal(B.col_idx, A.col_idx)
            np.testing.assert_array_equal(B.values, A.values)

    def test_bcsstk05_if_present(self):
        path = find_matrix("bcsstk05")
        if path is None:
            pytest.skip("BCSSTK05 not available locally")
        from relaxo import read_matrix_market

        A = read_matrix_market(path)
        assert A.n == 153
        assert A.nnz == 2 * 2423 - 153


class TestSparseMatrix:
    def test_validation(self):
        with pytest.raises(ValueError, match="increasing"):
            SparseMatrix(2, [0, 2, 4], [1, 0, 0, 1], [1.0, 2.0, 1.0, 2.0])
        with pytest.raises(ValueError, match="symmetric"):
            SparseMatrix.from_dense([[2.0, 1.0], [1.5, 2.0]])
        with pytest.raises(ValueError, match="row_ptr"):
            SparseMatrix(2, [0, 3, 2], [0, 1, 1], [1.0, 0.0, 1.0])

    def test_symmetry_exact_to_the_bit(self):
        a = np.array([[2.0, 0.1], [0.1 + 1e-18, 2.0]])
        SparseMatrix.from_dense(a)  # 0.1 + 1e-18 rounds to 0.1
        a[1, 0] = np.nextafter(0.1, 1.0)
        with pytest.raises(ValueError, match="symmetric"):
            SparseMatrix.from_dense(a)

    def test_immutable(self):
        A = poisson_matrix(3)
        with pytest.raises(ValueError):
            A.values[0] = 1.0
        with pytest.raises(AttributeError):
            A.n = 3

    def test_invariants_hold(self):
        A = poisson_matrix(5)
        assert A.row_ptr[0] == 0 and A.row_ptr[-1] == A.nnz
        assert np.all(np.diff(A.row_ptr) >= 0)
        for i in range(A.n):
            cols = A.col_idx[A.row_ptr[i]:A.row_ptr[i + 1]]
            assert np.all(np.diff(cols) > 0)


class TestMatvec:
    def test_column_extraction(self):
        A = SparseMatrix.from_dense([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_array_equal(matvec(A, [1.0, 0.0]), [2.0, 1.0])

    @pytest.mark.parametrize("n", [1, 4, 17])
    def test_identity(self, n, rng):
        x = rng.standard_normal(n)
        np.testing.assert_array_equal(matvec(SparseMatrix.from_dense(np.eye(n)), x), x)

    def test_poisson_ones_against_dense_row_sums(self):
        A = poisson_matrix(3)
        dense = A.to_dense()
        expected = dense.sum(axis=1)
        # corner nodes of the 2x2 interior each have two neighbours: 36 - 2*9
        np.testing.assert_array_equal(expected, [18.0, 18.0, 18.0, 18.0])
        np.testing.assert_allclose(matvec(A, np.ones(4)), expected, rtol=0, atol=0)

    def test_counter(self):
        A = poisson_matrix(4)
        c = MatvecCounter()
        for _ in range(3):
            matvec(A, np.ones(A.n), c)
        assert c.count == 3
        A @ np.ones(A.n)
        assert c.count == 3

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            matvec(poisson_matrix(3), np.ones(3))

    @pytest.mark.parametrize("n", [1, 2, 7, 30, 50])
    def test_matches_dense(self, n, rng):
        a = random_dense_spd(n, rng)
        A = SparseMatrix.from_dense(a)
        x = rng.standard_normal(n)
        np.testing.assert_allclose(matvec(A, x), a @ x, rtol=1e-13, atol=1e-13 * np.abs(a).sum())

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 40), st.integers(0, 2**32 - 1))
    def test_symmetry_behavioural(self, n, seed):
        rng = np.random.default_rng(seed)
        A = random_spd(n, rng)
        x, y = rng.standard_normal(n), rng.standard_normal(n)
        lhs, rhs = dot(matvec(A, x), y), dot(matvec(A, y), x)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


class TestScaling:
    def test_diagonal_case(self):
        s = jacobi_scale(SparseMatrix.from_dense([[4.0, 0.0], [0.0, 9.0]]), [4.0, 3.0])
        np.testing.assert_array_equal(s.matrix.to_dense(), np.eye(2))
        np.testing.assert_array_equal(s.rhs, [2.0, 1.0])
        np.testing.assert_allclose(s.scale, [0.5, 1 / 3], rtol=1e-15)

    def test_coupled_2x2(self):
        s = jacobi_scale(SparseMatrix.from_dense([[2.0, 1.0], [1.0, 2.0]]), [1.0, 1.0])
        np.testing.assert_allclose(s.matrix.to_dense(), [[1.0, 0.5], [0.5, 1.0]], rtol=1e-15)
        np.testing.assert_allclose(s.rhs, [1 / math.sqrt(2)] * 2, rtol=1e-15)

    def test_identity_fixed_point(self, rng):
        b = rng.standard_normal(5)
        s = jacobi_scale(SparseMatrix.from_dense(np.eye(5)), b)
        np.testing.assert_array_equal(s.matrix.to_dense(), np.eye(5))
        np.testing.assert_array_equal(s.rhs, b)
        np.testing.assert_array_equal(s.scale, np.ones(5))

    def test_unit_diagonal_and_idempotent(self, rng):
        a = random_dense_spd(20, rng)
        b = rng.standard_normal(20)
        s1 = jacobi_scale(SparseMatrix.from_dense(a), b)
        assert np.all(np.abs(s1.matrix.diagonal() - 1.0) <= 1e-15)
        s2 = jacobi_scale(s1.matrix, s1.rhs)
        np.testing.assert_allclose(s2.matrix.values, s1.matrix.values, rtol=0, atol=1e-15)
        np.testing.assert_allclose(s2.rhs, s1.rhs, rtol=0, atol=1e-15)

    def test_poisson_offdiagonals_are_quarter(self):
        s = jacobi_scale(poisson_matrix(6), np.ones(25))
        off = s.matrix.values[s.matrix.row_indices() != s.matrix.col_idx]
        assert np.all(off == -0.25)

    def test_unscale_solves_original(self, rng):
        a = random_dense_spd(15, rng)
        b = rng.standard_normal(15)
        s = jacobi_scale(SparseMatrix.from_dense(a), b)
        xhat = np.linalg.solve(s.matrix.to_dense(), s.rhs)
        np.testing.assert_allclose(a @ s.unscale(xhat), b, atol=1e-12)
        np.testing.assert_allclose(s.to_scaled(s.unscale(xhat)), xhat, rtol=1e-15)

    def test_rhs_length_checked(self):
        with pytest.raises(ValueError):
            jacobi_scale(poisson_matrix(3), np.ones(3))


def test_dot_and_norm(rng):
    assert dot([1, 2], [3, 4]) == 11.0
    assert norm2([3, 4]) == 5.0
    x = rng.standard_normal(100)
    assert dot(x, x) == pytest.approx(norm2(x) ** 2, rel=1e-14)
    with pytest.raises(ValueError):
        dot([1, 2], [1, 2, 3])
