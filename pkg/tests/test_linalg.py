import numpy as np
import pytest

from otasec.errors import ContractError, ShapeError, SingularMatrixError
from otasec.linalg import cholesky, hermitian_solve, matmul


def cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def triple_loop_matmul(a, b):
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.complex128)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            for k in range(a.shape[1]):
                out[i, j] += a[i, k] * b[k, j]
    return out


def det_by_cofactors(M):
    n = M.shape[0]
    if n == 1:
        return M[0, 0]
    total = 0.0 + 0.0j
    for j in range(n):
        minor = np.delete(np.delete(M, 0, axis=0), j, axis=1)
        total += (-1) ** j * M[0, j] * det_by_cofactors(minor)
    return total


def inverse_by_adjugate(M):
    n = M.shape[0]
    det = det_by_cofactors(M)
    adj = np.zeros_like(M)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * det_by_cofactors(minor)
    return adj / det


class TestMatmul:
    def test_identity(self, rng):
        M = cn(rng, 2, 2)
        assert np.array_equal(matmul(np.eye(2), M), M)

    def test_permutation(self):
        P = np.array([[0.0, 1.0], [1.0, 0.0]])
        v = np.array([[2.0 + 1j], [3.0 - 2j]])
        assert np.array_equal(matmul(P, v), np.array([[3.0 - 2j], [2.0 + 1j]]))

    def test_matches_triple_loop(self, rng):
        a = cn(rng, 3, 4)
        b = cn(rng, 4, 2)
        ref = triple_loop_matmul(a, b)
        assert np.max(np.abs(matmul(a, b) - ref)) <= 1e-12 * np.max(np.abs(ref))

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeError):
            matmul(cn(rng, 2, 3), cn(rng, 2, 3))
        with pytest.raises(ShapeError):
            matmul(cn(rng, 3), cn(rng, 3, 2))

    def test_associative(self, rng):
        for _ in range(10):
            a, b, c = cn(rng, 5, 5), cn(rng, 5, 5), cn(rng, 5, 5)
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            assert np.linalg.norm(left - right) <= 1e-10 * np.linalg.norm(left)


class TestHermitianSolve:
    def test_identity(self):
        rhs = np.array([1.0, 2.0j, -1.0])
        assert np.allclose(hermitian_solve(np.eye(3), rhs), rhs, atol=1e-15)

    def test_diagonal(self):
        B = np.diag([2.0, 4.0]).astype(complex)
        x = hermitian_solve(B, np.array([2.0, 2.0]))
        assert np.allclose(x, [1.0, 0.5], atol=1e-15)

    def test_matches_adjugate_inverse(self, rng):
        for _ in range(5):
            M = cn(rng, 5, 5)
            B = M @ M.conj().T + np.eye(5)
            rhs = cn(rng, 5)
            expected = inverse_by_adjugate(B) @ rhs
            assert np.linalg.norm(hermitian_solve(B, rhs) - expected) <= 1e-9 * np.linalg.norm(
                expected
            )

    def test_residual_bound(self, rng):
        for n in (1, 2, 3, 8, 20):
            M = cn(rng, n, n)
            B = M @ M.conj().T + np.eye(n)
            rhs = cn(rng, n)
            x = hermitian_solve(B, rhs)
            resid = np.linalg.norm(B @ x - rhs)
            bound = 1e-9 * (np.linalg.norm(B) * np.linalg.norm(x) + np.linalg.norm(rhs))
            assert resid <= bound

    def test_rejects_non_hermitian(self, rng):
        B = cn(rng, 3, 3)
        B = B + B.conj().T
        B[0, 1] += 1.0  # break the symmetry well beyond tolerance
        with pytest.raises(ContractError):
            hermitian_solve(B, np.ones(3))

    def test_rejects_indefinite(self):
        B = np.diag([1.0, -1.0]).astype(complex)
        with pytest.raises(SingularMatrixError):
            hermitian_solve(B, np.ones(2))

    def test_rejects_singular(self, rng):
        v = cn(rng, 3)
        B = np.outer(v, v.conj())  # rank one
        with pytest.raises(SingularMatrixError):
            hermitian_solve(B, np.ones(3))

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            hermitian_solve(np.eye(3), np.ones(2))


class TestCholesky:
    def test_factor_reconstructs(self, rng):
        for n in (1, 2, 5, 16, 40):
            M = cn(rng, n, n)
            B = M @ M.conj().T + np.eye(n)
            L = cholesky(B)
            assert np.allclose(np.triu(L, 1), 0.0)
            assert np.linalg.norm(L @ L.conj().T - B) <= 1e-9 * np.linalg.norm(B)

    def test_well_conditioned_near_singular_scale(self, rng):
        # Tiny uniform scaling must not trip the relative pivot floor.
        M = cn(rng, 4, 4)
        B = 1e-20 * (M @ M.conj().T + np.eye(4))
        L = cholesky(B)
        assert np.linalg.norm(L @ L.conj().T - B) <= 1e-9 * np.linalg.norm(B)
