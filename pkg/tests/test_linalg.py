import math

import numpy as np
import pytest

from segrls import linalg
from segrls.errors import (
    IntermediateSingularityError,
    NotPositiveDefiniteError,
    SingularUpdateError,
)

HILBERT4_INVERSE = np.array(
    [
        [16, -120, 240, -140],
        [-120, 1200, -2700, 1680],
        [240, -2700, 6480, -4200],
        [-140, 1680, -4200, 2800],
    ],
    dtype=float,
)


def random_spd(rng, n, ridge=None):
    g = rng.standard_normal((n, n))
    return g @ g.T + (n if ridge is None else ridge) * np.eye(n)


class TestBatchInverseUpdate:
    def test_single_addition(self):
        got = linalg.batch_inverse_update(np.eye(2), np.array([[1.0], [0.0]]), [1.0])
        assert np.allclose(got, np.diag([0.5, 1.0]), atol=1e-15)

    def test_add_then_remove_same_column(self):
        rng = np.random.default_rng(3)
        b_inv = np.linalg.inv(random_spd(rng, 6))
        x = rng.standard_normal(6)
        got = linalg.batch_inverse_update(b_inv, np.column_stack([x, x]), [1.0, -1.0])
        assert np.linalg.norm(got - b_inv) <= 1e-12 * np.linalg.norm(b_inv)

    def test_matches_direct_inverse_random_trials(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            n = int(rng.integers(3, 30))
            r = int(rng.integers(1, 9))
            b = random_spd(rng, n)
            cols = rng.standard_normal((n, r))
            signs = rng.choice([-1.0, 1.0], size=r)
            a = b + (cols * signs) @ cols.T
            if np.linalg.cond(a) > 1e8:
                continue
            got = linalg.batch_inverse_update(np.linalg.inv(b), cols, signs)
            ref = np.linalg.inv(a)
            assert np.linalg.norm(got - ref) <= 1e-9 * np.linalg.norm(ref)

    def test_result_is_symmetric(self):
        rng = np.random.default_rng(5)
        b_inv = np.linalg.inv(random_spd(rng, 8))
        got = linalg.batch_inverse_update(b_inv, rng.standard_normal((8, 3)),
                                          [1.0, -1.0, 1.0])
        assert np.array_equal(got, got.T)

    def test_rank_collapse_detected(self):
        # removing the only mass along e1 from identity: U = -1 + 1 = 0
        with pytest.raises(SingularUpdateError):
            linalg.batch_inverse_update(np.eye(3), np.array([[1.0], [0.0], [0.0]]),
                                        [-1.0])

    def test_signature_validated(self):
        with pytest.raises(ValueError):
            linalg.batch_inverse_update(np.eye(2), np.ones((2, 1)), [0.5])


class TestChainShermanMorrison:
    def test_single_column_equals_batch(self):
        rng = np.random.default_rng(7)
        b_inv = np.linalg.inv(random_spd(rng, 5))
        x = rng.standard_normal((5, 1))
        got_chain = linalg.chain_sherman_morrison(b_inv, x, [1.0])
        got_batch = linalg.batch_inverse_update(b_inv, x, [1.0])
        assert np.linalg.norm(got_chain - got_batch) <= 1e-14 * np.linalg.norm(got_batch)

    def test_add_remove_pair_returns_input(self):
        rng = np.random.default_rng(9)
        b_inv = np.linalg.inv(random_spd(rng, 6))
        x = rng.standard_normal(6)
        got = linalg.chain_sherman_morrison(b_inv, np.column_stack([x, x]), [1, -1])
        assert np.linalg.norm(got - b_inv) <= 1e-12 * np.linalg.norm(b_inv)

    def test_intermediate_singularity_raises(self):
        # removing a unit direction from the identity: denominator 1 - 1 = 0
        with pytest.raises(IntermediateSingularityError):
            linalg.chain_sherman_morrison(
                np.eye(3), np.array([[1.0], [0.0], [0.0]]), [-1.0]
            )


class TestSolveIndefinite:
    def test_diagonal_mixed_signs(self):
        got = linalg.solve_indefinite(np.diag([2.0, -1.0]), np.array([2.0, 1.0]))
        assert np.allclose(got, [1.0, -1.0], atol=1e-14)

    def test_identity(self):
        rhs = np.arange(8.0).reshape(4, 2)
        assert np.allclose(linalg.solve_indefinite(np.eye(4), rhs), rhs, atol=1e-15)

    def test_random_indefinite_residual(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            n = int(rng.integers(2, 16))
            s = rng.standard_normal((n, n))
            s = (s + s.T) / 2
            rhs = rng.standard_normal((n, 2))
            x = linalg.solve_indefinite(s, rhs)
            assert np.linalg.norm(s @ x - rhs) <= 1e-10 * np.linalg.norm(rhs)

    def test_seeded_4x4_matches_checked_solve(self):
        rng = np.random.default_rng(4)
        s = rng.standard_normal((4, 4))
        s = (s + s.T) / 2
        rhs = rng.standard_normal(4)
        x = linalg.solve_indefinite(s, rhs)
        assert np.linalg.norm(s @ x - rhs) <= 1e-12 * np.linalg.norm(rhs)

    def test_singular_matrix_rejected(self):
        s = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(SingularUpdateError):
            linalg.solve_indefinite(s, np.array([1.0, 0.0]))
        with pytest.raises(SingularUpdateError):
            linalg.solve_indefinite(np.zeros((3, 3)), np.zeros(3))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            linalg.solve_indefinite(np.eye(3), np.zeros(4))


class TestSpdInverse:
    def test_diagonal(self):
        assert np.allclose(
            linalg.spd_inverse(np.diag([4.0, 9.0])), np.diag([0.25, 1.0 / 9.0]),
            atol=1e-15,
        )

    def test_identity(self):
        assert np.allclose(linalg.spd_inverse(np.eye(7)), np.eye(7), atol=1e-15)

    def test_hilbert_4x4_closed_form(self):
        hilbert = np.array([[1.0 / (i + j + 1) for j in range(4)] for i in range(4)])
        got = linalg.spd_inverse(hilbert)
        assert np.max(np.abs(got - HILBERT4_INVERSE) / np.abs(HILBERT4_INVERSE)) <= 1e-6

    def test_inverse_identity_residual(self):
        rng = np.random.default_rng(23)
        a = random_spd(rng, 20)
        got = linalg.spd_inverse(a)
        assert np.max(np.abs(a @ got - np.eye(20))) <= 1e-8

    def test_not_positive_definite_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            linalg.spd_inverse(np.diag([1.0, -1.0]))
        with pytest.raises(NotPositiveDefiniteError):
            linalg.spd_inverse(np.ones((3, 3)))  # rank one


class TestEigenvalues:
    def test_condition_trivial_cases(self):
        assert linalg.condition_number(np.eye(5)) == 1.0
        assert linalg.condition_number(np.diag([10.0, 1.0])) == pytest.approx(10.0)
        assert linalg.condition_number(np.diag([1.0, 1e-12])) == pytest.approx(
            1e12, rel=1e-9
        )

    def test_singular_matrix_reports_infinity(self):
        assert linalg.condition_number(np.zeros((4, 4))) == math.inf
        assert linalg.condition_number(np.diag([1.0, 0.0])) == math.inf

    def test_jacobi_against_bisection_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(5):
            a = rng.standard_normal((5, 5))
            a = (a + a.T) / 2
            mine = np.sort(linalg.jacobi_eigenvalues(a))
            oracle = np.sort(characteristic_roots_by_bisection(a))
            assert mine == pytest.approx(oracle, rel=1e-8, abs=1e-10)

    def test_jacobi_indefinite_spectrum(self):
        a = np.diag([3.0, -2.0, 0.5])
        assert np.sort(linalg.jacobi_eigenvalues(a)) == pytest.approx(
            [-2.0, 0.5, 3.0]
        )


# ----------------------------------------------------------------------
# independent eigenvalue oracle: characteristic polynomial by the
# Faddeev-LeVerrier trace recursion, roots isolated on a sign-change grid
# and polished by bisection


def characteristic_polynomial(a):
    n = a.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ m + coeffs[k - 1] * np.eye(n)
        coeffs[k] = -np.trace(a @ m) / k
    return coeffs  # det(xI - A), highest power first


def characteristic_roots_by_bisection(a, grid_points=20001, iterations=200):
    coeffs = characteristic_polynomial(a)
    bound = float(np.max(np.sum(np.abs(a), axis=1))) + 1e-9  # Gershgorin
    grid = np.linspace(-bound, bound, grid_points)
    values = np.polyval(coeffs, grid)
    roots = []
    for left, right, f_left, f_right in zip(grid, grid[1:], values, values[1:]):
        if f_left == 0.0:
            roots.append(left)
            continue
        if f_left * f_right >= 0.0:
            continue
        lo, hi, f_lo = left, right, f_left
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            f_mid = np.polyval(coeffs, mid)
            if f_lo * f_mid <= 0.0:
                hi = mid
            else:
                lo, f_lo = mid, f_mid
        roots.append(0.5 * (lo + hi))
    assert len(roots) == a.shape[0], "bisection oracle must isolate every eigenvalue"
    return np.array(roots)
