"""Symplectic normal form machinery: forms, pairing, square roots, Jordan."""

import numpy as np
import pytest

import symplind as sp
from symplind.linalg import _match_pairs

from conftest import coupled_gain_loss, parametric_oscillator, random_symmetric


def maxabs(a):
    return float(np.max(np.abs(a)))


def normal_form_target(lam):
    n = len(lam)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = np.diag(lam)
    out[n:, :n] = np.diag(lam)
    return out


class TestStandardForm:
    def test_n1(self):
        J = sp.standard_symplectic_form(1)
        assert np.array_equal(J, [[0.0, 1.0], [-1.0, 0.0]])

    def test_n2_blocks(self):
        J = sp.standard_symplectic_form(2)
        assert np.array_equal(J[:2, 2:], np.eye(2))
        assert np.array_equal(J[2:, :2], -np.eye(2))
        assert np.array_equal(J[:2, :2], np.zeros((2, 2)))

    @pytest.mark.parametrize("n", [1, 2, 3, 7])
    def test_involution_identities(self, n):
        J = sp.standard_symplectic_form(n)
        assert maxabs(J @ J + np.eye(2 * n)) == 0.0
        assert maxabs(J.T + J) == 0.0
        assert maxabs(J.T - np.linalg.inv(J)) < 1e-14

    def test_rejects_nonpositive(self):
        with pytest.raises(sp.DimensionMismatch):
            sp.standard_symplectic_form(0)


class TestGeneralizedEigs:
    def test_offdiagonal_pair(self):
        sol = sp.generalized_eigs([[0.0, 1.0], [1.0, 0.0]])
        assert sorted(np.round(sol.values.real, 10)) == [-1.0, 1.0]
        assert maxabs(sol.values.imag) < 1e-12

    def test_identity_gives_imaginary_pair(self):
        sol = sp.generalized_eigs(np.eye(2))
        assert sorted(np.round(sol.values.imag, 10)) == [-1.0, 1.0]
        assert maxabs(sol.values.real) < 1e-12

    def test_coupled_modes_spectrum(self, coupled_blocks):
        sol = sp.generalized_eigs(coupled_blocks.L)
        target = np.sqrt(1.0 - 0.25) / 2.0
        got = np.sort(sol.values.imag)
        assert np.allclose(sorted(np.abs(got)), [target] * 8, atol=1e-9)

    def test_pairing_is_perfect_matching(self):
        L = random_symmetric(12, seed=3)
        sol = sp.generalized_eigs(L)
        touched = sorted(i for p in sol.pairing for i in p)
        assert touched == list(range(12))
        for i, j in sol.pairing:
            assert abs(sol.values[i] + sol.values[j]) <= 1e-8 * max(1.0, abs(sol.values[i]))

    def test_eigen_residual(self):
        L = random_symmetric(10, seed=11)
        sol = sp.generalized_eigs(L)
        assert sol.residual < 1e-10

    def test_rejects_nonsymmetric(self):
        with pytest.raises(sp.NonSymmetricInput):
            sp.generalized_eigs([[0.0, 1.0], [0.5, 0.0]])

    def test_unpairable_values_raise(self):
        with pytest.raises(sp.PairingFailure):
            _match_pairs(np.array([1.0, 2.0, -1.0, -2.5]), tol=1e-8)


class TestMatrixSqrt:
    def test_identity(self):
        assert maxabs(sp.matrix_sqrt(np.eye(3)) - np.eye(3)) < 1e-12

    def test_diagonal(self):
        B = sp.matrix_sqrt(np.diag([4.0, 9.0]))
        assert maxabs(B - np.diag([2.0, 3.0])) < 1e-12

    def test_quarter_rotation(self):
        T = np.array([[0.0, -1.0], [1.0, 0.0]])  # rotation by pi/2
        B = sp.matrix_sqrt(T)
        expect = np.array([[1.0, -1.0], [1.0, 1.0]]) / np.sqrt(2.0)
        assert maxabs(B @ B - T) < 1e-12
        assert maxabs(B - expect) < 1e-12

    @pytest.mark.parametrize("seed", range(6))
    def test_square_and_commute(self, seed):
        rng = np.random.default_rng(seed)
        T = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)) + 3 * np.eye(6)
        B = sp.matrix_sqrt(T)
        assert maxabs(B @ B - T) <= 1e-10 * maxabs(T)
        assert maxabs(B @ T - T @ B) <= 1e-10 * maxabs(T)

    def test_branch_rotation_near_cut(self):
        # eigenvalues hugging the negative real axis from both sides
        T = np.diag([-1.0 + 1e-9j, -2.0 - 1e-9j, 1.5 + 0.0j]).astype(complex)
        Q = np.linalg.qr(np.random.default_rng(5).normal(size=(3, 3)))[0]
        T = Q @ T @ Q.T.conj()
        B = sp.matrix_sqrt(T)
        assert maxabs(B @ B - T) <= 1e-10 * maxabs(T)

    def test_singular_rejected(self):
        with pytest.raises(sp.SingularInput):
            sp.matrix_sqrt(np.diag([1.0, 0.0]))


class TestNormalForm:
    def test_already_normal(self):
        L = np.array([[0.0, 1.0], [1.0, 0.0]])
        nf = sp.sympl_normal_form(L)
        assert abs(abs(nf.lambdas[0]) - 1.0) < 1e-10
        assert nf.residual_J < 1e-10 and nf.residual_L < 1e-10

    def test_parametric_diagonalizable(self):
        blocks = sp.assemble_liouvillian(parametric_oscillator(1.0, 0.0, 0.4, 0.0))
        nf = sp.sympl_normal_form(blocks.L)
        # raw form fixes lambdas only up to pair sign
        mags = sorted(np.round(np.abs(nf.lambdas), 10))
        assert mags == [0.3, 0.7]

    @pytest.mark.parametrize("n2,seed", [(4, 0), (8, 1), (16, 2), (20, 3)])
    def test_random_residuals(self, n2, seed):
        L = random_symmetric(n2, seed)
        nf = sp.sympl_normal_form(L)
        n = n2 // 2
        J = sp.standard_symplectic_form(n)
        assert maxabs(nf.S.T @ J @ nf.S - J) <= 1e-8
        assert maxabs(nf.S.T @ L @ nf.S - normal_form_target(nf.lambdas)) <= 1e-8 * maxabs(L)

    @pytest.mark.parametrize("seed", range(5))
    def test_gauge_exchange_preserves_form(self, seed):
        # flipping lambda_i while exchanging/negating the paired columns is gauge
        L = random_symmetric(8, seed + 100)
        nf = sp.sympl_normal_form(L)
        n = 4
        J = sp.standard_symplectic_form(n)
        S = nf.S.copy()
        lam = nf.lambdas.copy()
        i = seed % n
        ci, cpi = S[:, i].copy(), S[:, n + i].copy()
        S[:, i], S[:, n + i] = -cpi, ci
        lam[i] = -lam[i]
        assert maxabs(S.T @ J @ S - J) <= 1e-8
        assert maxabs(S.T @ L @ S - normal_form_target(lam)) <= 1e-8 * maxabs(L)

    def test_ep_detected_as_defective(self):
        blocks = sp.assemble_liouvillian(parametric_oscillator(1.0, 0.5, 0.5, 0.0))
        with pytest.raises(sp.NotDiagonalizable):
            sp.sympl_normal_form(blocks.L)


class TestDetectJordan:
    def test_parametric_ep(self):
        blocks = sp.assemble_liouvillian(parametric_oscillator(1.0, 0.5, 0.5, 0.0))
        rep = sp.detect_jordan(blocks.L, blocks.J)
        assert rep.classification == "coalesced-pair"
        assert abs(rep.mu - (-0.5)) < 1e-9
        assert abs(rep.nu - 0.25) < 1e-9

    @pytest.mark.parametrize("gamma,eps", [(2.0, 0.8), (0.6, 0.3)])
    def test_ep_family_normalization(self, gamma, eps):
        blocks = sp.assemble_liouvillian(parametric_oscillator(gamma, eps, eps, 0.1))
        rep = sp.detect_jordan(blocks.L, blocks.J)
        assert abs(rep.mu - (-gamma / 2.0)) < 1e-9
        assert abs(rep.nu - eps / 2.0) < 1e-9

    def test_parametric_diagonalizable(self):
        blocks = sp.assemble_liouvillian(parametric_oscillator(1.0, 0.0, 0.4, 0.0))
        rep = sp.detect_jordan(blocks.L, blocks.J)
        assert rep.classification == "diagonalizable"

    def test_coupled_ep_defective(self):
        blocks = sp.assemble_liouvillian(coupled_gain_loss(1.0, 1.0, 1.0))
        rep = sp.detect_jordan(blocks.L, blocks.J)
        assert rep.classification == "coalesced-pair"
        assert any(p.kind == "mode" for p in rep.pairs)
        assert all(abs(p.mu) < 1e-8 for p in rep.pairs if p.kind == "mode")

    def test_coupled_below_ep_cross_coupled(self):
        blocks = sp.assemble_liouvillian(coupled_gain_loss(1.0, 0.5, 0.5))
        rep = sp.detect_jordan(blocks.L, blocks.J)
        assert rep.classification == "coalesced-pair"
        assert {p.kind for p in rep.pairs} == {"cross"}

    @pytest.mark.parametrize("seed", range(4))
    def test_random_diagonalizable(self, seed):
        rep = sp.detect_jordan(random_symmetric(8, seed + 50))
        assert rep.classification == "diagonalizable"


class TestPairInvariants:
    @pytest.mark.parametrize("seed", range(8))
    def test_pm_pairs(self, seed):
        L = random_symmetric(10, seed + 200)
        sol = sp.generalized_eigs(L)
        for i, j in sol.pairing:
            assert abs(sol.values[i] + sol.values[j]) <= 1e-8 * max(1.0, abs(sol.values[i]))
