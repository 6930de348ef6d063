import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from djrsp.protocol import ghz3
from djrsp.qmath import (
    I2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    apply,
    basis_ket,
    density_violations,
    embed,
    fidelity_pure,
    is_density_operator,
    ket,
    partial_trace,
    projector,
    tensor,
)

from conftest import density_matrices


def dm(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


class TestTensor:
    def test_identity(self):
        np.testing.assert_array_equal(tensor(I2, I2), np.eye(4))

    def test_flip_first_factor(self):
        out = tensor(SIGMA_X, I2) @ basis_ket("00")
        np.testing.assert_array_equal(out, basis_ket("10"))

    def test_zz_parity_invariant(self):
        bell = ket([1, 0, 0, 1])
        np.testing.assert_allclose(tensor(SIGMA_Z, SIGMA_Z) @ bell, bell, atol=1e-15)

    def test_first_factor_is_high_order_block(self):
        a = np.array([[1, 2], [3, 4]])
        out = tensor(a, I2)
        np.testing.assert_array_equal(out[2:, :2], 3 * np.eye(2))

    @given(st.integers(0, 2**32 - 1))
    def test_associative_exactly(self, seed):
        r = np.random.default_rng(seed)
        a, b, c = (r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2)) for _ in range(3))
        np.testing.assert_array_equal(tensor(tensor(a, b), c), tensor(a, b, c))
        np.testing.assert_allclose(tensor(a, tensor(b, c)), tensor(a, b, c), rtol=0, atol=1e-14)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            tensor()


class TestEmbed:
    def test_single_qubit(self):
        np.testing.assert_array_equal(embed(SIGMA_X, 0, 1), SIGMA_X)

    def test_flips_c_only(self):
        np.testing.assert_array_equal(embed(SIGMA_X, 2, 3) @ basis_ket("000"), basis_ket("001"))

    def test_s_one_weak_op_annihilates_b_excited(self):
        w = np.diag([1.0, 0.0])
        op = embed(w, 1, 2)
        for bits in ("01", "11"):
            np.testing.assert_array_equal(op @ basis_ket(bits), np.zeros(4))
        for bits in ("00", "10"):
            np.testing.assert_array_equal(op @ basis_ket(bits), basis_ket(bits))

    @pytest.mark.parametrize("target, n", [(3, 3), (-1, 2), (1, 1)])
    def test_target_out_of_range(self, target, n):
        with pytest.raises(ValueError):
            embed(SIGMA_X, target, n)

    def test_rejects_non_2x2(self):
        with pytest.raises(ValueError):
            embed(np.eye(4), 0, 2)


class TestApply:
    @given(density_matrices())
    def test_identity(self, rho):
        np.testing.assert_allclose(apply(np.eye(rho.shape[0]), rho), rho, atol=1e-15)

    def test_projective_half(self):
        plus = ket([1, 1])
        out = apply(projector([1, 0]), dm(plus))
        assert np.trace(out).real == pytest.approx(0.5, abs=1e-15)

    def test_bit_flip(self):
        np.testing.assert_array_equal(apply(SIGMA_X, dm([1, 0])), dm([0, 1]))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            apply(np.eye(4), np.eye(2) / 2)

    @given(density_matrices(), st.integers(0, 2**32 - 1))
    def test_unitary_preserves_trace_and_spectrum(self, rho, seed):
        r = np.random.default_rng(seed)
        d = rho.shape[0]
        q, _ = np.linalg.qr(r.normal(size=(d, d)) + 1j * r.normal(size=(d, d)))
        out = apply(q, rho)
        assert abs(np.trace(out) - 1) < 1e-10
        np.testing.assert_allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-10)

    @given(density_matrices(), st.integers(0, 2**32 - 1))
    def test_complete_projective_set_sums_to_one(self, rho, seed):
        r = np.random.default_rng(seed)
        d = rho.shape[0]
        q, _ = np.linalg.qr(r.normal(size=(d, d)) + 1j * r.normal(size=(d, d)))
        total = sum(np.trace(apply(projector(q[:, k]), rho)).real for k in range(d))
        assert total == pytest.approx(1.0, abs=1e-12)


class TestPartialTrace:
    def test_ghz_marginal(self):
        bc = partial_trace(dm(ghz3()), 0)
        expected = (dm(basis_ket("00")) + dm(basis_ket("11"))) / 2
        np.testing.assert_allclose(bc, expected, atol=1e-15)

    @given(density_matrices(num_qubits=1))
    def test_product_state(self, rho):
        zero = dm([1, 0])
        prod = tensor(zero, rho)
        np.testing.assert_allclose(partial_trace(prod, 0), rho, atol=1e-15)
        np.testing.assert_allclose(partial_trace(prod, 1), zero, atol=1e-15)

    def test_drop_second(self):
        rho = (dm(basis_ket("00")) + dm(basis_ket("01"))) / 2
        np.testing.assert_allclose(partial_trace(rho, 1), dm([1, 0]), atol=1e-15)

    def test_preserves_order_of_remaining(self):
        # |0>_A |1>_B |0>_C: dropping A must leave |10>, not |01>
        rho = dm(basis_ket("010"))
        np.testing.assert_array_equal(partial_trace(rho, 0), dm(basis_ket("10")))
        np.testing.assert_array_equal(partial_trace(rho, 1), dm(basis_ket("00")))
        np.testing.assert_array_equal(partial_trace(rho, 2), dm(basis_ket("01")))

    @given(density_matrices(num_qubits=3), st.integers(0, 2))
    def test_preserves_trace(self, rho, drop):
        assert np.trace(partial_trace(rho, drop)).real == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("drop", [2, -1])
    def test_index_out_of_range(self, drop):
        with pytest.raises(ValueError):
            partial_trace(np.eye(4) / 4, drop)

    def test_single_qubit_rejected(self):
        with pytest.raises(ValueError):
            partial_trace(np.eye(2) / 2, 0)


class TestFidelity:
    @given(st.floats(0, 1), st.floats(0, 2 * math.pi))
    def test_self_fidelity(self, w, th):
        phi = np.array([math.sqrt(1 - w), math.sqrt(w) * np.exp(1j * th)])
        assert fidelity_pure(phi, dm(phi)) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        assert fidelity_pure([1, 0], dm([0, 1])) == 0.0

    def test_maximally_mixed(self):
        assert fidelity_pure([1, 0], I2 / 2) == pytest.approx(0.5)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            fidelity_pure([1, 0], np.eye(4) / 4)


class TestValidity:
    @given(density_matrices())
    def test_random_states_valid(self, rho):
        assert is_density_operator(rho)

    def test_detects_problems(self):
        assert any("Hermitian" in p for p in density_violations(np.array([[0.5, 1], [0, 0.5]])))
        assert any("trace" in p for p in density_violations(np.eye(2)))
        assert any("eigenvalue" in p for p in density_violations(np.diag([1.5, -0.5])))
        assert is_density_operator(np.eye(2), normalized=False)

    def test_pauli_algebra(self):
        np.testing.assert_allclose(SIGMA_X @ SIGMA_Y, 1j * SIGMA_Z)
        for p in (SIGMA_X, SIGMA_Y, SIGMA_Z):
            np.testing.assert_array_equal(p @ p, I2)
