import numpy as np
import pytest

from qsbm import (
    CapacityError,
    RandomStream,
    StateVector,
    apply_dense_unitary,
    apply_single_qubit_gate,
    apply_two_qubit_gate,
    full_probabilities,
    haar_unitary,
    hermitian_eigendecomposition,
    marginal_probabilities,
    page_entropy,
    reduced_density_matrix,
    rotation_gate,
    sample_counts,
    von_neumann_entropy,
    zero_state,
)

HADAMARD = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def ghz(n=3):
    s = apply_single_qubit_gate(zero_state(n), 0, HADAMARD)
    for q in range(n - 1):
        s = apply_two_qubit_gate(s, q, q + 1, CNOT)
    return s


class TestZeroState:
    def test_single_qubit(self):
        np.testing.assert_array_equal(zero_state(1).amplitudes, [1, 0])

    def test_three_qubits(self):
        s = zero_state(3)
        assert len(s.amplitudes) == 8
        assert s.amplitudes[0] == 1.0
        assert np.count_nonzero(s.amplitudes) == 1

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            zero_state(15)
        with pytest.raises(CapacityError):
            zero_state(0)


class TestGates:
    def test_ry_pi_flips(self):
        # R_y(pi) = [[0,-1],[1,0]] under exp(-i theta sigma/2)
        np.testing.assert_allclose(rotation_gate("y", np.pi),
                                   [[0, -1], [1, 0]], atol=1e-15)
        s = apply_single_qubit_gate(zero_state(1), 0, rotation_gate("y", np.pi))
        np.testing.assert_allclose(s.amplitudes, [0, 1], atol=1e-15)

    def test_rz_phase_only(self):
        s = apply_single_qubit_gate(zero_state(1), 0, rotation_gate("z", 1.3))
        np.testing.assert_allclose(full_probabilities(s), [1, 0], atol=1e-15)
        assert abs(s.amplitudes[0]) == pytest.approx(1.0)

    def test_hadamard_bit_order(self):
        # Hadamard on qubit 1 of |00>: superposition of indices 0 and 2
        s = apply_single_qubit_gate(zero_state(2), 1, HADAMARD)
        np.testing.assert_allclose(s.amplitudes,
                                   [1 / np.sqrt(2), 0, 1 / np.sqrt(2), 0], atol=1e-15)

    def test_qubit_range_checked(self):
        with pytest.raises(ValueError):
            apply_single_qubit_gate(zero_state(2), 2, HADAMARD)

    def test_cnot_makes_bell(self):
        s = apply_single_qubit_gate(zero_state(2), 0, HADAMARD)
        s = apply_two_qubit_gate(s, 0, 1, CNOT)
        np.testing.assert_allclose(full_probabilities(s), [0.5, 0, 0, 0.5], atol=1e-15)

    def test_two_qubit_identity_bit_exact(self):
        s = ghz()
        out = apply_two_qubit_gate(s, 0, 2, np.eye(4, dtype=complex))
        np.testing.assert_array_equal(out.amplitudes, s.amplitudes)

    def test_swap(self):
        s = apply_single_qubit_gate(zero_state(2), 0, np.array([[0, 1], [1, 0]], dtype=complex))
        out = apply_two_qubit_gate(s, 0, 1, SWAP)
        assert np.argmax(full_probabilities(out)) == 2

    def test_duplicate_qubits_rejected(self):
        with pytest.raises(ValueError):
            apply_two_qubit_gate(zero_state(2), 1, 1, SWAP)

    def test_single_qubit_gates_commute_on_distinct_qubits(self, rng):
        g1 = haar_unitary(2, rng.child("a"))
        g2 = haar_unitary(2, rng.child("b"))
        s = ghz(4)
        ab = apply_single_qubit_gate(apply_single_qubit_gate(s, 1, g1), 3, g2)
        ba = apply_single_qubit_gate(apply_single_qubit_gate(s, 3, g2), 1, g1)
        np.testing.assert_allclose(ab.amplitudes, ba.amplitudes, atol=1e-12)


class TestDenseUnitary:
    def test_identity(self):
        s = ghz()
        out = apply_dense_unitary(s, np.eye(8, dtype=complex))
        np.testing.assert_array_equal(out.amplitudes, s.amplitudes)

    def test_u_then_u_dagger(self, rng):
        u = haar_unitary(8, rng)
        s = ghz()
        out = apply_dense_unitary(apply_dense_unitary(s, u), u.conj().T)
        np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-10)

    def test_column_zero(self, rng):
        u = haar_unitary(16, rng)
        out = apply_dense_unitary(zero_state(4), u)
        np.testing.assert_allclose(out.amplitudes, u[:, 0], atol=1e-15)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            apply_dense_unitary(zero_state(3), np.eye(4, dtype=complex))


class TestNormPreservation:
    def test_long_random_sequence(self, rng):
        s = zero_state(6)
        for i in range(60):
            g = rng.child(f"g{i}")
            if i % 3 == 2:
                qa, qb = int(g.generator.integers(0, 6)), int(g.generator.integers(0, 6))
                if qa == qb:
                    qb = (qa + 1) % 6
                s = apply_two_qubit_gate(s, qa, qb, haar_unitary(4, g))
            else:
                s = apply_single_qubit_gate(s, int(g.generator.integers(0, 6)),
                                            haar_unitary(2, g))
        assert abs(s.norm() - 1.0) < 1e-10


class TestMarginals:
    def test_empty_ancilla_set_is_full(self):
        s = ghz()
        np.testing.assert_array_equal(marginal_probabilities(s, set()),
                                      full_probabilities(s))

    def test_ghz_trace_top(self):
        np.testing.assert_allclose(marginal_probabilities(ghz(), {2}),
                                   [0.5, 0, 0, 0.5], atol=1e-15)

    def test_product_state_factorizes(self, rng):
        sys = haar_unitary(4, rng.child("s"))[:, 0]
        anc = haar_unitary(4, rng.child("a"))[:, 0]
        joint = np.kron(anc, sys)  # ancillas on the high bits
        state = StateVector(4, joint)
        np.testing.assert_allclose(marginal_probabilities(state, {2, 3}),
                                   np.abs(sys) ** 2, atol=1e-12)

    def test_matches_rdm_diagonal(self, rng):
        psi = haar_unitary(32, rng)[:, 0]
        state = StateVector(5, psi.copy())
        marg = marginal_probabilities(state, {3, 4})
        rdm = reduced_density_matrix(state, {0, 1, 2})
        np.testing.assert_allclose(marg, np.diag(rdm).real, atol=1e-12)

    def test_sums_to_one(self, rng):
        psi = haar_unitary(32, rng)[:, 0]
        marg = marginal_probabilities(StateVector(5, psi.copy()), {0, 2})
        assert abs(marg.sum() - 1.0) < 1e-10


class TestReducedDensityMatrix:
    def test_product_state_rank_one(self, rng):
        psi = np.kron(haar_unitary(4, rng)[:, 0], haar_unitary(4, rng.child("x"))[:, 0])
        rdm = reduced_density_matrix(StateVector(4, psi), {0, 1})
        lam = np.linalg.eigvalsh(rdm)
        assert lam[-1] == pytest.approx(1.0, abs=1e-10)

    def test_bell_half_is_maximally_mixed(self):
        s = apply_two_qubit_gate(apply_single_qubit_gate(zero_state(2), 0, HADAMARD),
                                 0, 1, CNOT)
        rdm = reduced_density_matrix(s, {0})
        np.testing.assert_allclose(rdm, np.eye(2) / 2, atol=1e-12)

    def test_ghz_two_qubit_mixture(self):
        rdm = reduced_density_matrix(ghz(), {0, 1})
        expected = np.zeros((4, 4))
        expected[0, 0] = expected[3, 3] = 0.5
        np.testing.assert_allclose(rdm, expected, atol=1e-12)

    def test_hermitian_unit_trace_psd(self, rng):
        psi = haar_unitary(64, rng)[:, 0]
        rdm = reduced_density_matrix(StateVector(6, psi.copy()), {1, 3, 4})
        np.testing.assert_allclose(rdm, rdm.conj().T, atol=1e-10)
        assert np.trace(rdm).real == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.eigvalsh(rdm).min() > -1e-10

    def test_rejects_empty_and_full(self):
        with pytest.raises(ValueError):
            reduced_density_matrix(ghz(), set())
        with pytest.raises(ValueError):
            reduced_density_matrix(ghz(), {0, 1, 2})


class TestEntropy:
    def test_pure(self):
        assert von_neumann_entropy(np.outer([1, 0], [1, 0]).astype(complex)) == 0.0

    def test_maximally_mixed(self):
        assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(np.log(2), abs=1e-12)
        assert von_neumann_entropy(np.eye(4) / 4) == pytest.approx(np.log(4), abs=1e-12)

    def test_clamps_small_negative_eigenvalues(self):
        rho = np.diag([1.0 + 5e-11, -5e-11])
        assert von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-9)

    def test_bounds(self, rng):
        psi = haar_unitary(64, rng)[:, 0]
        for kept in ({0}, {0, 1}, {2, 4, 5}):
            s = von_neumann_entropy(reduced_density_matrix(StateVector(6, psi.copy()), kept))
            assert -1e-12 <= s <= len(kept) * np.log(2) + 1e-12


class TestEigendecomposition:
    def test_sigma_z(self):
        d, v = hermitian_eigendecomposition(np.diag([1.0, -1.0]).astype(complex))
        np.testing.assert_allclose(d, [-1, 1])

    def test_tfim_two_site_ground_energy(self):
        # hand diagonalization in the symmetric sector gives lambda^2 = 5
        from qsbm import build_hamiltonian, hamiltonian_matrix, tfim_spec
        h = hamiltonian_matrix(build_hamiltonian(tfim_spec(2)), 2)
        d, _ = hermitian_eigendecomposition(h)
        assert d[0] == pytest.approx(-np.sqrt(5), abs=1e-12)

    def test_diagonal_matrix(self):
        diag = np.array([3.0, -1.0, 2.0, 0.5])
        d, v = hermitian_eigendecomposition(np.diag(diag).astype(complex))
        np.testing.assert_allclose(d, np.sort(diag))
        np.testing.assert_allclose(np.abs(v), np.eye(4)[:, np.argsort(diag)], atol=1e-12)

    def test_residual_and_orthogonality(self, rng):
        g = rng.generator
        m = g.standard_normal((64, 64)) + 1j * g.standard_normal((64, 64))
        h = m + m.conj().T
        d, v = hermitian_eigendecomposition(h)
        res = np.linalg.norm(h @ v - v * d) / np.linalg.norm(h)
        assert res < 1e-9
        assert np.linalg.norm(v.conj().T @ v - np.eye(64)) < 1e-9

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            hermitian_eigendecomposition(np.array([[0, 1], [0, 0]], dtype=complex))


class TestHaarUnitary:
    def test_unitarity(self, rng):
        for dim in (2, 4, 8):
            u = haar_unitary(dim, rng.child(str(dim)))
            assert np.linalg.norm(u.conj().T @ u - np.eye(dim)) < 1e-10

    def test_entry_moment(self, rng):
        # unitary invariance forces E|U_00|^2 = 1/dim
        draws = 10000
        vals = np.empty(draws)
        g = rng.generator
        for i in range(draws):
            z = (g.standard_normal((4, 4)) + 1j * g.standard_normal((4, 4))) / np.sqrt(2)
            q, r = np.linalg.qr(z)
            u00 = q[0, 0] * r[0, 0] / abs(r[0, 0])
            vals[i] = abs(u00) ** 2
        # Var|U_00|^2 for dim=4 is below (1/4)^2; 3 standard errors
        assert abs(vals.mean() - 0.25) < 3 * vals.std() / np.sqrt(draws)

    def test_page_typicality_n6(self, rng):
        ents = []
        for i in range(50):
            u = haar_unitary(64, rng.child(f"p{i}"))
            rdm = reduced_density_matrix(StateVector(6, u[:, 0].copy()), {0, 1, 2})
            ents.append(von_neumann_entropy(rdm))
        page = page_entropy(8, 8)
        assert abs(np.mean(ents) - page) / page < 0.01


class TestSampleCounts:
    def test_deterministic_outcome(self, rng):
        counts = sample_counts(np.array([1.0, 0.0]), 5000, rng)
        np.testing.assert_array_equal(counts, [5000, 0])

    def test_binomial_statistics(self, rng):
        counts = sample_counts(np.array([0.5, 0.5]), 10**6, rng)
        assert counts.sum() == 10**6
        assert abs(counts[0] - 5 * 10**5) < 5 * 500

    def test_seed_reproducibility(self):
        p = np.array([0.1, 0.2, 0.3, 0.4])
        a = sample_counts(p, 977, RandomStream(4242))
        b = sample_counts(p, 977, RandomStream(4242))
        np.testing.assert_array_equal(a, b)

    def test_rejects_bad_probs(self, rng):
        with pytest.raises(ValueError):
            sample_counts(np.array([1.1, -0.1]), 10, rng)
        with pytest.raises(ValueError):
            sample_counts(np.array([0.6, 0.6]), 10, rng)


class TestRandomStream:
    def test_child_streams_independent_of_order(self):
        root = RandomStream(7)
        a_first = root.child("a").generator.standard_normal(4)
        root2 = RandomStream(7)
        b_first = root2.child("b").generator.standard_normal(4)
        a_second = root2.child("a").generator.standard_normal(4)
        np.testing.assert_array_equal(a_first, a_second)
        assert not np.array_equal(a_first, b_first)
