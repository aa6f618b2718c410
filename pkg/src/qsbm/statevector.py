"""Exact complex statevector simulation on up to 14 qubits.

Conventions, used by every module in the package:

* basis index ``x`` encodes qubit ``i`` in bit ``i``; qubit 0 is the least
  significant bit, so ``|x⟩ = |b_{N-1} ... b_1 b_0⟩`` with ``x = Σ b_i 2^i``.
* reshaping the amplitude vector to ``[2]*N`` puts qubit ``q`` on axis
  ``N-1-q``.
* rotations follow ``R_a(theta) = exp(-i theta sigma_a / 2)``.
* entropies are in nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .rng import RandomStream

__all__ = [
    "MAX_QUBITS",
    "CapacityError",
    "StateVector",
    "zero_state",
    "apply_single_qubit_gate",
    "apply_two_qubit_gate",
    "apply_dense_unitary",
    "full_probabilities",
    "marginal_probabilities",
    "reduced_density_matrix",
    "von_neumann_entropy",
    "hermitian_eigendecomposition",
    "haar_unitary",
    "sample_counts",
    "PAULI",
    "rotation_gate",
]

MAX_QUBITS = 14  # hard memory guard: 2**14 complex amplitudes

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class CapacityError(ValueError):
    """Requested system size exceeds the dense-statevector capacity."""


@dataclass(frozen=True)
class StateVector:
    """Pure state of ``num_qubits`` qubits: 2**num_qubits complex amplitudes."""

    num_qubits: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def rotation_gate(axis: str, theta: float) -> np.ndarray:
    """2x2 matrix of ``exp(-i theta sigma_axis / 2)``."""
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    if axis == "x":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "y":
        return np.array([[c, -s], [s, c]])
    if axis == "z":
        return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]])
    raise ValueError(f"unknown rotation axis {axis!r}")


# ---------------------------------------------------------------------------
# array-level kernels (hot path; operate on flat complex amplitude arrays)
# ---------------------------------------------------------------------------

def _apply_1q(psi: np.ndarray, num_qubits: int, qubit: int, gate: np.ndarray) -> np.ndarray:
    """Apply a 2x2 gate to one qubit.

    ``psi`` may carry leading batch dimensions (e.g. a stacked (2, 2**N)
    state/co-state pair); the gate acts on every batch row.
    """
    m = psi.reshape(-1, 2, 1 << qubit)
    a0 = m[:, 0, :]
    a1 = m[:, 1, :]
    out = np.empty_like(m)
    out[:, 0, :] = gate[0, 0] * a0 + gate[0, 1] * a1
    out[:, 1, :] = gate[1, 0] * a0 + gate[1, 1] * a1
    return out.reshape(psi.shape)


def _apply_2q(psi: np.ndarray, num_qubits: int, qubit_a: int, qubit_b: int,
              gate: np.ndarray) -> np.ndarray:
    """Apply a 4x4 gate; gate index is ``2*b_a + b_b`` (qubit_a = high bit).

    Batch-aware like :func:`_apply_1q`.
    """
    t = psi.reshape(-1, *([2] * num_qubits))
    ax_a = 1 + num_qubits - 1 - qubit_a
    ax_b = 1 + num_qubits - 1 - qubit_b
    g = gate.reshape(2, 2, 2, 2)
    t = np.tensordot(g, t, axes=([2, 3], [ax_a, ax_b]))
    t = np.moveaxis(t, (0, 1), (ax_a, ax_b))
    return np.ascontiguousarray(t).reshape(psi.shape)


def _marginal_from_dense(prob_full: np.ndarray, num_qubits: int,
                         ancilla_qubits: frozenset[int] | set[int]) -> np.ndarray:
    """Sum |psi|^2 over the ancilla axes; kept qubits keep their bit order."""
    if not ancilla_qubits:
        return prob_full
    t = prob_full.reshape([2] * num_qubits)
    axes = tuple(num_qubits - 1 - q for q in ancilla_qubits)
    return t.sum(axis=axes).reshape(-1)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def zero_state(num_qubits: int) -> StateVector:
    """|0...0> on ``num_qubits`` qubits (1 <= num_qubits <= MAX_QUBITS)."""
    if num_qubits < 1 or num_qubits > MAX_QUBITS:
        raise CapacityError(
            f"num_qubits={num_qubits} outside supported range [1, {MAX_QUBITS}]")
    amp = np.zeros(1 << num_qubits, dtype=complex)
    amp[0] = 1.0
    return StateVector(num_qubits, amp)


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.num_qubits} qubits")


def apply_single_qubit_gate(state: StateVector, qubit: int, gate: np.ndarray) -> StateVector:
    _check_qubit(state, qubit)
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise ValueError(f"expected a 2x2 gate, got shape {gate.shape}")
    return StateVector(state.num_qubits,
                       _apply_1q(state.amplitudes, state.num_qubits, qubit, gate))


def apply_two_qubit_gate(state: StateVector, qubit_a: int, qubit_b: int,
                         gate: np.ndarray) -> StateVector:
    _check_qubit(state, qubit_a)
    _check_qubit(state, qubit_b)
    if qubit_a == qubit_b:
        raise ValueError(f"two-qubit gate needs distinct qubits, got {qubit_a} twice")
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (4, 4):
        raise ValueError(f"expected a 4x4 gate, got shape {gate.shape}")
    return StateVector(state.num_qubits,
                       _apply_2q(state.amplitudes, state.num_qubits, qubit_a, qubit_b, gate))


def apply_dense_unitary(state: StateVector, unitary: np.ndarray) -> StateVector:
    unitary = np.asarray(unitary, dtype=complex)
    dim = 1 << state.num_qubits
    if unitary.shape != (dim, dim):
        raise ValueError(f"unitary shape {unitary.shape} does not match dim {dim}")
    return StateVector(state.num_qubits, unitary @ state.amplitudes)


def full_probabilities(state: StateVector) -> np.ndarray:
    p = np.abs(state.amplitudes) ** 2
    return p


def marginal_probabilities(state: StateVector, ancilla_qubits) -> np.ndarray:
    """Measurement distribution after tracing out ``ancilla_qubits``.

    The output bin index is formed by the kept qubits in their original bit
    order (lowest kept qubit = least significant output bit).
    """
    anc = frozenset(int(q) for q in ancilla_qubits)
    for q in anc:
        _check_qubit(state, q)
    if len(anc) >= state.num_qubits:
        raise ValueError("cannot trace out every qubit")
    return _marginal_from_dense(full_probabilities(state), state.num_qubits, anc)


def reduced_density_matrix(state: StateVector, kept_qubits) -> np.ndarray:
    """Reduced density matrix on ``kept_qubits`` (traced over the rest).

    Row/column index is formed by the kept qubits in their original bit order.
    """
    kept = sorted({int(q) for q in kept_qubits})
    for q in kept:
        _check_qubit(state, q)
    n = state.num_qubits
    if not kept or len(kept) == n:
        raise ValueError("kept_qubits must be a nonempty proper subset")
    t = state.amplitudes.reshape([2] * n)
    # kept axes to the front, most-significant kept qubit first
    kept_axes = [n - 1 - q for q in reversed(kept)]
    rest_axes = [ax for ax in range(n) if ax not in kept_axes]
    m = np.transpose(t, kept_axes + rest_axes).reshape(1 << len(kept), -1)
    return m @ m.conj().T


def von_neumann_entropy(rdm: np.ndarray) -> float:
    """S = -sum(lambda ln lambda) in nats; eigenvalues clamped to [0, 1]."""
    lam = np.linalg.eigvalsh(rdm)
    lam = np.clip(lam, 0.0, 1.0)
    nz = lam[lam > 0.0]
    return float(-np.sum(nz * np.log(nz)))


def hermitian_eigendecomposition(matrix: np.ndarray, *, check: bool = True,
                                 fast: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian matrix.

    ``fast=True`` skips the Hermiticity check and uses the MRRR driver; meant
    for hot loops where the input is Hermitian by construction.
    """
    matrix = np.asarray(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"matrix must be square, got {matrix.shape}")
    if matrix.shape[0] > 4096:
        raise CapacityError(f"dense eigendecomposition capped at dim 4096, got {matrix.shape[0]}")
    if check and not np.allclose(matrix, matrix.conj().T, atol=1e-10):
        raise ValueError("matrix is not Hermitian within 1e-10")
    if fast:
        return scipy.linalg.eigh(matrix, driver="evr", check_finite=False)
    return np.linalg.eigh(matrix)


def haar_unitary(dim: int, rng: RandomStream) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the
    R-diagonal phase correction."""
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    g = rng.generator
    z = (g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases  # scales column j by phase(r_jj)


def sample_counts(probs: np.ndarray, num_shots: int, rng: RandomStream) -> np.ndarray:
    """Multinomial counts of ``num_shots`` draws from ``probs``."""
    probs = np.asarray(probs, dtype=float)
    if probs.min() < -1e-12:
        raise ValueError(f"negative probability {probs.min()} beyond tolerance")
    total = probs.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"probabilities sum to {total}, expected 1 within 1e-8")
    p = np.clip(probs, 0.0, None)
    p /= p.sum()
    return rng.generator.multinomial(num_shots, p)
