"""Fixed entangling unitaries: Haar draws, brickwork circuits, and analog
spin-chain evolution, plus the Page-value reference they are benchmarked
against.

A scrambler is declared by a :class:`ScramblerSpec`, compiled once per
realization into a :class:`CompiledScrambler`, and then reused unchanged in
every layer of the model (fixed-reservoir semantics).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .rng import RandomStream
from .statevector import (
    MAX_QUBITS,
    PAULI,
    CapacityError,
    StateVector,
    _apply_2q,
    haar_unitary,
    hermitian_eigendecomposition,
)

__all__ = [
    "HamiltonianSpec",
    "tfim_spec",
    "xx_spec",
    "hamiltonian_preset",
    "build_hamiltonian",
    "pauli_string_matrix",
    "hamiltonian_matrix",
    "ScramblerSpec",
    "CompiledScrambler",
    "compile_scrambler",
    "apply_scrambler",
    "apply_scrambler_inverse",
    "page_entropy",
    "expm_apply",
]

# a term is (coefficient, ((qubit, axis), ...)); axis in {"x","y","z"}
PauliTerm = tuple[float, tuple[tuple[int, str], ...]]


@dataclass(frozen=True)
class HamiltonianSpec:
    """Nearest-neighbor spin chain, open boundary:
    H = -sum_i (J_xx XX + J_yy YY + J_zz ZZ) - h_x sum_i X_i
    """

    num_qubits: int
    j_xx: float = 0.0
    j_yy: float = 0.0
    j_zz: float = 0.0
    h_x: float = 0.0

    def __post_init__(self):
        if self.num_qubits < 2:
            raise ValueError(f"spin chain needs >= 2 sites, got {self.num_qubits}")
        for name in ("j_xx", "j_yy", "j_zz", "h_x"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def tfim_spec(num_qubits: int) -> HamiltonianSpec:
    """Transverse-field Ising chain: J_zz = h_x = 1."""
    return HamiltonianSpec(num_qubits, j_zz=1.0, h_x=1.0)


def xx_spec(num_qubits: int) -> HamiltonianSpec:
    """XX chain with transverse field: J_xx = J_yy = h_x = 1."""
    return HamiltonianSpec(num_qubits, j_xx=1.0, j_yy=1.0, h_x=1.0)


def hamiltonian_preset(name: str, num_qubits: int) -> HamiltonianSpec:
    presets = {"tfim": tfim_spec, "xx": xx_spec}
    if name not in presets:
        raise ValueError(f"unknown Hamiltonian preset {name!r}; choose from {sorted(presets)}")
    return presets[name](num_qubits)


def build_hamiltonian(spec: HamiltonianSpec) -> list[PauliTerm]:
    """Pauli terms of the chain: -J_aa a_i a_{i+1} pairs and -h_x x_i fields."""
    terms: list[PauliTerm] = []
    n = spec.num_qubits
    for axis, coupling in (("x", spec.j_xx), ("y", spec.j_yy), ("z", spec.j_zz)):
        if coupling != 0.0:
            for i in range(n - 1):
                terms.append((-coupling, ((i, axis), (i + 1, axis))))
    if spec.h_x != 0.0:
        for i in range(n):
            terms.append((-spec.h_x, ((i, "x"),)))
    return terms


def pauli_string_matrix(ops: tuple[tuple[int, str], ...], num_qubits: int) -> scipy.sparse.csr_matrix:
    """Sparse matrix of a product of Paulis on ``num_qubits`` qubits."""
    by_qubit = dict()
    for qubit, axis in ops:
        if not 0 <= qubit < num_qubits:
            raise ValueError(f"qubit {qubit} out of range")
        by_qubit[qubit] = PAULI[axis]
    m = scipy.sparse.identity(1, dtype=complex, format="csr")
    for qubit in range(num_qubits - 1, -1, -1):  # MSB factor first
        factor = by_qubit.get(qubit, np.eye(2, dtype=complex))
        m = scipy.sparse.kron(m, factor, format="csr")
    return m


def hamiltonian_matrix(terms: list[PauliTerm], num_qubits: int) -> np.ndarray:
    """Dense Hermitian matrix of a Pauli term list."""
    dim = 1 << num_qubits
    if dim > 4096:
        raise CapacityError(f"dense Hamiltonian capped at dim 4096, got {dim}")
    h = scipy.sparse.csr_matrix((dim, dim), dtype=complex)
    for coeff, ops in terms:
        h = h + coeff * pauli_string_matrix(ops, num_qubits)
    return np.asarray(h.todense())


@dataclass(frozen=True)
class ScramblerSpec:
    """Declarative scrambler description.

    kind: "haar" | "brickwork" | "analog" | "identity".
    Brickwork needs ``depth`` (number of alternating layers); analog needs
    ``hamiltonian`` and evolution time ``tau`` (in units of inverse coupling).
    The "identity" kind is a do-nothing scrambler used in tests and ablations.
    """

    kind: str
    depth: int | None = None
    hamiltonian: HamiltonianSpec | None = None
    tau: float | None = None

    def __post_init__(self):
        if self.kind not in ("haar", "brickwork", "analog", "identity"):
            raise ValueError(f"unknown scrambler kind {self.kind!r}")
        if self.kind == "brickwork":
            if self.depth is None or self.depth < 1:
                raise ValueError("brickwork scrambler needs depth >= 1")
        if self.kind == "analog":
            if self.hamiltonian is None:
                raise ValueError("analog scrambler needs a HamiltonianSpec")
            if self.tau is None or self.tau < 0:
                raise ValueError("analog scrambler needs tau >= 0")


def brickwork_pairs(num_qubits: int, layer: int) -> list[tuple[int, int]]:
    """Nearest-neighbor pairs of one brickwork layer (0-indexed).

    Even layers pair (0,1),(2,3),...; odd layers pair (1,2),(3,4),...
    """
    start = layer % 2
    return [(i, i + 1) for i in range(start, num_qubits - 1, 2)]


@dataclass(frozen=True)
class CompiledScrambler:
    """Executable scrambler; immutable once compiled.

    Haar and analog variants hold a dense unitary; brickwork holds the drawn
    two-qubit gate list. The dagger forms are precomputed because the adjoint
    gradient sweep applies the inverse once per layer. Analog additionally
    caches the eigendecomposition used to build exp(-i tau H).
    """

    spec: ScramblerSpec
    num_qubits: int
    matrix: np.ndarray | None = None
    matrix_dagger: np.ndarray | None = None
    gates: tuple[tuple[int, int, np.ndarray], ...] = field(default=())
    gates_dagger: tuple[tuple[int, int, np.ndarray], ...] = field(default=())
    eigenvalues: np.ndarray | None = None
    eigenvectors: np.ndarray | None = None

    @property
    def kind(self) -> str:
        return self.spec.kind


def compile_scrambler(spec: ScramblerSpec, num_qubits: int, rng: RandomStream) -> CompiledScrambler:
    """Draw/compute the executable form of a scrambler, once per realization.

    Dense variants (haar, analog) are capped at 12 qubits (a 4096x4096
    matrix); brickwork stores only its gate list and runs up to the
    statevector capacity.
    """
    if num_qubits > MAX_QUBITS:
        raise CapacityError(f"num_qubits={num_qubits} exceeds {MAX_QUBITS}")
    if spec.kind in ("haar", "analog") and num_qubits > 12:
        raise CapacityError(
            f"dense {spec.kind} scrambler capped at 12 qubits, got {num_qubits}")
    dim = 1 << num_qubits
    if spec.kind == "identity":
        return CompiledScrambler(spec, num_qubits)
    if spec.kind == "haar":
        u = haar_unitary(dim, rng)
        return CompiledScrambler(spec, num_qubits, matrix=u,
                                 matrix_dagger=np.ascontiguousarray(u.conj().T))
    if spec.kind == "brickwork":
        gates = []
        for layer in range(spec.depth):
            for qa, qb in brickwork_pairs(num_qubits, layer):
                gates.append((qa, qb, haar_unitary(4, rng)))
        daggers = tuple((qa, qb, g.conj().T) for qa, qb, g in reversed(gates))
        return CompiledScrambler(spec, num_qubits, gates=tuple(gates),
                                 gates_dagger=daggers)
    # analog: exact evolution from the cached eigendecomposition
    if spec.hamiltonian.num_qubits != num_qubits:
        raise ValueError("HamiltonianSpec qubit count does not match the model")
    h = hamiltonian_matrix(build_hamiltonian(spec.hamiltonian), num_qubits)
    eigenvalues, eigenvectors = hermitian_eigendecomposition(h, check=False)
    phases = np.exp(-1j * spec.tau * eigenvalues)
    matrix = (eigenvectors * phases) @ eigenvectors.conj().T
    return CompiledScrambler(spec, num_qubits, matrix=matrix,
                             matrix_dagger=np.ascontiguousarray(matrix.conj().T),
                             eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def _apply_compiled(psi: np.ndarray, scrambler: CompiledScrambler,
                    inverse: bool = False) -> np.ndarray:
    """Array-level scrambler application (hot path, batch-aware)."""
    if scrambler.kind == "identity":
        return psi
    if scrambler.matrix is not None:
        m = scrambler.matrix_dagger if inverse else scrambler.matrix
        return psi @ m.T if psi.ndim > 1 else m @ psi
    n = scrambler.num_qubits
    for qa, qb, g in (scrambler.gates_dagger if inverse else scrambler.gates):
        psi = _apply_2q(psi, n, qa, qb, g)
    return psi


def apply_scrambler(state: StateVector, scrambler: CompiledScrambler) -> StateVector:
    if state.num_qubits != scrambler.num_qubits:
        raise ValueError(
            f"state has {state.num_qubits} qubits, scrambler {scrambler.num_qubits}")
    return StateVector(state.num_qubits, _apply_compiled(state.amplitudes, scrambler))


def apply_scrambler_inverse(state: StateVector, scrambler: CompiledScrambler) -> StateVector:
    if state.num_qubits != scrambler.num_qubits:
        raise ValueError(
            f"state has {state.num_qubits} qubits, scrambler {scrambler.num_qubits}")
    return StateVector(state.num_qubits,
                       _apply_compiled(state.amplitudes, scrambler, inverse=True))


def page_entropy(d_a: int, d_b: int) -> float:
    """Ensemble-average entanglement entropy of a Haar-random pure state
    across a d_a x d_b bipartition, by direct summation (nats)."""
    if d_a < 2 or d_b < 2:
        raise ValueError("page_entropy needs d_a, d_b >= 2")
    if d_a > d_b:
        raise ValueError(f"expected d_a <= d_b, got {d_a} > {d_b}")
    ks = np.arange(d_b + 1, d_a * d_b + 1, dtype=float)
    return float(np.sum(1.0 / ks) - (d_a - 1) / (2.0 * d_b))


def expm_apply(terms: list[PauliTerm], tau: float, state: StateVector) -> StateVector:
    """Apply exp(-i tau H) to a state, H given as a Pauli term list.

    Dense eigendecomposition path; exact up to floating point for dim <= 4096.
    """
    h = hamiltonian_matrix(terms, state.num_qubits)
    d, v = hermitian_eigendecomposition(h, check=False)
    phases = np.exp(-1j * tau * d)
    amp = v @ (phases * (v.conj().T @ state.amplitudes))
    return StateVector(state.num_qubits, amp)
