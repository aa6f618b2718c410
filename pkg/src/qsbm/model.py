"""Layered Born machine around a fixed scrambler, and the trainable-Hamiltonian
variant, with exact reverse-mode (adjoint) gradients.

Fixed-scrambler ansatz, layers applied first-to-last:

    layer l:  R_x(theta[l,i,0]) R_z(theta[l,i,1]) on every qubit i,
              then the compiled scrambler U_S,
              then R_y(theta[l,i,2]) on every qubit i.

Trainable-Hamiltonian ansatz: layer l applies exp(-i tau H_l) with

    H_l = -J_xx[l] sum_i X_i X_{i+1} - sum_{i,a} h_a[l,i] sigma^a_i,

parameters per layer [J_xx, h_x(0..N-1), h_y(0..N-1), h_z(0..N-1)].

The adjoint sweep costs one forward plus one backward pass. For a rotation
gate exp(-i theta sigma/2) the parameter derivative reduces to
Im <lam| sigma |phi_post>; for exp(-i tau H) the derivative along a
Hamiltonian direction uses the eigenbasis divided-difference kernel with an
analytic switch at (near-)degenerate eigenvalue pairs.

Output bins: the N_A ancillas are the highest-index qubits, so the measured
register is the low n = N - N_A bits and the output bin index equals the
basis index of the measured register.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .metrics import Q_FLOOR
from .rng import RandomStream
from .scramblers import CompiledScrambler, _apply_compiled, pauli_string_matrix
from .statevector import (
    MAX_QUBITS,
    CapacityError,
    StateVector,
    _apply_1q,
    hermitian_eigendecomposition,
)

__all__ = [
    "ModelSpec",
    "init_parameters",
    "forward",
    "output_distribution",
    "loss_and_gradient",
    "ModelEvaluation",
    "evaluate",
]

# slot order of the rotation parameters, and their Pauli generators
_ROTATION_SLOTS = ("x", "z", "y")

# eigenvalue gap below which the divided difference switches to its limit
_DEGENERACY_GAP = 1e-8


@dataclass(frozen=True)
class ModelSpec:
    num_qubits: int
    num_ancillas: int
    num_layers: int
    variant: str = "fixed_scrambler"  # or "trainable_hamiltonian"
    tau: float = 0.5  # per-layer evolution time (trainable_hamiltonian only)

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_QUBITS:
            raise CapacityError(f"num_qubits={self.num_qubits} outside [1, {MAX_QUBITS}]")
        if not 0 <= self.num_ancillas < self.num_qubits:
            raise ValueError(f"need 0 <= num_ancillas < num_qubits, got {self.num_ancillas}")
        if self.num_layers < 1:
            raise ValueError("num_layers must be >= 1")
        if self.variant not in ("fixed_scrambler", "trainable_hamiltonian"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "trainable_hamiltonian" and self.num_qubits < 2:
            raise ValueError("trainable_hamiltonian needs >= 2 qubits")

    @property
    def num_measured(self) -> int:
        return self.num_qubits - self.num_ancillas

    @property
    def num_bins(self) -> int:
        return 1 << self.num_measured

    @property
    def ancilla_qubits(self) -> tuple[int, ...]:
        return tuple(range(self.num_measured, self.num_qubits))

    @property
    def parameter_count(self) -> int:
        if self.variant == "fixed_scrambler":
            return 3 * self.num_layers * self.num_qubits
        return (3 * self.num_qubits + 1) * self.num_layers

    @property
    def parameter_shape(self) -> tuple[int, ...]:
        if self.variant == "fixed_scrambler":
            return (self.num_layers, self.num_qubits, 3)
        return (self.num_layers, 3 * self.num_qubits + 1)


def init_parameters(model: ModelSpec, rng: RandomStream) -> np.ndarray:
    """Random initial parameters: angles/fields uniform on (-pi, pi),
    couplings J_xx started at 1.0."""
    params = rng.generator.uniform(-np.pi, np.pi, size=model.parameter_shape)
    if model.variant == "trainable_hamiltonian":
        params[:, 0] = 1.0
    assert params.size == model.parameter_count
    return params


def _check_params(model: ModelSpec, params: np.ndarray) -> np.ndarray:
    params = np.asarray(params, dtype=float)
    if params.shape != model.parameter_shape:
        raise ValueError(
            f"parameter shape {params.shape} does not match {model.parameter_shape}")
    return params


def _check_scrambler(model: ModelSpec, scrambler: CompiledScrambler | None):
    if model.variant == "fixed_scrambler":
        if scrambler is None:
            raise ValueError("fixed_scrambler model needs a compiled scrambler")
        if scrambler.num_qubits != model.num_qubits:
            raise ValueError("scrambler qubit count does not match the model")
    elif scrambler is not None:
        raise ValueError("trainable_hamiltonian model takes no scrambler")


# ---------------------------------------------------------------------------
# trainable-Hamiltonian generators (cached per qubit count)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _hamiltonian_generators(num_qubits: int):
    """Sparse patterns of dH/d(param) for the (3N+1)-per-layer layout.

    Generator k satisfies dH/dp_k = -G_k; index 0 is sum_i X_i X_{i+1}, then
    sigma^x_i, sigma^y_i, sigma^z_i site by site. Returned as one
    concatenated (rows, cols, vals, slots, offsets) quintuple: ``slots`` maps
    each entry to its parameter index (for dense assembly), ``offsets`` are
    the per-generator segment starts (for the gradient contraction).
    """
    n = num_qubits
    gens = []
    xx = sum(pauli_string_matrix(((i, "x"), (i + 1, "x")), n) for i in range(n - 1))
    gens.append(xx)
    for axis in ("x", "y", "z"):
        for i in range(n):
            gens.append(pauli_string_matrix(((i, axis),), n))
    parts = []
    for g in gens:
        coo = g.tocoo()
        parts.append((coo.row.astype(np.intp), coo.col.astype(np.intp),
                      coo.data.astype(complex)))
    rows = np.concatenate([r for r, _, _ in parts])
    cols = np.concatenate([c for _, c, _ in parts])
    vals = np.concatenate([v for _, _, v in parts])
    slots = np.concatenate([np.full(len(r), k, dtype=np.intp)
                            for k, (r, _, _) in enumerate(parts)])
    offsets = np.cumsum([0] + [len(r) for r, _, _ in parts[:-1]]).astype(np.intp)
    return rows, cols, vals, slots, offsets


def _assemble_layer_hamiltonian(num_qubits: int, layer_params: np.ndarray) -> np.ndarray:
    """Dense H_l = -sum_k p_k G_k for one layer's (3N+1) parameters."""
    rows, cols, vals, slots, _ = _hamiltonian_generators(num_qubits)
    dim = 1 << num_qubits
    data = vals * (-layer_params[slots])
    flat = rows * dim + cols
    h = (np.bincount(flat, weights=data.real, minlength=dim * dim)
         + 1j * np.bincount(flat, weights=data.imag, minlength=dim * dim))
    return h.reshape(dim, dim)


def _layer_eig(num_qubits: int, layer_params: np.ndarray):
    h = _assemble_layer_hamiltonian(num_qubits, layer_params)
    return hermitian_eigendecomposition(h, check=False, fast=True)


def _evolve(d: np.ndarray, v: np.ndarray, tau: float, psi: np.ndarray,
            inverse: bool = False) -> np.ndarray:
    sign = 1j if inverse else -1j
    return v @ (np.exp(sign * tau * d) * (v.conj().T @ psi))


def _divided_difference_kernel(d: np.ndarray, tau: float) -> np.ndarray:
    """(e^{-i tau d_j} - e^{-i tau d_k}) / (d_j - d_k), with the analytic
    limit -i tau e^{-i tau d} on (near-)degenerate pairs."""
    delta = d[:, None] - d[None, :]
    e = np.exp(-1j * tau * d)
    small = np.abs(delta) < _DEGENERACY_GAP
    delta[small] = 1.0
    kernel = (e[:, None] - e[None, :]) / delta
    jj, kk = np.nonzero(small)
    kernel[jj, kk] = -1j * tau * np.exp(-1j * tau * 0.5 * (d[jj] + d[kk]))
    return kernel


# ---------------------------------------------------------------------------
# forward
# ---------------------------------------------------------------------------

def _block_gates(axis: str, thetas: np.ndarray) -> np.ndarray:
    """(N, 2, 2) rotation matrices exp(-i theta_i sigma_axis / 2), one per qubit."""
    c = np.cos(thetas / 2.0)
    s = np.sin(thetas / 2.0)
    g = np.zeros((len(thetas), 2, 2), dtype=complex)
    if axis == "x":
        g[:, 0, 0] = c
        g[:, 1, 1] = c
        g[:, 0, 1] = -1j * s
        g[:, 1, 0] = -1j * s
    elif axis == "y":
        g[:, 0, 0] = c
        g[:, 1, 1] = c
        g[:, 0, 1] = -s
        g[:, 1, 0] = s
    else:
        g[:, 0, 0] = c - 1j * s
        g[:, 1, 1] = c + 1j * s
    return g


def _forward_array(model: ModelSpec, params: np.ndarray,
                   scrambler: CompiledScrambler | None,
                   layer_cache: list | None = None) -> np.ndarray:
    n = model.num_qubits
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    if model.variant == "fixed_scrambler":
        for l in range(model.num_layers):
            for slot in (0, 1):  # R_x then R_z pre-rotations
                gates = _block_gates(_ROTATION_SLOTS[slot], params[l, :, slot])
                for q in range(n):
                    psi = _apply_1q(psi, n, q, gates[q])
            psi = _apply_compiled(psi, scrambler)
            gates = _block_gates("y", params[l, :, 2])
            for q in range(n):
                psi = _apply_1q(psi, n, q, gates[q])
        return psi
    for l in range(model.num_layers):
        d, v = _layer_eig(n, params[l])
        if layer_cache is not None:
            layer_cache.append((d, v))
        psi = _evolve(d, v, model.tau, psi)
    return psi


def forward(model: ModelSpec, params: np.ndarray,
            scrambler: CompiledScrambler | None = None) -> StateVector:
    """State prepared by the full circuit from |0...0>."""
    params = _check_params(model, params)
    _check_scrambler(model, scrambler)
    return StateVector(model.num_qubits, _forward_array(model, params, scrambler))


def _output_probs(model: ModelSpec, psi: np.ndarray) -> np.ndarray:
    prob = np.abs(psi) ** 2
    if model.num_ancillas == 0:
        return prob
    return prob.reshape(1 << model.num_ancillas, model.num_bins).sum(axis=0)


def output_distribution(model: ModelSpec, params: np.ndarray,
                        scrambler: CompiledScrambler | None = None) -> np.ndarray:
    """Measured distribution over the 2^(N - N_A) bins of the system register."""
    params = _check_params(model, params)
    _check_scrambler(model, scrambler)
    return _output_probs(model, _forward_array(model, params, scrambler))


# ---------------------------------------------------------------------------
# loss and adjoint gradient
# ---------------------------------------------------------------------------

@dataclass
class ModelEvaluation:
    loss: float
    gradient: np.ndarray
    state: np.ndarray         # final amplitudes
    output_probs: np.ndarray  # measured-register distribution


def _seed_costate(model: ModelSpec, psi: np.ndarray, target_probs: np.ndarray,
                  q: np.ndarray) -> np.ndarray:
    # lam_v = -(p/q)(x_v) psi_v; zero where the q-floor froze the loss
    ratio = np.zeros_like(q)
    np.divide(target_probs, q, out=ratio, where=q > Q_FLOOR)
    if model.num_ancillas == 0:
        return -(ratio * psi)
    psi2 = psi.reshape(1 << model.num_ancillas, model.num_bins)
    return -(ratio[None, :] * psi2).reshape(-1)


def evaluate(model: ModelSpec, params: np.ndarray,
             scrambler: CompiledScrambler | None, target) -> ModelEvaluation:
    """Loss, exact adjoint gradient, final state, and output distribution."""
    params = _check_params(model, params)
    _check_scrambler(model, scrambler)
    target_probs = np.asarray(getattr(target, "probs", target), dtype=float)
    if len(target_probs) != model.num_bins:
        raise ValueError(
            f"target has {len(target_probs)} bins, model outputs {model.num_bins}")

    n = model.num_qubits
    layer_cache: list = []
    psi = _forward_array(model, params, scrambler,
                         layer_cache if model.variant == "trainable_hamiltonian" else None)
    q = _output_probs(model, psi)
    loss = float(-np.sum(target_probs * np.log(np.maximum(q, Q_FLOOR))))

    lam = _seed_costate(model, psi, target_probs, q)
    grad = np.zeros(model.parameter_shape)

    if model.variant == "fixed_scrambler":
        pair = np.stack([psi, lam])  # state and co-state pulled back together
        for l in range(model.num_layers - 1, -1, -1):
            pair = _rotation_block_grad(grad[l, :, 2], "y", params[l, :, 2], pair, n)
            pair = _apply_compiled(pair, scrambler, inverse=True)
            for slot in (1, 0):  # undo R_z then R_x
                pair = _rotation_block_grad(grad[l, :, slot], _ROTATION_SLOTS[slot],
                                            params[l, :, slot], pair, n)
    else:
        phi = psi
        rows, cols, vals, _, offsets = _hamiltonian_generators(n)
        for l in range(model.num_layers - 1, -1, -1):
            d, v = layer_cache[l]
            vc = v.conj()
            phases = np.exp(1j * model.tau * d)
            psi_pre = v @ (phases * (vc.T @ phi))
            x = vc.T @ lam
            y = vc.T @ psi_pre
            c = _divided_difference_kernel(d, model.tau) * (x.conj()[:, None] * y[None, :])
            t = (vc @ c) @ v.T
            # dH/dp_k = -G_k, so d loss/dp_k = -2 Re sum(G_k * T) per generator
            products = vals * t[rows, cols]
            grad[l] = -2.0 * np.real(np.add.reduceat(products, offsets))
            lam = v @ (phases * (vc.T @ lam))
            phi = psi_pre

    return ModelEvaluation(loss=loss, gradient=grad, state=psi, output_probs=q)


def _pauli_overlap(axis: str, pair: np.ndarray, qubit: int) -> complex:
    """<lam| sigma_axis(qubit) |phi> for a stacked (phi, lam) pair,
    evaluated from bit slices without materializing sigma|phi>."""
    m = pair.reshape(2, -1, 2, 1 << qubit)
    f0, f1 = m[0, :, 0, :], m[0, :, 1, :]
    l0, l1 = m[1, :, 0, :], m[1, :, 1, :]
    if axis == "x":
        return np.vdot(l0, f1) + np.vdot(l1, f0)
    if axis == "y":
        return 1j * (np.vdot(l1, f0) - np.vdot(l0, f1))
    return np.vdot(l0, f0) - np.vdot(l1, f1)


def _rotation_block_grad(grad_slice: np.ndarray, axis: str, thetas: np.ndarray,
                         pair: np.ndarray, n: int) -> np.ndarray:
    """Gradients of one rotation block (last gate first), pulling the
    (phi, lam) pair back through each gate as it is processed.

    For U = exp(-i theta sigma / 2): dL/dtheta = Im <lam| sigma |phi_post>.
    """
    daggers = _block_gates(axis, -thetas)
    for q in range(n - 1, -1, -1):
        grad_slice[q] = np.imag(_pauli_overlap(axis, pair, q))
        pair = _apply_1q(pair, n, q, daggers[q])
    return pair


def loss_and_gradient(model: ModelSpec, params: np.ndarray,
                      scrambler: CompiledScrambler | None,
                      target) -> tuple[float, np.ndarray]:
    """Negative log-likelihood and its exact gradient w.r.t. all parameters."""
    ev = evaluate(model, params, scrambler, target)
    return ev.loss, ev.gradient
