"""Adam training loop with global gradient-norm clipping, plus multi-seed
realization management.

The loss and its gradient are always evaluated on exact statevector
probabilities; finite shots enter only the reported empirical KLD, drawn
fresh at every evaluation epoch. Everything is deterministic given the root
seed: realization r derives the substreams "scrambler", "init" and "shots"
from child "realization/r", so records are independent of execution order
and worker count.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import model as model_mod
from .metrics import empirical_distribution, kld, shannon_entropy
from .rng import RandomStream
from .scramblers import CompiledScrambler, ScramblerSpec, compile_scrambler
from .statevector import StateVector, reduced_density_matrix, sample_counts, von_neumann_entropy

__all__ = ["AdamState", "TrainConfig", "TrainingRecord", "adam_step", "train",
           "run_realizations", "half_chain_entropy"]


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def init(cls, params: np.ndarray, learning_rate: float = 0.01) -> "AdamState":
        return cls(m=np.zeros_like(params), v=np.zeros_like(params),
                   learning_rate=learning_rate)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 2000
    num_realizations: int = 20
    num_shots: int = 5000
    learning_rate: float = 0.01
    clip_norm: float = 1.0
    eval_every: int = 50
    root_seed: int = 0
    smoothing_alpha: float = 0.5

    def __post_init__(self):
        if self.epochs < 0 or self.num_realizations < 1 or self.num_shots < 1:
            raise ValueError("epochs, num_realizations, num_shots must be positive")
        if self.eval_every < 1 or (self.epochs and self.epochs % self.eval_every):
            raise ValueError("eval_every must divide epochs")

    def eval_epochs(self) -> list[int]:
        """Evaluation points: epoch 0 (init), every eval_every, and the final."""
        return [0] + list(range(self.eval_every, self.epochs + 1, self.eval_every))


@dataclass
class TrainingRecord:
    seed: int
    epochs: np.ndarray
    nll: np.ndarray
    kld_exact: np.ndarray
    kld_empirical: np.ndarray
    half_chain_entropy: np.ndarray
    final_params: np.ndarray
    final_distribution: np.ndarray
    wall_seconds: float

    @property
    def final_kld_exact(self) -> float:
        return float(self.kld_exact[-1])

    @property
    def best_kld_exact(self) -> float:
        return float(self.kld_exact.min())


def adam_step(state: AdamState, params: np.ndarray, gradient: np.ndarray,
              clip_norm: float = 1.0) -> tuple[AdamState, np.ndarray]:
    """One Adam update; the gradient is rescaled to norm <= clip_norm first."""
    if params.shape != gradient.shape:
        raise ValueError("params and gradient shapes differ")
    if not np.all(np.isfinite(gradient)):
        raise FloatingPointError(
            f"non-finite gradient at step {state.t + 1}; aborting optimization")
    g = gradient
    if clip_norm is not None:
        norm = float(np.linalg.norm(g))
        if norm > clip_norm:
            g = g * (clip_norm / norm)
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g
    v = state.beta2 * state.v + (1.0 - state.beta2) * g * g
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new_params = params - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
    new_state = AdamState(m=m, v=v, t=t, learning_rate=state.learning_rate,
                          beta1=state.beta1, beta2=state.beta2, epsilon=state.epsilon)
    return new_state, new_params


def half_chain_entropy(state: StateVector) -> float:
    """Von Neumann entropy of the lower floor(N/2) qubits (nats)."""
    kept = range(state.num_qubits // 2)
    return von_neumann_entropy(reduced_density_matrix(state, kept))


def train(model: model_mod.ModelSpec, scrambler: CompiledScrambler | None,
          target, config: TrainConfig, rng: RandomStream,
          params0: np.ndarray | None = None) -> TrainingRecord:
    """Train one realization; deterministic given ``rng``'s seed."""
    start = time.perf_counter()
    target_probs = np.asarray(getattr(target, "probs", target), dtype=float)
    target_entropy = shannon_entropy(target_probs)
    init_rng = rng.child("init")
    shots_rng = rng.child("shots")
    params = params0 if params0 is not None else model_mod.init_parameters(model, init_rng)

    adam = AdamState.init(params, learning_rate=config.learning_rate)
    eval_at = set(config.eval_epochs())
    trace: dict[str, list] = {k: [] for k in
                              ("epoch", "nll", "kld_exact", "kld_empirical", "entropy")}

    def record(epoch: int, ev: model_mod.ModelEvaluation):
        trace["epoch"].append(epoch)
        trace["nll"].append(ev.loss)
        trace["kld_exact"].append(ev.loss - target_entropy)
        counts = sample_counts(ev.output_probs, config.num_shots, shots_rng)
        q_hat = empirical_distribution(counts, config.smoothing_alpha)
        trace["kld_empirical"].append(kld(target_probs, q_hat))
        trace["entropy"].append(
            half_chain_entropy(StateVector(model.num_qubits, ev.state)))

    ev = model_mod.evaluate(model, params, scrambler, target_probs)
    if 0 in eval_at:
        record(0, ev)
    for epoch in range(1, config.epochs + 1):
        adam, params = adam_step(adam, params, ev.gradient, config.clip_norm)
        ev = model_mod.evaluate(model, params, scrambler, target_probs)
        if epoch in eval_at:
            record(epoch, ev)

    return TrainingRecord(
        seed=rng.seed,
        epochs=np.array(trace["epoch"], dtype=int),
        nll=np.array(trace["nll"]),
        kld_exact=np.array(trace["kld_exact"]),
        kld_empirical=np.array(trace["kld_empirical"]),
        half_chain_entropy=np.array(trace["entropy"]),
        final_params=params,
        final_distribution=ev.output_probs,
        wall_seconds=time.perf_counter() - start,
    )


@dataclass
class RealizationSet:
    records: list[TrainingRecord]
    mean_kld_exact: np.ndarray   # per eval epoch
    std_kld_exact: np.ndarray
    mean_final_kld_exact: float
    std_final_kld_exact: float
    mean_final_kld_empirical: float
    std_final_kld_empirical: float
    mean_distribution: np.ndarray = field(default=None)


def _std(values: np.ndarray, axis=None) -> np.ndarray:
    # sample std; a single realization reports 0, not nan
    values = np.asarray(values)
    n = values.shape[axis] if axis is not None else values.size
    if n < 2:
        return np.zeros_like(values.mean(axis=axis))
    return values.std(axis=axis, ddof=1)


def run_realizations(model: model_mod.ModelSpec, scrambler_spec: ScramblerSpec | None,
                     target, config: TrainConfig,
                     root: RandomStream | None = None) -> RealizationSet:
    """Train ``config.num_realizations`` independent realizations.

    Each realization draws a fresh scrambler (fixed-scrambler variant) and
    fresh initial parameters from its own substreams of the root seed.
    """
    root = root or RandomStream(config.root_seed)
    records = []
    for r in range(config.num_realizations):
        rng = root.child(f"realization/{r}")
        scrambler = None
        if model.variant == "fixed_scrambler":
            scrambler = compile_scrambler(scrambler_spec, model.num_qubits,
                                          rng.child("scrambler"))
        records.append(train(model, scrambler, target, config, rng))
    kld_trace = np.stack([rec.kld_exact for rec in records])
    finals_exact = np.array([rec.final_kld_exact for rec in records])
    finals_emp = np.array([float(rec.kld_empirical[-1]) for rec in records])
    return RealizationSet(
        records=records,
        mean_kld_exact=kld_trace.mean(axis=0),
        std_kld_exact=_std(kld_trace, axis=0),
        mean_final_kld_exact=float(finals_exact.mean()),
        std_final_kld_exact=float(_std(finals_exact)),
        mean_final_kld_empirical=float(finals_emp.mean()),
        std_final_kld_empirical=float(_std(finals_emp)),
        mean_distribution=np.mean([rec.final_distribution for rec in records], axis=0),
    )
