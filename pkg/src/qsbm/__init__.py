"""qsbm: quantum scrambling Born machine simulator, trainer, and benchmarks.

A Born machine whose entanglement comes from a fixed scrambling unitary
(Haar draw, brickwork random circuit, or analog spin-chain evolution) while
only single-qubit rotation angles are trained; plus a variant with trainable
Hamiltonian couplings, classical target distributions, an Adam trainer, an
RBM baseline, and a sweep harness with CSV/JSON outputs.
"""

from .metrics import Q_FLOOR, empirical_distribution, kld, nll, shannon_entropy
from .model import (
    ModelSpec,
    evaluate,
    forward,
    init_parameters,
    loss_and_gradient,
    output_distribution,
)
from .rbm import RbmParams, RbmTrainConfig, cd1_update, exact_distribution, free_energy, train_rbm
from .rng import RandomStream
from .scramblers import (
    CompiledScrambler,
    HamiltonianSpec,
    ScramblerSpec,
    apply_scrambler,
    apply_scrambler_inverse,
    build_hamiltonian,
    compile_scrambler,
    expm_apply,
    hamiltonian_matrix,
    hamiltonian_preset,
    page_entropy,
    tfim_spec,
    xx_spec,
)
from .statevector import (
    MAX_QUBITS,
    CapacityError,
    StateVector,
    apply_dense_unitary,
    apply_single_qubit_gate,
    apply_two_qubit_gate,
    full_probabilities,
    haar_unitary,
    hermitian_eigendecomposition,
    marginal_probabilities,
    reduced_density_matrix,
    rotation_gate,
    sample_counts,
    von_neumann_entropy,
    zero_state,
)
from .targets import (
    Grid1D,
    Grid2D,
    TargetDistribution,
    bivariate_gaussian_2d,
    find_modes_2d,
    four_mode_mixture_2d,
    joint_bin_index,
    multimodal_1d,
    split_bin_index,
)
from .training import (
    AdamState,
    TrainConfig,
    TrainingRecord,
    adam_step,
    half_chain_entropy,
    run_realizations,
    train,
)

__version__ = "0.1.0"
