"""Why you can trust the gradients.

The trainer uses a reverse (adjoint) sweep: one forward pass, one backward
pass, exact gradients for every parameter at once. This script cross-checks
it on a small instance against two independent oracles:

* central finite differences of the loss, and
* the parameter-shift rule applied to the Born probabilities
  (exact for gates generated by exp(-i theta sigma / 2)).

Run:  python3 demos/05_gradient_oracles.py
"""

import numpy as np

from qsbm import (
    ModelSpec,
    RandomStream,
    ScramblerSpec,
    compile_scrambler,
    init_parameters,
    loss_and_gradient,
    multimodal_1d,
    output_distribution,
)

rng = RandomStream(11)
model = ModelSpec(num_qubits=4, num_ancillas=1, num_layers=2)
scrambler = compile_scrambler(ScramblerSpec("haar"), 4, rng.child("scr"))
params = init_parameters(model, rng.child("init"))
target = multimodal_1d(3).probs

loss, grad = loss_and_gradient(model, params, scrambler, target)
print(f"loss = {loss:.6f}, {grad.size} gradient components\n")

# oracle 1: central finite differences
step = 1e-5
fd = np.zeros_like(params)
it = np.nditer(params, flags=["multi_index"])
while not it.finished:
    idx = it.multi_index
    up, down = params.copy(), params.copy()
    up[idx] += step
    down[idx] -= step
    fd[idx] = (loss_and_gradient(model, up, scrambler, target)[0]
               - loss_and_gradient(model, down, scrambler, target)[0]) / (2 * step)
    it.iternext()
print(f"max |adjoint - finite difference| = {np.abs(grad - fd).max():.2e}")

# oracle 2: parameter shift on the probabilities, chained through dL/dq
q = output_distribution(model, params, scrambler)
dldq = -target / q
ps = np.zeros_like(params)
it = np.nditer(params, flags=["multi_index"])
while not it.finished:
    idx = it.multi_index
    up, down = params.copy(), params.copy()
    up[idx] += np.pi / 2
    down[idx] -= np.pi / 2
    dq = 0.5 * (output_distribution(model, up, scrambler)
                - output_distribution(model, down, scrambler))
    ps[idx] = np.dot(dldq, dq)
    it.iternext()
print(f"max |adjoint - parameter shift|   = {np.abs(grad - ps).max():.2e}")
