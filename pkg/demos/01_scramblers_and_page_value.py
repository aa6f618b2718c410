"""How well do the three scrambler types entangle?

Compiles a Haar unitary, brickwork circuits of growing depth, and analog
spin-chain evolutions at growing times, applies each to |0...0> on 8 qubits,
and compares the half-chain von Neumann entropy against the Page value (the
Haar-ensemble average). This is the diagnostic the whole architecture leans
on: once a scrambler reaches Haar-typical entanglement, the trained model
quality stops caring where the entanglement came from.

Run:  python3 demos/01_scramblers_and_page_value.py
"""

import numpy as np

from qsbm import (
    RandomStream,
    ScramblerSpec,
    apply_scrambler,
    compile_scrambler,
    page_entropy,
    tfim_spec,
    xx_spec,
    zero_state,
)
from qsbm.training import half_chain_entropy

N = 8
PAGE = page_entropy(16, 16)
rng = RandomStream(2026)
state0 = zero_state(N)

print(f"Page value for the N={N} half chain: {PAGE:.4f} nats\n")

print("Haar scrambler (20 draws):")
entropies = [half_chain_entropy(apply_scrambler(
    state0, compile_scrambler(ScramblerSpec("haar"), N, rng.child(f"haar{i}"))))
    for i in range(20)]
print(f"  S = {np.mean(entropies):.4f} +- {np.std(entropies, ddof=1):.4f} "
      f"({np.mean(entropies)/PAGE:.1%} of Page)\n")

print("Brickwork circuits (20 draws per depth):")
for depth in (1, 2, 5, 8, 12):
    entropies = [half_chain_entropy(apply_scrambler(
        state0, compile_scrambler(ScramblerSpec("brickwork", depth=depth), N,
                                  rng.child(f"bw{depth}/{i}"))))
        for i in range(20)]
    print(f"  K={depth:2d}: S = {np.mean(entropies):.4f} "
          f"({np.mean(entropies)/PAGE:.1%} of Page)")

print("\nAnalog evolution (deterministic given the Hamiltonian):")
for name, spec_fn in (("TFIM", tfim_spec), ("XX  ", xx_spec)):
    row = []
    for tau in (0.01, 0.5, 1.0, 5.0):
        scrambler = compile_scrambler(
            ScramblerSpec("analog", hamiltonian=spec_fn(N), tau=tau), N, rng)
        s = half_chain_entropy(apply_scrambler(state0, scrambler))
        row.append(f"tau={tau}: {s:.3f}")
    print(f"  {name}: " + "  ".join(row))

print("\nNote the asymmetry: the XX chain reaches ~95% of the Page value by "
      "tau=5, while the critical TFIM quench from |0...0> saturates near 1 nat;"
      "\nthe layered model compensates by re-applying the scrambler L times.")
