"""Quick reduced-scale de-risking of the trend criteria (1 seed each, fewer epochs)."""
import json, time
import numpy as np
from qsbm import *
from qsbm.training import TrainConfig, train
from qsbm.experiments import expand_points

t0 = time.time()
N = 8
cfg = TrainConfig(epochs=800, num_realizations=1, num_shots=5000, eval_every=400, root_seed=11)
root = RandomStream(11)

def one(kind, L, na, depth=None, ham=None, tau=None, seed=0):
    model = ModelSpec(N, na, L)
    tgt = multimodal_1d(N - na)
    rng = root.child(f"{kind}/{L}/{na}/{depth}/{ham}/{tau}/{seed}")
    if kind == "haar":
        spec = ScramblerSpec("haar")
    elif kind == "br俗":
        pass
    elif kind == "brick":
        spec = ScramblerSpec("brickwork", depth=depth)
    else:
        spec = ScramblerSpec("analog", hamiltonian=hamiltonian_preset(ham, N), tau=tau)
    scr = compile_scrambler(spec, N, rng.child("scr"))
    rec = train(model, scr, tgt, cfg, rng)
    return rec.final_kld_exact, float(rec.kld_empirical[-1])

print("== fig2-style: haar, L sweep, NA sweep (1 seed, 800 ep)")
for na in (0, 1, 2):
    row = []
    for L in (2, 4, 6, 8):
        ke, kemp = one("haar", L, na, seed=1)
        row.append(f"L{L}:{ke:.4f}/{kemp:.4f}")
    print(f"NA={na}: " + "  ".join(row), flush=True)

print("== fig3-style: brickwork K sweep at L=2,6, NA=1")
for L in (2, 6):
    for K in (1, 2, 5):
        ke, kemp = one("brick", L, 1, depth=K, seed=2)
        print(f"L={L} K={K}: {ke:.4f}/{kemp:.4f}", flush=True)

print("== fig4-style: analog tau sweep at L=6, NA=1")
for ham in ("tfim", "xx"):
    for tau in (0.01, 0.5, 5.0):
        ke, kemp = one("analog", 6, 1, ham=ham, tau=tau, seed=3)
        print(f"{ham} tau={tau}: {ke:.4f}/{kemp:.4f}", flush=True)

print(f"total {time.time()-t0:.0f}s")
