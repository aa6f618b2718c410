"""Configuration-driven sweep harness.

A JSON config declares one experiment kind and its sweep axes; running it
produces, in the output directory:

* ``results.csv``   one row per (sweep point, realization, eval epoch),
* ``summary.csv``   final-epoch statistics per sweep point,
* ``distributions.csv``  target vs mean learned distribution (2D experiments),
* ``manifest.json`` the fully resolved config, derived seeds, and every
  numerical design decision that affects the outputs.

``results.csv`` is byte-identical for a given (config, root seed) regardless
of worker count or interruption/resume history: realizations are seeded by
named substreams, jobs run under a single BLAS thread, and the file is always
rewritten in canonical order. The ``wall_seconds`` column is therefore left
empty in the CSV; measured timings go to the manifest's volatile section.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__ as _package_version
from .metrics import Q_FLOOR
from .model import ModelSpec
from .rbm import RbmRecord, RbmTrainConfig, train_rbm
from .rng import RandomStream
from .scramblers import ScramblerSpec, compile_scrambler, hamiltonian_preset
from .targets import (
    DEFAULT_WEIGHT_SEED,
    TargetDistribution,
    bivariate_gaussian_2d,
    four_mode_mixture_2d,
    multimodal_1d,
)
from .training import TrainConfig, TrainingRecord, train

DISTRIBUTION_COLUMNS = ["experiment_id", "point_key", "model", "seed", "bin",
                        "ix", "iy", "x_center", "y_center", "target_prob",
                        "learned_prob"]

__all__ = ["ConfigError", "load_config", "validate_config", "expand_points",
           "run", "summarize", "RESULT_COLUMNS", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1

EXPERIMENT_KINDS = ("haar_layers", "brickwork_depth", "analog_tau",
                    "trainable_hamiltonian_2d", "classical_comparison", "single_run")

RESULT_COLUMNS = ["experiment_id", "scrambler_type", "hamiltonian_preset",
                  "N", "N_A", "L", "K", "tau", "rho", "seed", "epoch",
                  "nll", "kld_exact", "kld_empirical", "half_chain_entropy",
                  "wall_seconds"]

SUMMARY_COLUMNS = ["experiment_id", "scrambler_type", "hamiltonian_preset",
                   "N", "N_A", "L", "K", "tau", "rho", "num_seeds", "final_epoch",
                   "kld_exact_mean", "kld_exact_std",
                   "kld_empirical_mean", "kld_empirical_std",
                   "best_kld_exact_mean", "nll_mean", "half_chain_entropy_mean"]


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries file:line anchors."""


# ---------------------------------------------------------------------------
# config loading and validation
# ---------------------------------------------------------------------------

_TOP_KEYS = {"schema_version", "experiment", "scale", "root_seed", "output_dir",
             "model", "scrambler", "target", "train", "rbm", "workers"}

_DEFAULT_TRAIN = {"epochs": 2000, "num_realizations": 20, "num_shots": 5000,
                  "learning_rate": 0.01, "clip_norm": 1.0, "eval_every": 50,
                  "smoothing_alpha": 0.5}

_DEFAULT_RBM = {"hidden_units": [33], "epochs": 10000, "minibatch": 64,
                "learning_rate": 0.01, "eval_every": 250, "init_scale": 0.1}


def _anchor(path: Path | None, raw: str | None, key: str) -> str:
    """Best-effort line anchor for a config key, for error messages."""
    if raw is None:
        return str(path or "<config>")
    needle = f'"{key.split(".")[-1]}"'
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if needle in line:
            return f"{path or '<config>'}:{lineno}"
    return f"{path or '<config>'}:1"


class _Validator:
    def __init__(self, path: Path | None, raw: str | None):
        self.path = path
        self.raw = raw

    def fail(self, key: str, message: str):
        raise ConfigError(f"{_anchor(self.path, self.raw, key)}: {key}: {message}")

    def require(self, mapping: dict, key: str, types, context: str = ""):
        full = f"{context}.{key}" if context else key
        if key not in mapping:
            self.fail(full, "missing required key")
        value = mapping[key]
        if not isinstance(value, types):
            self.fail(full, f"expected {types}, got {type(value).__name__}")
        return value

    def int_list(self, mapping: dict, key: str, context: str, lo: int, hi: int) -> list[int]:
        value = mapping.get(key)
        full = f"{context}.{key}" if context else key
        if value is None:
            self.fail(full, "missing required key")
        values = value if isinstance(value, list) else [value]
        out = []
        for v in values:
            if not isinstance(v, int) or isinstance(v, bool) or not lo <= v <= hi:
                self.fail(full, f"values must be integers in [{lo}, {hi}], got {v!r}")
            out.append(v)
        if not out:
            self.fail(full, "list must not be empty")
        return out

    def float_list(self, mapping: dict, key: str, context: str, lo: float, hi: float) -> list[float]:
        value = mapping.get(key)
        full = f"{context}.{key}" if context else key
        if value is None:
            self.fail(full, "missing required key")
        values = value if isinstance(value, list) else [value]
        out = []
        for v in values:
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not lo <= v <= hi:
                self.fail(full, f"values must be numbers in [{lo}, {hi}], got {v!r}")
            out.append(float(v))
        if not out:
            self.fail(full, "list must not be empty")
        return out


def load_config(path: str | Path) -> dict:
    """Parse, validate, and resolve a config file (defaults filled in)."""
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    return validate_config(data, path=path, raw=raw)


def validate_config(data: dict, path: Path | None = None, raw: str | None = None) -> dict:
    """Validate a config mapping and return the resolved form."""
    v = _Validator(path, raw)
    if not isinstance(data, dict):
        raise ConfigError(f"{path or '<config>'}: config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        v.fail(sorted(unknown)[0], "unknown key")

    experiment = v.require(data, "experiment", str)
    if experiment not in EXPERIMENT_KINDS:
        v.fail("experiment", f"must be one of {EXPERIMENT_KINDS}")
    schema = data.get("schema_version", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        v.fail("schema_version", f"unsupported version {schema}, expected {SCHEMA_VERSION}")
    scale = data.get("scale", "reduced")
    if scale not in ("reduced", "paper"):
        v.fail("scale", "must be 'reduced' or 'paper'")
    root_seed = v.require(data, "root_seed", int)

    resolved = {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "scale": scale,
        "root_seed": root_seed,
        "output_dir": data.get("output_dir", f"runs/{experiment}"),
        "workers": data.get("workers", 1),
    }

    train_cfg = dict(_DEFAULT_TRAIN)
    train_cfg.update(v.require(data, "train", dict) if "train" in data else {})
    unknown = set(train_cfg) - set(_DEFAULT_TRAIN)
    if unknown:
        v.fail(f"train.{sorted(unknown)[0]}", "unknown key")
    for key in ("epochs", "num_realizations", "num_shots", "eval_every"):
        if not isinstance(train_cfg[key], int) or train_cfg[key] < 0:
            v.fail(f"train.{key}", "must be a non-negative integer")
    if train_cfg["num_realizations"] < 1:
        v.fail("train.num_realizations", "must be >= 1")
    if train_cfg["epochs"] and train_cfg["epochs"] % train_cfg["eval_every"]:
        v.fail("train.eval_every", "must divide epochs")
    resolved["train"] = train_cfg

    model = dict(data.get("model", {}))
    target = dict(data.get("target", {}))

    if experiment in ("haar_layers", "brickwork_depth", "analog_tau"):
        n = v.require(model, "num_qubits", int, "model")
        if not 2 <= n <= 14:
            v.fail("model.num_qubits", "must be in [2, 14]")
        ancillas = v.int_list(model, "num_ancillas", "model", 0, n - 1)
        layers = v.int_list(model, "num_layers", "model", 1, 64)
        resolved["model"] = {"num_qubits": n, "num_ancillas": ancillas,
                             "num_layers": layers}
        tkind = target.get("kind", "multimodal_1d")
        if tkind != "multimodal_1d":
            v.fail("target.kind", f"{experiment} sweeps use the multimodal_1d target")
        if n - max(ancillas) < 3:
            v.fail("model.num_ancillas", "multimodal_1d needs >= 3 measured qubits")
        resolved["target"] = {"kind": "multimodal_1d",
                              "weight_seed": target.get("weight_seed", DEFAULT_WEIGHT_SEED)}
        scrambler = dict(data.get("scrambler", {}))
        if experiment == "brickwork_depth":
            depths = v.int_list(scrambler, "depths", "scrambler", 1, 64)
            resolved["scrambler"] = {"depths": depths,
                                     "include_haar_reference": bool(
                                         scrambler.get("include_haar_reference", True))}
        elif experiment == "analog_tau":
            taus = v.float_list(scrambler, "taus", "scrambler", 0.0, 1e6)
            hams = scrambler.get("hamiltonians", ["tfim"])
            if not isinstance(hams, list) or not hams or \
                    any(h not in ("tfim", "xx") for h in hams):
                v.fail("scrambler.hamiltonians", "must be a non-empty list of 'tfim'/'xx'")
            resolved["scrambler"] = {"taus": taus, "hamiltonians": hams,
                                     "include_haar_reference": bool(
                                         scrambler.get("include_haar_reference", True))}
        else:
            resolved["scrambler"] = {}

    elif experiment == "trainable_hamiltonian_2d":
        n = v.require(model, "num_qubits", int, "model")
        if not 2 <= n <= 14:
            v.fail("model.num_qubits", "must be in [2, 14]")
        na = v.require(model, "num_ancillas", int, "model")
        if not 0 <= na < n:
            v.fail("model.num_ancillas", "must be in [0, num_qubits)")
        if (n - na) % 2:
            v.fail("model.num_ancillas", "2D targets need an even number of measured qubits")
        layers = v.int_list(model, "num_layers", "model", 1, 64)
        tau = model.get("tau_per_layer", 0.5)
        if not isinstance(tau, (int, float)) or tau <= 0:
            v.fail("model.tau_per_layer", "must be a positive number")
        resolved["model"] = {"num_qubits": n, "num_ancillas": na,
                             "num_layers": layers, "tau_per_layer": float(tau)}
        resolved["target"] = _validate_2d_target(v, target, (n - na) // 2, (n - na) // 2)

    elif experiment == "classical_comparison":
        rbm = dict(_DEFAULT_RBM)
        rbm.update(data.get("rbm", {}))
        unknown = set(rbm) - set(_DEFAULT_RBM)
        if unknown:
            v.fail(f"rbm.{sorted(unknown)[0]}", "unknown key")
        hidden = rbm["hidden_units"]
        if not isinstance(hidden, list):
            hidden = [hidden]
        for h in hidden:
            if not isinstance(h, int) or h < 1:
                v.fail("rbm.hidden_units", "must be positive integers")
        rbm["hidden_units"] = hidden
        if rbm["epochs"] and rbm["epochs"] % rbm["eval_every"]:
            v.fail("rbm.eval_every", "must divide epochs")
        resolved["rbm"] = rbm
        n_x = target.get("n_x", 4)
        n_y = target.get("n_y", 4)
        resolved["target"] = _validate_2d_target(v, target, n_x, n_y)

    else:  # single_run
        n = v.require(model, "num_qubits", int, "model")
        na = model.get("num_ancillas", 0)
        layers = v.require(model, "num_layers", int, "model")
        variant = model.get("variant", "fixed_scrambler")
        if variant not in ("fixed_scrambler", "trainable_hamiltonian"):
            v.fail("model.variant", "unknown variant")
        resolved["model"] = {"num_qubits": n, "num_ancillas": na, "num_layers": layers,
                             "variant": variant,
                             "tau_per_layer": float(model.get("tau_per_layer", 0.5))}
        if variant == "fixed_scrambler":
            scrambler = dict(data.get("scrambler", {}))
            kind = scrambler.get("kind", "haar")
            if kind not in ("haar", "brickwork", "analog", "identity"):
                v.fail("scrambler.kind", "unknown scrambler kind")
            resolved["scrambler"] = {"kind": kind}
            if kind == "brickwork":
                resolved["scrambler"]["depth"] = v.require(scrambler, "depth", int, "scrambler")
            if kind == "analog":
                resolved["scrambler"]["hamiltonian"] = v.require(
                    scrambler, "hamiltonian", str, "scrambler")
                resolved["scrambler"]["tau"] = float(v.require(
                    scrambler, "tau", (int, float), "scrambler"))
        else:
            resolved["scrambler"] = {}
        tkind = target.get("kind", "multimodal_1d")
        if tkind == "multimodal_1d":
            resolved["target"] = {"kind": tkind,
                                  "weight_seed": target.get("weight_seed", DEFAULT_WEIGHT_SEED)}
        else:
            measured = n - na
            resolved["target"] = _validate_2d_target(v, target, measured // 2, measured // 2)

    return resolved


def _validate_2d_target(v: _Validator, target: dict, n_x: int, n_y: int) -> dict:
    kind = target.get("kind", "four_mode_2d")
    if kind == "four_mode_2d":
        return {"kind": kind, "n_x": n_x, "n_y": n_y,
                "sigma": float(target.get("sigma", 0.5))}
    if kind == "bivariate_2d":
        rhos = v.float_list(target, "rhos", "target", -0.999, 0.999)
        return {"kind": kind, "n_x": n_x, "n_y": n_y, "rhos": rhos}
    v.fail("target.kind", f"unknown 2D target kind {kind!r}")


# ---------------------------------------------------------------------------
# sweep expansion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    index: int
    scrambler_type: str          # haar|brickwork|analog|identity|trainable_hamiltonian|rbm
    hamiltonian_preset: str      # ""|tfim|xx, or RBM geometry label h<NH>
    num_qubits: int
    num_ancillas: int | None
    num_layers: int | None
    depth: int | None
    tau: float | None
    rho: float | None

    @property
    def key(self) -> str:
        parts = [f"scr={self.scrambler_type}"]
        if self.hamiltonian_preset:
            parts.append(f"ham={self.hamiltonian_preset}")
        parts.append(f"N={self.num_qubits}")
        if self.num_ancillas is not None:
            parts.append(f"NA={self.num_ancillas}")
        if self.num_layers is not None:
            parts.append(f"L={self.num_layers}")
        if self.depth is not None:
            parts.append(f"K={self.depth}")
        if self.tau is not None:
            parts.append(f"tau={self.tau!r}")
        if self.rho is not None:
            parts.append(f"rho={self.rho!r}")
        return ";".join(parts)


def expand_points(config: dict) -> list[SweepPoint]:
    """Deterministic sweep-point list of a resolved config."""
    kind = config["experiment"]
    points = []

    def add(**kw):
        points.append(SweepPoint(index=len(points), **kw))

    if kind == "haar_layers":
        m = config["model"]
        for na in m["num_ancillas"]:
            for layers in m["num_layers"]:
                add(scrambler_type="haar", hamiltonian_preset="",
                    num_qubits=m["num_qubits"], num_ancillas=na, num_layers=layers,
                    depth=None, tau=None, rho=None)
    elif kind == "brickwork_depth":
        m = config["model"]
        for na in m["num_ancillas"]:
            for layers in m["num_layers"]:
                for depth in config["scrambler"]["depths"]:
                    add(scrambler_type="brickwork", hamiltonian_preset="",
                        num_qubits=m["num_qubits"], num_ancillas=na,
                        num_layers=layers, depth=depth, tau=None, rho=None)
                if config["scrambler"]["include_haar_reference"]:
                    add(scrambler_type="haar", hamiltonian_preset="",
                        num_qubits=m["num_qubits"], num_ancillas=na,
                        num_layers=layers, depth=None, tau=None, rho=None)
    elif kind == "analog_tau":
        m = config["model"]
        for na in m["num_ancillas"]:
            for layers in m["num_layers"]:
                for ham in config["scrambler"]["hamiltonians"]:
                    for tau in config["scrambler"]["taus"]:
                        add(scrambler_type="analog", hamiltonian_preset=ham,
                            num_qubits=m["num_qubits"], num_ancillas=na,
                            num_layers=layers, depth=None, tau=tau, rho=None)
                if config["scrambler"]["include_haar_reference"]:
                    add(scrambler_type="haar", hamiltonian_preset="",
                        num_qubits=m["num_qubits"], num_ancillas=na,
                        num_layers=layers, depth=None, tau=None, rho=None)
    elif kind == "trainable_hamiltonian_2d":
        m = config["model"]
        rhos = config["target"].get("rhos", [None])
        for layers in m["num_layers"]:
            for rho in rhos:
                add(scrambler_type="trainable_hamiltonian", hamiltonian_preset="",
                    num_qubits=m["num_qubits"], num_ancillas=m["num_ancillas"],
                    num_layers=layers, depth=None, tau=m["tau_per_layer"], rho=rho)
    elif kind == "classical_comparison":
        tgt = config["target"]
        n_bits = tgt["n_x"] + tgt["n_y"]
        rhos = tgt.get("rhos", [None])
        for hidden in config["rbm"]["hidden_units"]:
            for rho in rhos:
                add(scrambler_type="rbm", hamiltonian_preset=f"h{hidden}",
                    num_qubits=n_bits, num_ancillas=None, num_layers=None,
                    depth=None, tau=None, rho=rho)
    else:  # single_run
        m = config["model"]
        scr = config.get("scrambler", {})
        if m["variant"] == "trainable_hamiltonian":
            stype, preset, depth, tau = "trainable_hamiltonian", "", None, m["tau_per_layer"]
        else:
            stype = scr["kind"]
            preset = scr.get("hamiltonian", "")
            depth = scr.get("depth")
            tau = scr.get("tau")
        rho = None
        if config["target"].get("kind") == "bivariate_2d":
            rho = config["target"]["rhos"][0]
        add(scrambler_type=stype, hamiltonian_preset=preset,
            num_qubits=m["num_qubits"], num_ancillas=m["num_ancillas"],
            num_layers=m["num_layers"], depth=depth, tau=tau, rho=rho)
    return points


def build_target(config: dict, point: SweepPoint) -> TargetDistribution:
    tgt = config["target"]
    if tgt["kind"] == "multimodal_1d":
        n = point.num_qubits - point.num_ancillas
        return multimodal_1d(n, weight_seed=tgt["weight_seed"])
    if tgt["kind"] == "four_mode_2d":
        return four_mode_mixture_2d(tgt["n_x"], tgt["n_y"], sigma=tgt["sigma"])
    return bivariate_gaussian_2d(tgt["n_x"], tgt["n_y"], rho=point.rho)


def _realization_stream(root_seed: int, point: SweepPoint, r: int) -> RandomStream:
    return RandomStream(root_seed).child(f"point/{point.key}/realization/{r}")


# ---------------------------------------------------------------------------
# job execution
# ---------------------------------------------------------------------------

def _run_job(payload: tuple[dict, int, int]):
    """Run one (sweep point, realization) job; returns its result rows."""
    config, point_index, r = payload
    with threadpool_limits(limits=1):
        point = expand_points(config)[point_index]
        rng = _realization_stream(config["root_seed"], point, r)
        target = build_target(config, point)
        if point.scrambler_type == "rbm":
            rbm_cfg = RbmTrainConfig(
                epochs=config["rbm"]["epochs"], minibatch=config["rbm"]["minibatch"],
                learning_rate=config["rbm"]["learning_rate"],
                eval_every=config["rbm"]["eval_every"],
                num_hidden=int(point.hamiltonian_preset[1:]),
                init_scale=config["rbm"]["init_scale"])
            record = train_rbm(target, rbm_cfg, rng)
        else:
            tc = config["train"]
            train_cfg = TrainConfig(
                epochs=tc["epochs"], num_realizations=1, num_shots=tc["num_shots"],
                learning_rate=tc["learning_rate"], clip_norm=tc["clip_norm"],
                eval_every=tc["eval_every"], root_seed=config["root_seed"],
                smoothing_alpha=tc["smoothing_alpha"])
            if point.scrambler_type == "trainable_hamiltonian":
                model = ModelSpec(point.num_qubits, point.num_ancillas,
                                  point.num_layers, variant="trainable_hamiltonian",
                                  tau=point.tau)
                scrambler = None
            else:
                model = ModelSpec(point.num_qubits, point.num_ancillas, point.num_layers)
                spec = _scrambler_spec(point)
                scrambler = compile_scrambler(spec, point.num_qubits,
                                              rng.child("scrambler"))
            record = train(model, scrambler, target, train_cfg, rng)
    return point_index, r, _record_rows(point, record, rng.seed), record.wall_seconds, \
        np.asarray(record.final_distribution)


def _scrambler_spec(point: SweepPoint) -> ScramblerSpec:
    if point.scrambler_type == "haar":
        return ScramblerSpec("haar")
    if point.scrambler_type == "identity":
        return ScramblerSpec("identity")
    if point.scrambler_type == "brickwork":
        return ScramblerSpec("brickwork", depth=point.depth)
    return ScramblerSpec("analog",
                         hamiltonian=hamiltonian_preset(point.hamiltonian_preset,
                                                        point.num_qubits),
                         tau=point.tau)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _record_rows(point: SweepPoint, record: TrainingRecord | RbmRecord,
                 seed: int) -> list[list[str]]:
    rows = []
    is_rbm = isinstance(record, RbmRecord)
    for i, epoch in enumerate(record.epochs):
        rows.append([
            "",  # experiment_id filled by the writer
            point.scrambler_type,
            point.hamiltonian_preset,
            _fmt(point.num_qubits),
            _fmt(point.num_ancillas),
            _fmt(point.num_layers),
            _fmt(point.depth),
            _fmt(point.tau),
            _fmt(point.rho),
            _fmt(seed),
            _fmt(int(epoch)),
            _fmt(float(record.nll[i])),
            _fmt(float(record.kld_exact[i])),
            "" if is_rbm else _fmt(float(record.kld_empirical[i])),
            "" if is_rbm else _fmt(float(record.half_chain_entropy[i])),
            "",  # wall_seconds: kept out of the CSV for byte-reproducibility
        ])
    return rows


# ---------------------------------------------------------------------------
# run / resume / write
# ---------------------------------------------------------------------------

def _experiment_id(config: dict) -> str:
    import hashlib
    # output_dir and workers are execution details, not science: the id (and
    # with it the CSV bytes) must not depend on where or how wide a run went
    canon = json.dumps({k: v for k, v in config.items()
                        if k not in ("output_dir", "workers")},
                       sort_keys=True, separators=(",", ":"))
    return f"{config['experiment']}-{hashlib.sha256(canon.encode()).hexdigest()[:8]}"


def _expected_epochs(config: dict, point: SweepPoint) -> list[int]:
    if point.scrambler_type == "rbm":
        epochs, every = config["rbm"]["epochs"], config["rbm"]["eval_every"]
    else:
        epochs, every = config["train"]["epochs"], config["train"]["eval_every"]
    return [0] + list(range(every, epochs + 1, every))


def _job_identity(point: SweepPoint, seed: int) -> tuple:
    return (point.scrambler_type, point.hamiltonian_preset, _fmt(point.num_qubits),
            _fmt(point.num_ancillas), _fmt(point.num_layers), _fmt(point.depth),
            _fmt(point.tau), _fmt(point.rho), _fmt(seed))


def _read_existing(results_path: Path) -> dict[tuple, dict[int, list[str]]]:
    """Existing rows grouped by job identity, keyed by epoch."""
    groups: dict[tuple, dict[int, list[str]]] = {}
    with results_path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RESULT_COLUMNS:
            raise ConfigError(f"{results_path}: unexpected results schema {header}")
        for row in reader:
            identity = tuple(row[1:10])
            groups.setdefault(identity, {})[int(row[10])] = row
    return groups


def run(config: dict | str | Path, out_dir: str | Path | None = None,
        workers: int | None = None, resume: bool = False, dry_run: bool = False,
        log=print) -> Path:
    """Execute a config; returns the output directory.

    ``config`` may be a path or an already-resolved mapping. Honors the
    QSBM_SEED environment variable as a root-seed override.
    """
    if not isinstance(config, dict):
        config = load_config(config)
    config = validate_config(dict(config))
    seed_origin = "config"
    if os.environ.get("QSBM_SEED"):
        config["root_seed"] = int(os.environ["QSBM_SEED"])
        seed_origin = "env QSBM_SEED"
    if workers is not None:
        config["workers"] = workers
    out = Path(out_dir) if out_dir is not None else Path(config["output_dir"])
    config["output_dir"] = str(out)

    points = expand_points(config)
    num_real = config["train"]["num_realizations"]
    jobs = [(p, r) for p in points for r in range(num_real)]
    seeds = {(p.index, r): _realization_stream(config["root_seed"], p, r).seed
             for p, r in jobs}

    if config["scale"] == "paper":
        log("warning: paper-scale preset; expect multi-hour runtimes", file=sys.stderr)

    if dry_run:
        log(f"experiment {config['experiment']} "
            f"({len(points)} sweep points x {num_real} realizations)")
        for p in points:
            log(f"  [{p.index:3d}] {p.key}")
        return out

    results_path = out / "results.csv"
    existing: dict[tuple, dict[int, list[str]]] = {}
    if results_path.exists():
        if not resume:
            raise ConfigError(
                f"{results_path} already exists; pass --resume to fill in missing "
                "(point, seed) pairs or choose a fresh output directory")
        existing = _read_existing(results_path)

    exp_id = _experiment_id(config)
    todo = []
    kept_rows: list[list[str]] = []
    for p, r in jobs:
        identity = _job_identity(p, seeds[(p.index, r)])
        have = existing.get(identity, {})
        expected = _expected_epochs(config, p)
        if set(expected).issubset(have):
            kept_rows.extend(have[e] for e in expected)
        else:
            todo.append((p.index, r))

    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    timings: dict[str, dict[str, float]] = {}
    new_rows: list[list[str]] = []
    distributions: dict[tuple[int, int], np.ndarray] = {}

    log(f"{config['experiment']}: {len(points)} points x {num_real} realizations; "
        f"{len(todo)} jobs to run, {len(jobs) - len(todo)} reused", file=sys.stderr)

    def consume(result):
        point_index, r, rows, wall, dist = result
        new_rows.extend(rows)
        point = points[point_index]
        timings.setdefault(point.key, {})[str(r)] = round(wall, 3)
        distributions[(point_index, r)] = dist
        done = sum(len(v) for v in timings.values())
        log(f"  [{done}/{len(todo)}] {point.key} r={r} ({wall:.1f}s)", file=sys.stderr)

    n_workers = max(1, int(config["workers"]))
    payloads = [(config, pi, r) for pi, r in todo]
    if n_workers == 1 or len(payloads) <= 1:
        with threadpool_limits(limits=1):
            for payload in payloads:
                consume(_run_job(payload))
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for result in pool.map(_run_job, payloads, chunksize=1):
                consume(result)

    # canonical row order: point index, realization seed order, epoch
    all_rows = kept_rows + new_rows
    order: dict[tuple, tuple] = {}
    for p, r in jobs:
        order[_job_identity(p, seeds[(p.index, r)])] = (p.index, r)
    all_rows.sort(key=lambda row: order[tuple(row[1:10])] + (int(row[10]),))
    for row in all_rows:
        row[0] = exp_id

    _write_csv(results_path, RESULT_COLUMNS, all_rows)
    summarize(out, log=lambda *a, **k: None)
    _write_distributions(out, config, points, seeds, num_real, distributions, exp_id)

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "package_version": _package_version,
        "experiment_id": exp_id,
        "config": config,
        "seed_origin": seed_origin,
        "realization_seeds": {p.key: [seeds[(p.index, r)] for r in range(num_real)]
                              for p in points},
        "stamps": design_stamps(config),
        "volatile": {
            "started_at": started,
            "finished_at": datetime.now(timezone.utc).isoformat(),
            "total_wall_seconds": round(time.perf_counter() - t0, 3),
            "workers": n_workers,
            "job_wall_seconds": timings,
        },
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    log(f"wrote {results_path}", file=sys.stderr)
    return out


def design_stamps(config: dict) -> dict:
    """Every numerical convention that shapes the output files."""
    stamps = {
        "q_floor": Q_FLOOR,
        "smoothing_alpha": config.get("train", {}).get("smoothing_alpha", 0.5),
        "target_weight_seed": config.get("target", {}).get("weight_seed"),
        "kld_direction": "D(target || model); empirical uses the smoothed shot histogram",
        "rotation_convention": "R_a(theta) = exp(-i theta sigma_a / 2)",
        "ancilla_placement": "highest-index qubits",
        "brickwork_pairing": "layer 1 pairs (0,1),(2,3),...; parities alternate per layer",
        "parameter_init": "angles/fields uniform(-pi, pi); J_xx starts at 1.0",
        "adam": {"beta1": 0.9, "beta2": 0.999, "epsilon": 1e-8,
                 "clipping": "global gradient norm, before the moment updates"},
        "entropy_units": "nats",
        "summary_statistics": "mean and sample std (ddof=1; 0 for a single seed)",
        "wall_seconds_column": "left empty in results.csv; see volatile.job_wall_seconds",
    }
    if "rbm" in config:
        n_v = config["target"]["n_x"] + config["target"]["n_y"]
        stamps["rbm_parameter_counts"] = {
            f"h{h}": n_v * h + n_v + h for h in config["rbm"]["hidden_units"]}
        stamps["rbm_init"] = (f"W ~ N(0, {config['rbm']['init_scale']}^2), "
                              "zero biases")
    return stamps


def _write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())


def _write_distributions(out: Path, config: dict, points: list[SweepPoint],
                         seeds: dict, num_real: int,
                         distributions: dict[tuple[int, int], np.ndarray],
                         exp_id: str) -> None:
    """Per-seed final learned distribution vs target, for 2D experiments.

    One row per (sweep point, realization, bin); realizations completed in a
    previous run are carried over from the existing file, so resume keeps the
    file complete and byte-stable.
    """
    if config["target"].get("kind") not in ("four_mode_2d", "bivariate_2d"):
        return
    path = out / "distributions.csv"
    existing: dict[tuple[str, str], list[list[str]]] = {}
    if path.exists():
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            next(reader, None)
            for row in reader:
                existing.setdefault((row[1], row[3]), []).append(row)  # (point_key, seed)
    n_x = config["target"]["n_x"]
    rows = []
    for p in points:
        target = build_target(config, p)
        grid = target.grid
        xc, yc = grid.x_centers(), grid.y_centers()
        for r in range(num_real):
            seed = _fmt(seeds[(p.index, r)])
            dist = distributions.get((p.index, r))
            if dist is None:
                block = existing.get((p.key, seed))
                if block and len(block) == target.num_bins:
                    rows.extend(sorted(block, key=lambda row: int(row[4])))
                continue
            for b in range(target.num_bins):
                ix, iy = b & ((1 << n_x) - 1), b >> n_x
                rows.append([exp_id, p.key, p.scrambler_type, seed, str(b),
                             str(ix), str(iy), _fmt(float(xc[ix])), _fmt(float(yc[iy])),
                             _fmt(float(target.probs[b])), _fmt(float(dist[b]))])
    _write_csv(path, DISTRIBUTION_COLUMNS, rows)


# ---------------------------------------------------------------------------
# summarize
# ---------------------------------------------------------------------------

def _sort_key(row: dict) -> tuple:
    def num(s, default=-1.0):
        return float(s) if s not in ("", None) else default
    return (row["scrambler_type"], row["hamiltonian_preset"], num(row["N"]),
            num(row["N_A"]), num(row["L"]), num(row["K"]), num(row["tau"]),
            num(row["rho"], -10.0))


def summarize(results_dir: str | Path, log=print) -> Path:
    """Aggregate results.csv into per-sweep-point summary.csv."""
    results_dir = Path(results_dir)
    results_path = results_dir / "results.csv"
    if not results_path.exists():
        raise ConfigError(f"{results_path}: no results.csv to summarize")
    with results_path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_COLUMNS:
            raise ConfigError(
                f"{results_path}: schema mismatch: {reader.fieldnames} != {RESULT_COLUMNS}")
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{results_path}: empty results file")

    points: dict[tuple, dict] = {}
    for row in rows:
        pkey = (row["scrambler_type"], row["hamiltonian_preset"], row["N"],
                row["N_A"], row["L"], row["K"], row["tau"], row["rho"])
        entry = points.setdefault(pkey, {"rows": {}, "meta": row})
        entry["rows"].setdefault(row["seed"], []).append(row)

    out_rows = []
    for pkey, entry in points.items():
        finals, best, emp, nlls, ents = [], [], [], [], []
        final_epoch = 0
        for seed_rows in entry["rows"].values():
            seed_rows.sort(key=lambda r: int(r["epoch"]))
            last = seed_rows[-1]
            final_epoch = int(last["epoch"])
            finals.append(float(last["kld_exact"]))
            best.append(min(float(r["kld_exact"]) for r in seed_rows))
            nlls.append(float(last["nll"]))
            if last["kld_empirical"]:
                emp.append(float(last["kld_empirical"]))
            if last["half_chain_entropy"]:
                ents.append(float(last["half_chain_entropy"]))
        n_seeds = len(finals)

        def std(vals):
            return float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0

        meta = entry["meta"]
        out_rows.append({
            "experiment_id": meta["experiment_id"],
            "scrambler_type": pkey[0], "hamiltonian_preset": pkey[1],
            "N": pkey[2], "N_A": pkey[3], "L": pkey[4], "K": pkey[5],
            "tau": pkey[6], "rho": pkey[7],
            "num_seeds": str(n_seeds), "final_epoch": str(final_epoch),
            "kld_exact_mean": _fmt(float(np.mean(finals))),
            "kld_exact_std": _fmt(std(finals)),
            "kld_empirical_mean": _fmt(float(np.mean(emp))) if emp else "",
            "kld_empirical_std": _fmt(std(emp)) if emp else "",
            "best_kld_exact_mean": _fmt(float(np.mean(best))),
            "nll_mean": _fmt(float(np.mean(nlls))),
            "half_chain_entropy_mean": _fmt(float(np.mean(ents))) if ents else "",
        })
    out_rows.sort(key=_sort_key)

    out_path = results_dir / "summary.csv"
    _write_csv(out_path, SUMMARY_COLUMNS,
               [[r[c] for c in SUMMARY_COLUMNS] for r in out_rows])
    log(f"wrote {out_path}")
    return out_path
