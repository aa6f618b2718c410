"""Figure renderers for qsbm run directories.

Each renderer writes the requested PNG plus a ``<out>.data.csv`` sidecar
holding exactly the plotted numbers, so a figure can be audited or re-plotted
without touching the image.

Figure kinds:

* ``fig2``  converged KLD vs layers, one line per ancilla count (log y).
* ``fig3``  converged KLD vs layers, one line per brickwork depth, panel per
  ancilla count, Haar reference dashed.
* ``fig4``  converged KLD vs evolution time, one line per layer count, panel
  grid hamiltonian x ancilla count, Haar reference dashed.
* ``fig5``  2D target vs learned heatmaps with conditional slices p(y|x).
* ``fig7``  training curves (KLD vs epoch, log-log), one line per model
  family, from one or more run directories.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, check_manifest, read_rows, write_sidecar

FIGURE_KINDS = ("fig2", "fig3", "fig4", "fig5", "fig7")

SUMMARY_COLUMNS = ["scrambler_type", "hamiltonian_preset", "N_A", "L", "K", "tau",
                   "kld_exact_mean", "kld_exact_std",
                   "kld_empirical_mean", "kld_empirical_std"]


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    input_dirs: tuple[Path, ...]
    output_path: Path
    metric: str = "empirical"  # reported (shot-based) KLD by default
    point_key: str | None = None  # fig5: which sweep point (default: first)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"choose from {FIGURE_KINDS}")
        if self.metric not in ("empirical", "exact"):
            raise ValueError("metric must be 'empirical' or 'exact'")
        if not self.input_dirs:
            raise ValueError("at least one input directory is required")


def render(spec: FigureSpec) -> Path:
    """Render one figure; returns the output path."""
    for d in spec.input_dirs:
        check_manifest(d)
    renderer = {
        "fig2": _render_fig2,
        "fig3": _render_fig3,
        "fig4": _render_fig4,
        "fig5": _render_fig5,
        "fig7": _render_fig7,
    }[spec.kind]
    fig, sidecar = renderer(spec)
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=150)
    plt.close(fig)
    write_sidecar(out.with_suffix(out.suffix + ".data.csv"), sidecar)
    return out


def _metric_columns(metric: str) -> tuple[str, str]:
    if metric == "exact":
        return "kld_exact_mean", "kld_exact_std"
    return "kld_empirical_mean", "kld_empirical_std"


def _num(row, key, default=None):
    return float(row[key]) if row[key] not in ("", None) else default


def _render_fig2(spec: FigureSpec):
    rows = read_rows(spec.input_dirs[0], "summary.csv", SUMMARY_COLUMNS)
    mean_col, std_col = _metric_columns(spec.metric)
    series = defaultdict(list)
    for r in rows:
        if r["scrambler_type"] != "haar":
            continue
        series[int(r["N_A"])].append((int(r["L"]), _num(r, mean_col),
                                      _num(r, std_col)))
    if not series:
        raise SchemaError("no haar rows in summary.csv")
    fig, ax = plt.subplots(figsize=(5.5, 4))
    sidecar = []
    for na in sorted(series):
        pts = sorted(series[na])
        xs, ys, es = zip(*pts)
        ax.plot(xs, ys, "o-", label=f"$N_A={na}$")
        ax.fill_between(xs, np.array(ys) - es, np.array(ys) + es, alpha=0.25)
        for x, y, e in pts:
            sidecar.append({"figure": "fig2", "panel": "main",
                            "series": f"NA={na}", "x": x, "y": repr(y),
                            "y_err": repr(e)})
    ax.set_yscale("log")
    ax.set_xlabel("layers $L$")
    ax.set_ylabel(f"converged KLD ({spec.metric})")
    ax.set_title("Haar scrambler: KLD vs circuit depth")
    ax.legend()
    fig.tight_layout()
    return fig, sidecar


def _render_fig3(spec: FigureSpec):
    rows = read_rows(spec.input_dirs[0], "summary.csv", SUMMARY_COLUMNS)
    mean_col, std_col = _metric_columns(spec.metric)
    ancillas = sorted({int(r["N_A"]) for r in rows if r["N_A"] != ""})
    fig, axes = plt.subplots(1, len(ancillas), figsize=(4.5 * len(ancillas), 4),
                             squeeze=False, sharey=True)
    sidecar = []
    plotted = False
    for ax, na in zip(axes[0], ancillas):
        depth_series = defaultdict(list)
        haar_pts = []
        for r in rows:
            if r["N_A"] != str(na):
                continue
            if r["scrambler_type"] == "brickwork":
                depth_series[int(r["K"])].append((int(r["L"]), _num(r, mean_col),
                                                  _num(r, std_col)))
            elif r["scrambler_type"] == "haar":
                haar_pts.append((int(r["L"]), _num(r, mean_col)))
        for depth in sorted(depth_series):
            pts = sorted(depth_series[depth])
            xs, ys, es = zip(*pts)
            ax.plot(xs, ys, "o-", label=f"$K={depth}$")
            ax.fill_between(xs, np.array(ys) - es, np.array(ys) + es, alpha=0.2)
            plotted = True
            for x, y, e in pts:
                sidecar.append({"figure": "fig3", "panel": f"NA={na}",
                                "series": f"K={depth}", "x": x, "y": repr(y),
                                "y_err": repr(e)})
        if haar_pts:
            xs, ys = zip(*sorted(haar_pts))
            ax.plot(xs, ys, "r--", label="Haar")
            for x, y in sorted(haar_pts):
                sidecar.append({"figure": "fig3", "panel": f"NA={na}",
                                "series": "haar", "x": x, "y": repr(y), "y_err": ""})
        ax.set_yscale("log")
        ax.set_xlabel("layers $L$")
        ax.set_title(f"$N_A={na}$")
        ax.legend(fontsize=8)
    if not plotted:
        raise SchemaError("no brickwork rows in summary.csv")
    axes[0][0].set_ylabel(f"converged KLD ({spec.metric})")
    fig.suptitle("Brickwork scrambler depth")
    fig.tight_layout()
    return fig, sidecar


def _render_fig4(spec: FigureSpec):
    rows = read_rows(spec.input_dirs[0], "summary.csv", SUMMARY_COLUMNS)
    mean_col, std_col = _metric_columns(spec.metric)
    hams = sorted({r["hamiltonian_preset"] for r in rows
                   if r["scrambler_type"] == "analog"})
    if not hams:
        raise SchemaError("no analog rows in summary.csv")
    ancillas = sorted({int(r["N_A"]) for r in rows if r["N_A"] != ""})
    fig, axes = plt.subplots(len(hams), len(ancillas),
                             figsize=(4.5 * len(ancillas), 3.6 * len(hams)),
                             squeeze=False, sharey=True)
    sidecar = []
    for i, ham in enumerate(hams):
        for j, na in enumerate(ancillas):
            ax = axes[i][j]
            layer_series = defaultdict(list)
            haar_level = None
            for r in rows:
                if r["N_A"] != str(na):
                    continue
                if r["scrambler_type"] == "analog" and r["hamiltonian_preset"] == ham:
                    layer_series[int(r["L"])].append(
                        (float(r["tau"]), _num(r, mean_col), _num(r, std_col)))
                elif r["scrambler_type"] == "haar":
                    haar_level = (int(r["L"]), _num(r, mean_col))
            for layers in sorted(layer_series):
                pts = sorted(layer_series[layers])
                xs, ys, es = zip(*pts)
                ax.plot(xs, ys, "o-", label=f"$L={layers}$")
                ax.fill_between(xs, np.array(ys) - es, np.array(ys) + es, alpha=0.2)
                for x, y, e in pts:
                    sidecar.append({"figure": "fig4", "panel": f"{ham},NA={na}",
                                    "series": f"L={layers}", "x": repr(x),
                                    "y": repr(y), "y_err": repr(e)})
            if haar_level is not None:
                ax.axhline(haar_level[1], color="r", linestyle="--", label="Haar")
                sidecar.append({"figure": "fig4", "panel": f"{ham},NA={na}",
                                "series": "haar", "x": "", "y": repr(haar_level[1]),
                                "y_err": ""})
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_title(f"{ham}, $N_A={na}$")
            ax.set_xlabel(r"evolution time $\tau$")
            ax.legend(fontsize=8)
        axes[i][0].set_ylabel(f"converged KLD ({spec.metric})")
    fig.suptitle("Analog scrambler evolution time")
    fig.tight_layout()
    return fig, sidecar


def _select_point(rows, point_key):
    keys = sorted({r["point_key"] for r in rows})
    if point_key is None:
        return keys[0]
    if point_key not in keys:
        raise SchemaError(f"point_key {point_key!r} not found; available: {keys}")
    return point_key


def _render_fig5(spec: FigureSpec):
    columns = ["point_key", "seed", "bin", "ix", "iy", "x_center", "y_center",
               "target_prob", "learned_prob"]
    rows = read_rows(spec.input_dirs[0], "distributions.csv", columns)
    key = _select_point(rows, spec.point_key)
    rows = [r for r in rows if r["point_key"] == key]
    nx = max(int(r["ix"]) for r in rows) + 1
    ny = max(int(r["iy"]) for r in rows) + 1
    target = np.zeros((ny, nx))
    learned_by_bin = defaultdict(list)
    xc = np.zeros(nx)
    yc = np.zeros(ny)
    for r in rows:
        ix, iy = int(r["ix"]), int(r["iy"])
        target[iy, ix] = float(r["target_prob"])
        learned_by_bin[(iy, ix)].append(float(r["learned_prob"]))
        xc[ix] = float(r["x_center"])
        yc[iy] = float(r["y_center"])
    learned = np.zeros((ny, nx))
    for (iy, ix), vals in learned_by_bin.items():
        learned[iy, ix] = np.mean(vals)

    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    extent = [xc[0], xc[-1], yc[0], yc[-1]]
    vmax = max(target.max(), learned.max())
    axes[0].imshow(target, origin="lower", extent=extent, vmin=0, vmax=vmax)
    axes[0].set_title("target $p(x,y)$")
    axes[1].imshow(learned, origin="lower", extent=extent, vmin=0, vmax=vmax)
    axes[1].set_title("learned $q(x,y)$ (mean over seeds)")
    for ax in axes[:2]:
        ax.set_xlabel("x")
        ax.set_ylabel("y")

    sidecar = []
    for iy in range(ny):
        for ix in range(nx):
            sidecar.append({"figure": "fig5", "panel": "target",
                            "series": key, "x": f"{ix};{iy}",
                            "y": repr(target[iy, ix]), "y_err": ""})
            sidecar.append({"figure": "fig5", "panel": "learned",
                            "series": key, "x": f"{ix};{iy}",
                            "y": repr(learned[iy, ix]), "y_err": ""})

    # conditional slices p(y|x) at three x cuts through the distribution
    cuts = [nx // 4, nx // 2, (3 * nx) // 4]
    for ix in cuts:
        t_slice = target[:, ix] / max(target[:, ix].sum(), 1e-30)
        l_slice = learned[:, ix] / max(learned[:, ix].sum(), 1e-30)
        axes[2].plot(yc, t_slice, "k-", alpha=0.8)
        axes[2].plot(yc, l_slice, "r--", alpha=0.8)
        for axq in (0, 1):
            axes[axq].axvline(xc[ix], color="w", linestyle=":", linewidth=0.8)
        for iy in range(ny):
            sidecar.append({"figure": "fig5", "panel": f"slice_x={xc[ix]!r}",
                            "series": "target", "x": repr(yc[iy]),
                            "y": repr(t_slice[iy]), "y_err": ""})
            sidecar.append({"figure": "fig5", "panel": f"slice_x={xc[ix]!r}",
                            "series": "learned", "x": repr(yc[iy]),
                            "y": repr(l_slice[iy]), "y_err": ""})
    axes[2].set_title("conditional slices $p(y|x)$ (target black, learned red)")
    axes[2].set_xlabel("y")
    fig.tight_layout()
    return fig, sidecar


def _render_fig7(spec: FigureSpec):
    columns = ["scrambler_type", "hamiltonian_preset", "seed", "epoch", "kld_exact"]
    fig, ax = plt.subplots(figsize=(6, 4.5))
    sidecar = []
    plotted = False
    for run_dir in spec.input_dirs:
        rows = read_rows(run_dir, "results.csv", columns)
        families = defaultdict(lambda: defaultdict(list))
        for r in rows:
            label = r["scrambler_type"]
            if label == "rbm":
                label = f"rbm_{r['hamiltonian_preset']}"
            families[label][int(r["epoch"])].append(float(r["kld_exact"]))
        for label in sorted(families):
            epochs = sorted(e for e in families[label] if e > 0)
            means = np.array([np.mean(families[label][e]) for e in epochs])
            stds = np.array([np.std(families[label][e], ddof=1)
                             if len(families[label][e]) > 1 else 0.0
                             for e in epochs])
            ax.plot(epochs, means, label=label)
            ax.fill_between(epochs, np.maximum(means - stds, 1e-12), means + stds,
                            alpha=0.2)
            plotted = True
            for e, m, s in zip(epochs, means, stds):
                sidecar.append({"figure": "fig7", "panel": "main", "series": label,
                                "x": e, "y": repr(float(m)), "y_err": repr(float(s))})
    if not plotted:
        raise SchemaError("no training-curve rows found")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("training epoch")
    ax.set_ylabel("exact KLD")
    ax.set_title("training curves (mean $\\pm 1\\sigma$ over seeds)")
    ax.legend()
    fig.tight_layout()
    return fig, sidecar
