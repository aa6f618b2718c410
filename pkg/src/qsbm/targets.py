"""Classical target distributions over computational-basis bins.

1D targets live on integer bins 0..2^n-1. 2D targets discretize
[-3,3] x [-3,3] onto a 2^{n_x} x 2^{n_y} grid of bin centers; the joint bin
index packs the x register into the low n_x bits and the y register above.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import RandomStream

__all__ = [
    "Grid1D",
    "Grid2D",
    "TargetDistribution",
    "multimodal_1d",
    "bivariate_gaussian_2d",
    "four_mode_mixture_2d",
    "joint_bin_index",
    "split_bin_index",
    "find_modes_2d",
]

DEFAULT_WEIGHT_SEED = 42


@dataclass(frozen=True)
class Grid1D:
    num_bits: int  # bins are the integers 0 .. 2**num_bits - 1


@dataclass(frozen=True)
class Grid2D:
    n_x: int
    n_y: int
    low: float = -3.0
    high: float = 3.0

    def x_centers(self) -> np.ndarray:
        return _centers(self.low, self.high, 1 << self.n_x)

    def y_centers(self) -> np.ndarray:
        return _centers(self.low, self.high, 1 << self.n_y)


def _centers(low: float, high: float, bins: int) -> np.ndarray:
    width = (high - low) / bins
    return low + (np.arange(bins) + 0.5) * width


@dataclass(frozen=True)
class TargetDistribution:
    probs: np.ndarray
    grid: Grid1D | Grid2D
    provenance: dict = field(default_factory=dict)

    @property
    def num_bins(self) -> int:
        return len(self.probs)

    def as_2d(self) -> np.ndarray:
        """Probabilities reshaped to (2^n_y, 2^n_x); requires a 2D grid."""
        if not isinstance(self.grid, Grid2D):
            raise ValueError("not a 2D target")
        return self.probs.reshape(1 << self.grid.n_y, 1 << self.grid.n_x)


def joint_bin_index(ix: int, iy: int, n_x: int) -> int:
    return (iy << n_x) | ix


def split_bin_index(bin_index: int, n_x: int) -> tuple[int, int]:
    return bin_index & ((1 << n_x) - 1), bin_index >> n_x


def multimodal_1d(n: int, weight_seed: int = DEFAULT_WEIGHT_SEED,
                  weights: np.ndarray | None = None) -> TargetDistribution:
    """Five Gaussian peaks on 2^n integer bins.

    Peak centers sit at (j - 0.5) * 2^n / 5 for j = 1..5 with common width
    2^n / 20; peak weights are drawn from U(0.5, 1.5) with the given seed
    (or passed explicitly, e.g. all-ones for the symmetric variant).
    """
    if n < 3:
        raise ValueError(f"need n >= 3 bins qubits, got {n}")
    bins = 1 << n
    if weights is None:
        weights = RandomStream(weight_seed).generator.uniform(0.5, 1.5, size=5)
    weights = np.asarray(weights, dtype=float)
    centers = (np.arange(1, 6) - 0.5) * bins / 5.0
    sigma = bins / 20.0
    x = np.arange(bins, dtype=float)
    p = np.zeros(bins)
    for w, mu in zip(weights, centers):
        p += w * np.exp(-((x - mu) ** 2) / (2.0 * sigma ** 2))
    p /= p.sum()
    return TargetDistribution(p, Grid1D(n), provenance={
        "kind": "multimodal_1d", "n": n, "weight_seed": int(weight_seed),
        "weights": [float(w) for w in weights],
        "centers": [float(c) for c in centers], "sigma": float(sigma)})


def bivariate_gaussian_2d(n_x: int, n_y: int, rho: float) -> TargetDistribution:
    """Correlated bivariate Gaussian on the [-3,3]^2 grid."""
    if not abs(rho) < 1.0:
        raise ValueError(f"|rho| must be < 1, got {rho}")
    grid = Grid2D(n_x, n_y)
    x = grid.x_centers()[None, :]
    y = grid.y_centers()[:, None]
    p = np.exp(-(x ** 2 - 2.0 * rho * x * y + y ** 2) / (2.0 * (1.0 - rho ** 2)))
    p = p.reshape(-1)  # row-major: y index major, so flat index = iy*2^n_x + ix
    p /= p.sum()
    return TargetDistribution(p, grid, provenance={
        "kind": "bivariate_2d", "n_x": n_x, "n_y": n_y, "rho": float(rho)})


def four_mode_mixture_2d(n_x: int, n_y: int, sigma: float = 0.5) -> TargetDistribution:
    """Mixture of four isotropic Gaussians centered at (+-1.5, +-1.5)."""
    if n_x < 2 or n_y < 2:
        raise ValueError("need at least 2 qubits per register")
    grid = Grid2D(n_x, n_y)
    x = grid.x_centers()[None, :]
    y = grid.y_centers()[:, None]
    p = np.zeros((1 << n_y, 1 << n_x))
    centers = [(sx * 1.5, sy * 1.5) for sx in (-1, 1) for sy in (-1, 1)]
    for cx, cy in centers:
        p += np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * sigma ** 2))
    p = p.reshape(-1)
    p /= p.sum()
    return TargetDistribution(p, grid, provenance={
        "kind": "four_mode_2d", "n_x": n_x, "n_y": n_y, "sigma": float(sigma),
        "centers": centers})


def find_modes_2d(probs_2d: np.ndarray, min_rel_height: float = 0.1,
                  rtol: float = 1e-9) -> list[tuple[int, int]]:
    """Plateau-aware local maxima of a 2D probability array.

    A mode is a connected component (8-neighborhood) of cells of equal value
    (within ``rtol``) that is >= all its neighbors and reaches at least
    ``min_rel_height`` of the global maximum. Equal-value plateaus occur
    whenever a mixture center falls exactly between bin centers, so maxima
    are reported as one (iy, ix) representative per plateau: the cell with
    the lexicographically smallest index.

    Returns a sorted list of (iy, ix) tuples.
    """
    p = np.asarray(probs_2d, dtype=float)
    if p.ndim != 2:
        raise ValueError("expected a 2D array")
    ny, nx = p.shape
    floor = min_rel_height * p.max()

    def neighbors(iy, ix):
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dy == 0 and dx == 0:
                    continue
                jy, jx = iy + dy, ix + dx
                if 0 <= jy < ny and 0 <= jx < nx:
                    yield jy, jx

    def close(a, b):
        return abs(a - b) <= rtol * max(abs(a), abs(b))

    visited = np.zeros_like(p, dtype=bool)
    modes = []
    for iy in range(ny):
        for ix in range(nx):
            if visited[iy, ix] or p[iy, ix] < floor:
                continue
            # flood-fill the equal-value plateau containing this cell
            plateau = [(iy, ix)]
            stack = [(iy, ix)]
            visited[iy, ix] = True
            is_max = True
            while stack:
                cy, cx = stack.pop()
                for jy, jx in neighbors(cy, cx):
                    if close(p[jy, jx], p[iy, ix]):
                        if not visited[jy, jx]:
                            visited[jy, jx] = True
                            plateau.append((jy, jx))
                            stack.append((jy, jx))
                    elif p[jy, jx] > p[iy, ix]:
                        is_max = False
            if is_max:
                modes.append(min(plateau))
    return sorted(modes)
