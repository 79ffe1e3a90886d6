"""Synthetic test problems: straight-ray tomography, graded-spectrum dense
matrices, noise/outlier corruption, and a multiscale 1-D model, plus the
wavelet-composed operator used for sparsity-in-basis experiments.

All generators are deterministic functions of their seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .linop import CallableOperator, LinearOperator, SparseOperator, as_operator
from .wavelets import WaveletBasis

__all__ = [
    "TomographyProblem",
    "build_tomography",
    "checkerboard",
    "add_noise_and_outliers",
    "logspace_matrix",
    "multiscale_model",
    "compose_awinv",
]


@dataclass
class TomographyProblem:
    """Ray-path matrix over a unit-square pixel grid.

    ``a`` has one row per ray; entry (i, k) is the length of ray i inside
    pixel k (row-major over the grid), so each row sums to the chord length.
    ``endpoints`` holds (x0, y0, x1, y1) per ray.
    """

    grid: int
    a: SparseOperator
    endpoints: np.ndarray

    @property
    def n_pixels(self) -> int:
        return self.grid * self.grid

    @property
    def n_rays(self) -> int:
        return self.a.rows


def _boundary_point(u: float) -> tuple[float, float, int]:
    """Map perimeter coordinate u in [0, 4) to a point on the unit square."""
    side = int(u)
    frac = u - side
    if side == 0:
        return frac, 0.0, 0
    if side == 1:
        return 1.0, frac, 1
    if side == 2:
        return 1.0 - frac, 1.0, 2
    return 0.0, 1.0 - frac, 3


def _trace_ray(p0, p1, grid):
    """Exact pixel-crossing walk; returns (pixel indices, lengths in them)."""
    x0, y0 = p0
    x1, y1 = p1
    dx, dy = x1 - x0, y1 - y0
    length = math.hypot(dx, dy)

    # crossing parameters with every grid line strictly inside (0, 1)
    ts = [0.0, 1.0]
    for k in range(1, grid):
        c = k / grid
        if dx != 0.0:
            t = (c - x0) / dx
            if 0.0 < t < 1.0:
                ts.append(t)
        if dy != 0.0:
            t = (c - y0) / dy
            if 0.0 < t < 1.0:
                ts.append(t)
    ts = sorted(set(ts))

    cells, lens = [], []
    for ta, tb in zip(ts[:-1], ts[1:]):
        seg = (tb - ta) * length
        if seg <= 0.0:
            continue
        tm = 0.5 * (ta + tb)
        col = min(max(int((x0 + tm * dx) * grid), 0), grid - 1)
        row = min(max(int((y0 + tm * dy) * grid), 0), grid - 1)
        cells.append(row * grid + col)
        lens.append(seg)
    return cells, lens


def build_tomography(grid: int, n_rays: int, seed: int = 0) -> TomographyProblem:
    """Random straight rays across a unit square split into grid x grid pixels.

    Endpoints are drawn uniformly on the boundary; a candidate pair is
    rejected when both points lie on the same edge or are closer than one
    pixel width 1/grid (degenerate rays).  Deterministic per seed.
    """
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    if n_rays < 1:
        raise ValueError(f"n_rays must be >= 1, got {n_rays}")
    rng = np.random.default_rng(seed)
    min_len = 1.0 / grid

    rows, cols, vals = [], [], []
    endpoints = np.empty((n_rays, 4), dtype=np.float64)
    made = 0
    attempts = 0
    max_attempts = 1000 * n_rays
    while made < n_rays:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError("could not sample enough non-degenerate rays")
        u0, u1 = rng.uniform(0.0, 4.0, size=2)
        x0, y0, s0 = _boundary_point(u0)
        x1, y1, s1 = _boundary_point(u1)
        if s0 == s1 or math.hypot(x1 - x0, y1 - y0) < min_len:
            continue
        cells, lens = _trace_ray((x0, y0), (x1, y1), grid)
        endpoints[made] = (x0, y0, x1, y1)
        rows.extend([made] * len(cells))
        cols.extend(cells)
        vals.extend(lens)
        made += 1

    a = sp.coo_matrix((vals, (rows, cols)), shape=(n_rays, grid * grid)).tocsr()
    a.sum_duplicates()
    return TomographyProblem(grid=grid, a=SparseOperator(a), endpoints=endpoints)


def checkerboard(grid: int, block: int = 4, amplitude: float = 1.0) -> np.ndarray:
    """Alternating +/- amplitude tiles of block x block pixels, row-major."""
    if grid < 1 or block < 1:
        raise ValueError("grid and block must be >= 1")
    if grid % block != 0:
        raise ValueError(f"block ({block}) must divide grid ({grid})")
    i = np.arange(grid)
    par = (i[:, None] // block + i[None, :] // block) % 2
    return np.where(par == 0, amplitude, -amplitude).astype(np.float64).ravel()


def add_noise_and_outliers(b_clean: np.ndarray, seed: int = 0,
                           gauss_rel_std: float = 0.05,
                           outlier_frac: float = 0.10,
                           outlier_scale: float = 5.0) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian noise plus sparse gross errors, both scaled to the data RMS.

    b_noisy = b_clean + N(0, gauss_rel_std * rms); b_outliers additionally
    perturbs ceil(outlier_frac * m) random entries by
    outlier_scale * rms * (random sign) * Uniform[0.5, 1].
    """
    b_clean = np.asarray(b_clean, dtype=np.float64)
    m = b_clean.size
    rng = np.random.default_rng(seed)
    rms = float(np.sqrt(np.mean(b_clean * b_clean))) if m else 0.0

    b_noisy = b_clean + rng.normal(0.0, gauss_rel_std * rms, size=m)
    b_out = b_noisy.copy()
    n_out = math.ceil(outlier_frac * m)
    if n_out > 0 and rms > 0.0:
        idx = rng.choice(m, size=min(n_out, m), replace=False)
        mag = outlier_scale * rms * rng.uniform(0.5, 1.0, size=idx.size)
        sign = rng.choice([-1.0, 1.0], size=idx.size)
        b_out[idx] += sign * mag
    return b_noisy, b_out


def logspace_matrix(m: int, n: int, exp_hi: float = 0.0, exp_lo: float = -2.5,
                    seed: int = 0) -> np.ndarray:
    """Dense matrix with log-spaced singular values 10**exp_hi .. 10**exp_lo.

    Orthonormal factors come from QR of seeded Gaussian draws, so instances
    are generic in orientation but have exactly the prescribed spectrum.
    """
    if exp_hi < exp_lo:
        raise ValueError("exp_hi must be >= exp_lo")
    k = min(m, n)
    rng = np.random.default_rng(seed)
    u, _ = np.linalg.qr(rng.standard_normal((m, k)))
    v, _ = np.linalg.qr(rng.standard_normal((n, k)))
    svals = np.geomspace(10.0 ** exp_hi, 10.0 ** exp_lo, k)
    return (u * svals) @ v.T


def multiscale_model(length: int, seed: int = 0) -> np.ndarray:
    """Piecewise-constant blocks plus smooth bumps at two scales, ||x||_inf = 1.

    Designed to be compressible in the 9/7 basis: most energy concentrates in
    a small fraction of coefficients.
    """
    if length < 64:
        raise ValueError(f"length must be >= 64, got {length}")
    rng = np.random.default_rng(seed)
    x = np.zeros(length)
    t = np.arange(length) / length

    # coarse piecewise-constant background over a handful of segments
    n_seg = 5
    bounds = np.sort(rng.choice(np.arange(1, 16), size=n_seg - 1, replace=False)) * (length // 16)
    amps = rng.uniform(-1.0, 1.0, size=n_seg)
    lo = 0
    for j, hi in enumerate(list(bounds) + [length]):
        x[lo:hi] += amps[j]
        lo = hi

    # two broad and two narrow Gaussian bumps
    for width, count in ((0.05, 2), (0.006, 2)):
        centers = rng.uniform(0.1, 0.9, size=count)
        signs = rng.choice([-1.0, 1.0], size=count)
        scale = rng.uniform(0.5, 1.0, size=count)
        for c, sg, sc in zip(centers, signs, scale):
            x += sg * sc * np.exp(-0.5 * ((t - c) / width) ** 2)

    peak = np.max(np.abs(x))
    if peak > 0.0:
        x /= peak
    return x


def compose_awinv(A, basis: WaveletBasis) -> LinearOperator:
    """Operator acting on synthesis coefficients: w -> A(W^{-1} w).

    Its transpose is W^{-T} A^T (the inverse-transform adjoint, not the
    forward transform, since the 9/7 pair is biorthogonal).  With levels=0
    this is A itself up to wrapping.
    """
    A = as_operator(A)
    if A.cols != basis.length:
        raise ValueError(f"operator has {A.cols} columns but basis length is {basis.length}")
    return CallableOperator(
        A.rows, A.cols,
        forward=lambda w: A.apply(basis.inverse(w)),
        transpose=lambda y: basis.inverse_adjoint(A.apply_transpose(y)),
    )
