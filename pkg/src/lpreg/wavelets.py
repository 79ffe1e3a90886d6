"""Biorthogonal 9/7 wavelet transform via lifting, with periodic extension.

The analysis side runs two predict/update pairs and a diagonal scaling on the
even/odd polyphase split; the synthesis side undoes them in reverse, so
perfect reconstruction holds to rounding error by construction for any
lifting constants.  The basis is biorthogonal: the transpose of the synthesis
map is NOT the analysis map, so the adjoint needed by gradient code is
provided explicitly (each lifting step is triangular and its transpose has a
closed form with the index shift mirrored).

Coefficient layout is coarsest-first: [approx | detail_L | ... | detail_1]
with detail_1 the finest band.
"""

from __future__ import annotations

import numpy as np

__all__ = ["WaveletBasis", "cdf97_forward", "cdf97_inverse", "cdf97_inverse_adjoint"]

# lifting factorization constants of the 9/7 filter pair
_ALPHA = -1.586134342059924
_BETA = -0.052980118572961
_GAMMA = 0.882911075530934
_DELTA = 0.443506852043971
_ZETA = 1.230174104914001


def _fwd_step(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One analysis level on an even-length band; returns (approx, detail)."""
    s = x[0::2].copy()
    d = x[1::2].copy()
    d += _ALPHA * (s + np.roll(s, -1))
    s += _BETA * (d + np.roll(d, 1))
    d += _GAMMA * (s + np.roll(s, -1))
    s += _DELTA * (d + np.roll(d, 1))
    s *= _ZETA
    d /= _ZETA
    return s, d


def _inv_step(s: np.ndarray, d: np.ndarray) -> np.ndarray:
    """One synthesis level; exact reverse of _fwd_step."""
    s = s / _ZETA
    d = d * _ZETA
    s -= _DELTA * (d + np.roll(d, 1))
    d -= _GAMMA * (s + np.roll(s, -1))
    s -= _BETA * (d + np.roll(d, 1))
    d -= _ALPHA * (s + np.roll(s, -1))
    x = np.empty(s.size + d.size, dtype=np.float64)
    x[0::2] = s
    x[1::2] = d
    return x


def _inv_step_adjoint(y: np.ndarray) -> np.ndarray:
    """Transpose of _inv_step as a map full-band -> [approx | detail].

    Each triangular lifting update transposes to the mirrored update (the
    index shift flips direction and the roles of the two half-bands swap);
    the diagonal scaling is its own transpose.
    """
    s = y[0::2].copy()
    d = y[1::2].copy()
    s -= _ALPHA * (d + np.roll(d, 1))
    d -= _BETA * (s + np.roll(s, -1))
    s -= _GAMMA * (d + np.roll(d, 1))
    d -= _DELTA * (s + np.roll(s, -1))
    s /= _ZETA
    d *= _ZETA
    return np.concatenate([s, d])


def cdf97_forward(x: np.ndarray, levels: int) -> np.ndarray:
    """Multi-level analysis transform; length must be divisible by 2**levels."""
    x = np.asarray(x, dtype=np.float64)
    _check_length(x.size, levels)
    out = x.copy()
    m = x.size
    for _ in range(levels):
        s, d = _fwd_step(out[:m])
        out[: m // 2] = s
        out[m // 2 : m] = d
        m //= 2
    return out


def cdf97_inverse(w: np.ndarray, levels: int) -> np.ndarray:
    """Multi-level synthesis transform (exact inverse of cdf97_forward)."""
    w = np.asarray(w, dtype=np.float64)
    _check_length(w.size, levels)
    out = w.copy()
    m = w.size >> levels
    for _ in range(levels):
        out[: 2 * m] = _inv_step(out[:m], out[m : 2 * m])
        m *= 2
    return out


def cdf97_inverse_adjoint(y: np.ndarray, levels: int) -> np.ndarray:
    """Transpose of cdf97_inverse (NOT cdf97_forward: the basis is biorthogonal)."""
    y = np.asarray(y, dtype=np.float64)
    _check_length(y.size, levels)
    out = y.copy()
    m = y.size
    for _ in range(levels):
        out[:m] = _inv_step_adjoint(out[:m])
        m //= 2
    return out


def _check_length(n: int, levels: int) -> None:
    if levels < 0:
        raise ValueError(f"levels must be >= 0, got {levels}")
    if levels > 0 and (n % (1 << levels) != 0 or n < (1 << levels)):
        raise ValueError(f"length {n} not divisible into {levels} dyadic levels")


class WaveletBasis:
    """A fixed-length multi-level 9/7 transform usable as a change of basis.

    ``levels=0`` degenerates to the identity, which turns any composed
    operator back into the raw forward map.
    """

    def __init__(self, length: int, levels: int):
        _check_length(length, levels)
        self.length = int(length)
        self.levels = int(levels)

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        return cdf97_forward(x, self.levels) if self.levels else x.copy()

    def inverse(self, w: np.ndarray) -> np.ndarray:
        w = self._check(w)
        return cdf97_inverse(w, self.levels) if self.levels else w.copy()

    def inverse_adjoint(self, y: np.ndarray) -> np.ndarray:
        y = self._check(y)
        return cdf97_inverse_adjoint(y, self.levels) if self.levels else y.copy()

    def _check(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or v.size != self.length:
            raise ValueError(f"expected vector of length {self.length}, got shape {v.shape}")
        return v


def cdf97_forward_2d(img: np.ndarray, levels: int) -> np.ndarray:
    """Separable 2-D analysis on a square image (rows then columns per level)."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ValueError(f"expected a square 2-D array, got shape {img.shape}")
    _check_length(img.shape[0], levels)
    out = img.copy()
    m = img.shape[0]
    for _ in range(levels):
        for i in range(m):
            s, d = _fwd_step(out[i, :m])
            out[i, : m // 2] = s
            out[i, m // 2 : m] = d
        for j in range(m):
            s, d = _fwd_step(out[:m, j])
            out[: m // 2, j] = s
            out[m // 2 : m, j] = d
        m //= 2
    return out


def cdf97_inverse_2d(coeffs: np.ndarray, levels: int) -> np.ndarray:
    """Exact inverse of cdf97_forward_2d."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim != 2 or coeffs.shape[0] != coeffs.shape[1]:
        raise ValueError(f"expected a square 2-D array, got shape {coeffs.shape}")
    _check_length(coeffs.shape[0], levels)
    out = coeffs.copy()
    m = coeffs.shape[0] >> levels
    for _ in range(levels):
        for j in range(2 * m):
            out[: 2 * m, j] = _inv_step(out[:m, j], out[m : 2 * m, j])
        for i in range(2 * m):
            out[i, : 2 * m] = _inv_step(out[i, :m], out[i, m : 2 * m])
        m *= 2
    return out
