"""File formats: Matrix Market matrices, one-value-per-line vectors, and
problem-bundle directories.

A bundle directory holds A.mtx, x_true.txt, b_clean.txt, b_noisy.txt,
b_outliers.txt and meta.json (generator name, seeds and the full effective
configuration, so a bundle can be regenerated byte-for-byte).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.io as sio
import scipy.sparse as sp

from .linop import LinearOperator, as_operator

__all__ = [
    "write_matrix_mtx",
    "read_matrix_mtx",
    "write_vector",
    "read_vector",
    "Bundle",
    "save_bundle",
    "load_bundle",
]

BUNDLE_FILES = ("A.mtx", "x_true.txt", "b_clean.txt", "b_noisy.txt",
                "b_outliers.txt", "meta.json")


def write_matrix_mtx(path, a) -> None:
    """Matrix Market writer; sparse goes to coordinate format, dense to array."""
    if isinstance(a, LinearOperator):
        a = getattr(a, "a", None)
        if a is None:
            raise ValueError("only dense/sparse-backed operators can be serialized")
    if sp.issparse(a):
        sio.mmwrite(str(path), a.tocoo())
    else:
        sio.mmwrite(str(path), np.asarray(a, dtype=np.float64))


def read_matrix_mtx(path):
    """Matrix Market reader; returns CSR for coordinate files, ndarray for dense."""
    a = sio.mmread(str(path))
    if sp.issparse(a):
        return a.tocsr().astype(np.float64)
    return np.asarray(a, dtype=np.float64)


def write_vector(path, v: np.ndarray) -> None:
    """One float per line, full double precision."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    with open(path, "w", encoding="utf-8") as fh:
        for val in v:
            fh.write(f"{val:.17g}\n")


def read_vector(path) -> np.ndarray:
    vals = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                vals.append(float(line))
    return np.array(vals, dtype=np.float64)


@dataclass
class Bundle:
    """A generated problem ready for the solve/lcurve commands."""

    a: LinearOperator
    x_true: np.ndarray
    b_clean: np.ndarray
    b_noisy: np.ndarray
    b_outliers: np.ndarray
    meta: dict

    def data(self, which: str) -> np.ndarray:
        table = {"clean": self.b_clean, "noisy": self.b_noisy, "outliers": self.b_outliers}
        if which not in table:
            raise ValueError(f"data must be one of {sorted(table)}, got {which!r}")
        return table[which]


def save_bundle(outdir, a, x_true, b_clean, b_noisy, b_outliers, meta: dict) -> Path:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    raw = a.a if isinstance(a, LinearOperator) else a
    write_matrix_mtx(outdir / "A.mtx", raw)
    write_vector(outdir / "x_true.txt", x_true)
    write_vector(outdir / "b_clean.txt", b_clean)
    write_vector(outdir / "b_noisy.txt", b_noisy)
    write_vector(outdir / "b_outliers.txt", b_outliers)
    with open(outdir / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return outdir


def load_bundle(indir) -> Bundle:
    indir = Path(indir)
    missing = [f for f in BUNDLE_FILES if not (indir / f).exists()]
    if missing:
        raise FileNotFoundError(f"bundle at {indir} is missing {missing}")
    a = as_operator(read_matrix_mtx(indir / "A.mtx"))
    with open(indir / "meta.json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    return Bundle(
        a=a,
        x_true=read_vector(indir / "x_true.txt"),
        b_clean=read_vector(indir / "b_clean.txt"),
        b_noisy=read_vector(indir / "b_noisy.txt"),
        b_outliers=read_vector(indir / "b_outliers.txt"),
        meta=meta,
    )
