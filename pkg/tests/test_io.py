"""Matrix Market and bundle round-trips, trace serialization."""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import sparse

from lpreg.io import (Bundle, load_bundle, read_matrix_mtx, read_vector,
                      save_bundle, write_matrix_mtx, write_vector)
from lpreg.linop import DenseOperator, SparseOperator
from lpreg.trace import SolveTrace


def test_dense_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    a = rng.standard_normal((7, 5))
    path = tmp_path / "a.mtx"
    write_matrix_mtx(path, a)
    back = read_matrix_mtx(path)
    assert_allclose(np.asarray(back.todense() if sparse.issparse(back) else back),
                    a, rtol=1e-12)


def test_sparse_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    a = sparse.random(20, 15, density=0.2, random_state=2, format="csr")
    path = tmp_path / "s.mtx"
    write_matrix_mtx(path, a)
    back = read_matrix_mtx(path)
    assert sparse.issparse(back)
    assert_allclose(back.toarray(), a.toarray(), rtol=1e-12)


def test_vector_round_trip_exact(tmp_path):
    rng = np.random.default_rng(2)
    v = rng.standard_normal(40) * 10.0 ** rng.integers(-8, 8, 40)
    path = tmp_path / "v.txt"
    write_vector(path, v)
    # %.17g repr reproduces float64 exactly
    assert np.array_equal(read_vector(path), v)


def test_bundle_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    a = rng.standard_normal((10, 8))
    xt = rng.standard_normal(8)
    bc = a @ xt
    bn = bc + 0.01 * rng.standard_normal(10)
    bo = bn.copy()
    bo[3] += 5.0
    meta = {"kind": "matrix", "seed": 3, "note": "round trip"}
    outdir = save_bundle(tmp_path / "bundle", a, xt, bc, bn, bo, meta)
    back = load_bundle(outdir)
    assert_allclose(back.a.a if isinstance(back.a, DenseOperator)
                    else back.a.a.toarray(), a, rtol=1e-12)
    assert np.array_equal(back.x_true, xt)
    assert np.array_equal(back.b_clean, bc)
    assert np.array_equal(back.b_noisy, bn)
    assert np.array_equal(back.b_outliers, bo)
    assert back.meta["kind"] == "matrix" and back.meta["seed"] == 3


def test_bundle_sparse_operator(tmp_path):
    a = sparse.random(12, 9, density=0.3, random_state=4, format="csr")
    xt = np.zeros(9)
    b = np.asarray(a @ xt)
    outdir = save_bundle(tmp_path / "sb", a, xt, b, b, b, {"kind": "tomo"})
    back = load_bundle(outdir)
    assert isinstance(back.a, SparseOperator)
    assert_allclose(back.a.a.toarray(), a.toarray(), rtol=1e-12)


def test_bundle_data_selector(tmp_path):
    rng = np.random.default_rng(5)
    a = rng.standard_normal((4, 3))
    v = rng.standard_normal(4)
    bundle = Bundle(DenseOperator(a), np.zeros(3), v, v + 1, v + 2, {})
    assert_allclose(bundle.data("clean"), v)
    assert_allclose(bundle.data("noisy"), v + 1)
    assert_allclose(bundle.data("outliers"), v + 2)
    with pytest.raises(ValueError):
        bundle.data("raw")


def test_trace_jsonl_round_trip(tmp_path):
    tr = SolveTrace()
    tr.append(iter=1, F=2.5, nnz=3)
    tr.append(iter=2, F=1.25, nnz=2, extra="note")
    path = tmp_path / "trace.jsonl"
    tr.write_jsonl(path)
    back = SolveTrace.read_jsonl(path)
    assert back.records == tr.records
    assert_allclose(back.values("F"), [2.5, 1.25])
    # missing keys surface as NaN in column extraction
    assert np.isnan(back.values("missing")).all()
    assert back.final()["iter"] == 2
    assert_allclose(back.f_values, [2.5, 1.25])
