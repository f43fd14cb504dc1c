from __future__ import annotations

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heavyball.datasets import (A4A_FEATURES, LibsvmParseError, RidgeExperimentConfig, SparseDataset, load_libsvm,
                                parse_libsvm, run_ridge_experiment, serialize_libsvm, synthetic_adult_like)


def test_parse_single_row():
    ds = parse_libsvm(io.StringIO("+1 1:0.5 3:2\n"))
    assert ds.n_samples == 1 and ds.n_features == 3
    idx, val = ds.rows[0]
    assert idx.tolist() == [0, 2] and val.tolist() == [0.5, 2.0]
    assert ds.labels.tolist() == [1.0]


def test_parse_empty_stream():
    ds = parse_libsvm(io.StringIO(""))
    assert ds.n_samples == 0 and ds.n_features == 0


def test_parse_comments_and_blank_lines():
    text = "# header\n\n-1 2:1.5  # trailing\n  +1   \n"
    ds = parse_libsvm(io.StringIO(text))
    assert ds.n_samples == 2 and ds.labels.tolist() == [-1.0, 1.0]
    assert ds.rows[1][0].size == 0


@pytest.mark.parametrize(
    "text, line, fragment",
    [("-1 2:1 2:3\n", 1, "nonincreasing"),
     ("+1 1:1\n-1 3:1 2:1\n", 2, "nonincreasing"),
     ("abc 1:1\n", 1, "nonnumeric"),
     ("+1 1:x\n", 1, "nonnumeric"),
     ("+1 0:1\n", 1, "< 1"),
     ("+1 1:1\n\n+1 foo\n", 3, "malformed"),
     ("+1 1:inf\n", 1, "finite")],
)
def test_parse_errors_name_the_line(text, line, fragment):
    with pytest.raises(LibsvmParseError) as exc:
        parse_libsvm(io.StringIO(text))
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value) and fragment in str(exc.value)


def test_n_features_override():
    ds = parse_libsvm(io.StringIO("+1 1:1 5:2\n"), n_features=123)
    assert ds.n_features == 123
    with pytest.raises(ValueError):
        parse_libsvm(io.StringIO("+1 1:1 5:2\n"), n_features=4)
    assert ds.with_n_features(200).n_features == 200
    with pytest.raises(ValueError):
        ds.with_n_features(3)


def test_dense_conversion():
    ds = parse_libsvm(io.StringIO("1 1:2 3:4\n-1 2:5\n"))
    X, Y = ds.to_dense()
    np.testing.assert_array_equal(X, [[2, 0, 4], [0, 5, 0]])
    np.testing.assert_array_equal(Y, [1, -1])


_value = st.floats(allow_nan=False, allow_infinity=False, width=64)
_row = st.tuples(_value, st.dictionaries(st.integers(1, 50), _value, max_size=8))


@settings(max_examples=100)
@given(st.lists(_row, max_size=10))
def test_roundtrip(rows):
    lines = []
    for label, feats in rows:
        pairs = "   ".join(f"{k}:{v!r}" for k, v in sorted(feats.items()))
        lines.append(f"{label!r}\t{pairs}")
    ds = parse_libsvm(io.StringIO("\n".join(lines)))
    again = parse_libsvm(io.StringIO(serialize_libsvm(ds)))
    assert again.n_samples == ds.n_samples
    np.testing.assert_array_equal(again.labels, ds.labels)
    for (i1, v1), (i2, v2) in zip(ds.rows, again.rows):
        np.testing.assert_array_equal(i1, i2)
        np.testing.assert_array_equal(v1, v2)
    assert serialize_libsvm(again) == serialize_libsvm(ds)


def test_load_libsvm(tmp_path):
    path = tmp_path / "tiny"
    path.write_text("+1 1:1\n-1 2:1\n")
    assert load_libsvm(path, n_features=5).n_features == 5


def test_sparse_dataset_invariants():
    with pytest.raises(ValueError):
        SparseDataset(3, ((np.array([1, 1]), np.array([1.0, 1.0])),), np.array([1.0]))
    with pytest.raises(ValueError):
        SparseDataset(3, ((np.array([3]), np.array([1.0])),), np.array([1.0]))
    with pytest.raises(ValueError):
        SparseDataset(3, ((np.array([0]), np.array([1.0])),), np.array([1.0, 2.0]))


def test_synthetic_stand_in_shape():
    ds = synthetic_adult_like(500, seed=1)
    assert ds.n_samples == 500 and ds.n_features == A4A_FEATURES
    assert all(idx.size == 14 for idx, _ in ds.rows)
    assert set(np.unique(ds.labels)) == {-1.0, 1.0}
    again = synthetic_adult_like(500, seed=1)
    assert serialize_libsvm(ds) == serialize_libsvm(again)


def _small_config(**kw):
    base = dict(alpha=1e-2, batch_sizes=(16,), epochs=3, eta0_grid=(0.1, 0.01), gamma_grid=(0.5,),
                n_stage_grid=(2, 3), beta=0.9, seeds=(0, 1), n_features=None)
    base.update(kw)
    return RidgeExperimentConfig(**base)


def test_ridge_experiment_table():
    ds = synthetic_adult_like(200, seed=2)
    res = run_ridge_experiment(ds, _small_config())
    assert res.T == {16: math.ceil(3 * 200 / 16)}
    assert len(res.runs) == 2 * 2 * 2
    for r in res.runs:
        assert r.final_gap >= -1e-9 * abs(res.f_star)
        assert r.best_eta0 in (0.1, 0.01)
        assert (r.best_gamma is None) == (r.schedule == "constant")
    summary = res.summary()
    assert len(summary) == 4 and all(row["n_seeds"] == 2 for row in summary)
    header = res.runs_csv().split("\n")[0]
    assert header == "method,schedule,M,seed,best_eta0,best_gamma,best_n,final_gap"
    assert res.summary_csv().split("\n")[0] == "method,schedule,M,n_seeds,mean_gap,std_gap"
    row = res.lookup("shb", "step_decay", 16)
    gaps = [r.final_gap for r in res.runs if (r.method, r.schedule) == ("shb", "step_decay")]
    assert row["mean_gap"] == pytest.approx(np.mean(gaps)) and row["std_gap"] == pytest.approx(np.std(gaps, ddof=1))


def test_ridge_experiment_deterministic_and_thread_independent():
    ds = synthetic_adult_like(150, seed=3)
    a = run_ridge_experiment(ds, _small_config())
    b = run_ridge_experiment(ds, _small_config(), threads=3)
    assert a.runs_csv() == b.runs_csv()


def test_divergent_grid_point_is_never_selected():
    ds = synthetic_adult_like(100, seed=4)
    res = run_ridge_experiment(ds, _small_config(eta0_grid=(1e4, 0.01), seeds=(0,)))
    for r in res.runs:
        assert r.best_eta0 == 0.01 and math.isfinite(r.final_gap)


def test_partial_final_batch_is_kept():
    ds = synthetic_adult_like(10, seed=5)
    res = run_ridge_experiment(ds, _small_config(batch_sizes=(4,), epochs=1, seeds=(0,)))
    assert res.T[4] == 3


def test_ridge_rejections():
    ds = parse_libsvm(io.StringIO("1 1:1 2:1\n-1 1:2 2:2\n"))
    with pytest.raises(ValueError, match="singular"):
        run_ridge_experiment(ds, _small_config(alpha=0.0))
    with pytest.raises(ValueError, match="empty"):
        run_ridge_experiment(parse_libsvm(io.StringIO("")), _small_config())


@pytest.mark.parametrize("kw", [dict(alpha=-1.0), dict(batch_sizes=()), dict(batch_sizes=(0,)), dict(epochs=0),
                                dict(gamma_grid=(1.0,)), dict(beta=1.0), dict(seeds=()), dict(n_stage_grid=(0,))])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        _small_config(**kw)


def test_default_grid():
    c = RidgeExperimentConfig()
    assert c.eta0_grid == (1.0, 0.1, 0.01, 0.001)
    assert c.gamma_grid == (0.5, 0.25, 0.125)
    assert c.n_stage_grid == (2, 3, 4, 5)
    assert c.batch_sizes == (512, 128, 32, 8)
    assert c.beta == 0.9 and c.epochs == 100 and len(c.seeds) == 5 and c.n_features == 123
