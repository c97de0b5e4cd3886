import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from golsi import data as D


def test_iris_shape_and_classes():
    d = D.load_iris()
    assert (d.M, d.input_dim, d.output_dim) == (150, 4, 3)
    assert d.targets.sum(axis=0).tolist() == [50, 50, 50]
    assert np.all(d.targets.sum(axis=1) == 1)


def test_bcwd_bundled_counts():
    d = D.load_bcwd()
    assert (d.M, d.input_dim, d.output_dim) == (569, 30, 1)
    assert int(d.targets.sum()) == 212
    assert int((d.targets == 0).sum()) == 357


def test_bcwd_one_hot_twin_outputs():
    d = D.one_hot_binary(D.load_bcwd())
    assert d.output_dim == 2
    assert d.targets[:, 1].sum() == 212


def _row(i, diag="M", n=30):
    return ",".join([str(i), diag] + [f"{0.5 * k:.2f}" for k in range(n)])


def test_bcwd_short_row_names_line(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("\n".join([_row(1), _row(2, "B"), _row(3, n=29)]) + "\n")
    with pytest.raises(D.DataError, match=r"bad\.csv:3"):
        D.load_bcwd(p)


def test_bcwd_bad_diagnosis(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text(_row(1, "X") + "\n")
    with pytest.raises(D.DataError, match="diagnosis"):
        D.load_bcwd(p)


def test_bcwd_header_is_skipped(tmp_path):
    p = tmp_path / "hdr.csv"
    header = ",".join(["id", "diagnosis"] + [f"f{k}" for k in range(30)])
    p.write_text("\n".join([header, _row(1), _row(2, "B")]) + "\n")
    d = D.load_bcwd(p)
    assert d.M == 2
    assert d.targets[:, 0].tolist() == [1.0, 0.0]


def test_bcwd_missing_file(tmp_path):
    with pytest.raises(D.DataError, match="not found"):
        D.load_bcwd(tmp_path / "nope.csv")


def test_standardize_two_values():
    d = D.Dataset(np.array([[0.0], [2.0]]), np.zeros((2, 1)))
    z, stats = D.standardize(d)
    assert z.inputs[:, 0].tolist() == [-1.0, 1.0]
    assert stats.mean[0] == 1.0 and stats.std[0] == 1.0


def test_standardize_constant_column_maps_to_zero():
    d = D.Dataset(np.array([[5.0, 1.0], [5.0, 3.0], [5.0, 2.0]]), np.zeros((3, 1)))
    z, _ = D.standardize(d)
    assert np.all(z.inputs[:, 0] == 0.0)
    assert np.all(np.isfinite(z.inputs))


def test_standardize_empty_stats_rows():
    d = D.Dataset(np.ones((3, 2)), np.zeros((3, 1)))
    with pytest.raises(ValueError):
        D.standardize(d, stats_from=[])


@given(hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, min_side=2, max_side=12),
                  elements=st.floats(-1e3, 1e3)))
def test_standardize_idempotent(x):
    d = D.Dataset(x, np.zeros((x.shape[0], 1)))
    once, _ = D.standardize(d)
    twice, _ = D.standardize(once)
    np.testing.assert_allclose(twice.inputs, once.inputs, atol=1e-8)
    m = once.inputs.mean(axis=0)
    assert np.all(np.abs(m) < 1e-8)


def test_split_sizes_disjoint_deterministic():
    d = D.load_bcwd()
    d = D.Dataset(d.inputs, np.arange(d.M, dtype=float)[:, None])
    s = D.SplitSpec(400, 169, shuffle_seed=3)
    a, b = D.split(d, s)
    a2, b2 = D.split(d, s)
    assert (a.M, b.M) == (400, 169)
    ids_a, ids_b = set(a.targets[:, 0]), set(b.targets[:, 0])
    assert not ids_a & ids_b
    assert len(ids_a | ids_b) == 569
    assert np.array_equal(a.inputs, a2.inputs) and np.array_equal(b.inputs, b2.inputs)
    other, _ = D.split(d, D.SplitSpec(400, 169, shuffle_seed=4))
    assert not np.array_equal(other.targets, a.targets)


def test_split_too_large():
    d = D.load_iris()
    with pytest.raises(ValueError):
        D.split(d, D.SplitSpec(100, 51))


def test_prepare_uses_training_statistics():
    d = D.one_hot_binary(D.load_bcwd())
    train, test = D.prepare(d, D.SplitSpec(400, 169, shuffle_seed=0))
    np.testing.assert_allclose(train.inputs.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(train.inputs.std(axis=0), 1.0, atol=1e-12)
    assert np.max(np.abs(test.inputs.mean(axis=0))) > 1e-6


def _write_idx(tmp_path, n=3, rows=2, cols=2, image_magic=0x803, labels_n=None):
    imgs = tmp_path / "images"
    labs = tmp_path / "labels"
    pix = (np.arange(n * rows * cols) % 256).astype(np.uint8)
    imgs.write_bytes(struct.pack(">4I", image_magic, n, rows, cols) + pix.tobytes())
    m = n if labels_n is None else labels_n
    labs.write_bytes(struct.pack(">2I", 0x801, m) + (np.arange(m) % 10).astype(np.uint8).tobytes())
    return imgs, labs


def test_idx_round_trip(tmp_path):
    imgs, labs = _write_idx(tmp_path)
    d = D.load_mnist_idx(imgs, labs)
    assert (d.M, d.input_dim, d.output_dim) == (3, 4, 10)
    assert d.inputs[1, 0] == 4 / 255.0
    assert d.targets.argmax(axis=1).tolist() == [0, 1, 2]


def test_idx_bad_magic(tmp_path):
    imgs, labs = _write_idx(tmp_path, image_magic=0x802)
    with pytest.raises(D.DataError, match="magic"):
        D.load_mnist_idx(imgs, labs)


def test_idx_count_mismatch(tmp_path):
    imgs, labs = _write_idx(tmp_path, labels_n=2)
    with pytest.raises(D.DataError, match="count"):
        D.load_mnist_idx(imgs, labs)


def test_data_dir_env(monkeypatch, tmp_path):
    monkeypatch.setenv("GOLS_DATA_DIR", str(tmp_path))
    assert D.data_dir() == tmp_path
