import numpy as np
import pytest

from lowrank import io as mio
from lowrank.linalg import ObservedSet


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def test_dense_csv_roundtrip_bit_identical(tmp_path):
    g = rng(1)
    W = g.standard_normal((7, 5)) * np.exp(g.uniform(-30, 30, size=(7, 5)))
    path = tmp_path / "w.csv"
    mio.write_dense_csv(path, W)
    back = mio.read_dense_csv(path)
    assert np.array_equal(back, W)


def test_dense_csv_single_row(tmp_path):
    path = tmp_path / "row.csv"
    mio.write_dense_csv(path, np.array([[1.5, -2.0, 3.25]]))
    back = mio.read_dense_csv(path)
    assert back.shape == (1, 3)


def test_dense_mm_roundtrip(tmp_path):
    g = rng(2)
    W = g.standard_normal((4, 6))
    path = tmp_path / "w.mtx"
    mio.write_dense_mm(path, W)
    back = mio.read_mm(path)
    assert np.array_equal(back, W)


def test_dense_mm_is_column_major_on_disk(tmp_path):
    W = np.array([[1.0, 3.0], [2.0, 4.0]])
    path = tmp_path / "w.mtx"
    mio.write_dense_mm(path, W)
    body = [l for l in path.read_text().splitlines() if not l.startswith("%")][1:]
    assert [float(v) for v in body] == [1.0, 2.0, 3.0, 4.0]


def test_coordinate_roundtrip_keeps_explicit_zeros(tmp_path):
    om = ObservedSet.from_pairs(4, 5, [(0, 1), (2, 3), (3, 0)])
    vals = np.array([1.25, 0.0, -7.5])
    path = tmp_path / "om.mtx"
    mio.write_coordinate_mm(path, om, vals)
    om2, vals2 = mio.read_observed(path)
    assert om2.rows == 4 and om2.cols == 5
    assert np.array_equal(om2.linear(), om.linear())
    assert np.array_equal(vals2, vals)


def test_coordinate_indices_are_one_based_on_disk(tmp_path):
    om = ObservedSet.from_pairs(3, 3, [(0, 0)])
    path = tmp_path / "om.mtx"
    mio.write_coordinate_mm(path, om, np.array([2.0]))
    lines = path.read_text().splitlines()
    assert lines[2].split()[:2] == ["1", "1"]


def test_read_coordinate_sorts_entries(tmp_path):
    path = tmp_path / "scrambled.mtx"
    path.write_text(
        "%%MatrixMarket matrix coordinate real general\n"
        "3 3 3\n"
        "3 1 9.0\n"
        "1 2 4.0\n"
        "2 2 5.0\n"
    )
    om, vals = mio.read_observed(path)
    assert list(om.linear()) == [1, 4, 6]
    assert list(vals) == [4.0, 5.0, 9.0]


def test_read_observed_rejects_array_files(tmp_path):
    path = tmp_path / "w.mtx"
    mio.write_dense_mm(path, np.eye(2))
    with pytest.raises(ValueError):
        mio.read_observed(path)


def test_read_mm_rejects_garbage(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("hello\n1 1\n0\n")
    with pytest.raises(ValueError):
        mio.read_mm(path)


def test_csv_rejects_non_finite(tmp_path):
    path = tmp_path / "nan.csv"
    path.write_text("1.0,nan\n2.0,3.0\n")
    with pytest.raises(ValueError):
        mio.read_dense_csv(path)
