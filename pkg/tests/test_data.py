import time
import warnings

import numpy as np
import pytest

from seclogreg.analysis import clear_oracle_protocol1
from seclogreg.data import (DataError, Dataset, age_bin, bin_ages, combine, expand_categoricals,
                            load_csv, partition, read_party_files, stack_inputs, write_party_files)
from seclogreg.protocol1 import Protocol1Config, sample_sets
from seclogreg.sharing import reconstruct_ring

from conftest import synth_dataset


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_load_fixture_exact(tmp_path):
    path = write(tmp_path, "age,grp,y\n30,b,1\n45.5,a,0\n20,c,1\n")
    ds = load_csv(path, {"age": "numeric", "grp": "categorical", "y": "target"})
    np.testing.assert_array_equal(ds.X, [[1, 30, 1, 0], [1, 45.5, 0, 0], [1, 20, 0, 1]])
    np.testing.assert_array_equal(ds.y, [1, 0, 1])
    assert ds.column_names == ["intercept", "age", "grp=b", "grp=c"]


def test_missing_cell_is_named(tmp_path):
    path = write(tmp_path, "a,y\n1,1\n,0\n")
    with pytest.raises(DataError, match=r"row 3, column 'a'"):
        load_csv(path, {"a": "numeric", "y": "target"})


def test_non_binary_target_rejected(tmp_path):
    path = write(tmp_path, "a,y\n1,1\n2,2\n")
    with pytest.raises(DataError, match="target"):
        load_csv(path, {"a": "numeric", "y": "target"})


def test_large_file_parses_quickly(tmp_path):
    rng = np.random.default_rng(0)
    n = 50_000
    lines = ["age,income,marital,y"]
    status = np.array(["married", "widowed", "divorced", "separated", "never", "spouse_absent"])
    ages = rng.integers(16, 90, n)
    inc = rng.normal(50, 10, n)
    mar = status[rng.integers(0, 6, n)]
    ys = rng.integers(0, 2, n)
    lines += [f"{a},{i:.3f},{m},{t}" for a, i, m, t in zip(ages, inc, mar, ys)]
    path = write(tmp_path, "\n".join(lines) + "\n")
    t0 = time.perf_counter()
    ds = load_csv(path, {"age": "numeric", "income": "numeric", "marital": "categorical", "y": "target"})
    assert time.perf_counter() - t0 < 5.0
    assert ds.X.shape == (n, 3 + 5)


def test_expand_categoricals():
    base = np.ones((6, 1))
    for levels, expect in ((["a", "b"] * 3, 1), (list("abcdef"), 5)):
        ds = Dataset(base, np.zeros(6), ["intercept"], {"c": np.array(levels, dtype=object)})
        assert expand_categoricals(ds, ["c"]).d == 1 + expect
    ds = Dataset(np.ones((4, 1)), np.zeros(4), ["intercept"], {"c": np.array(list("abcd"), dtype=object)})
    out = expand_categoricals(ds, ["c"])
    np.testing.assert_array_equal(out.X[0, 1:], [0, 0, 0])
    single = Dataset(np.ones((2, 1)), np.zeros(2), ["intercept"], {"c": np.array(["a", "a"], dtype=object)})
    with pytest.raises(DataError):
        expand_categoricals(single, ["c"])


def test_age_bins():
    assert list(age_bin([19, 20, 75, 0, 39.9, 60])) == [1, 2, 4, 1, 2, 4]
    with pytest.raises(DataError):
        age_bin([-1])
    ds = Dataset(np.array([[1, 19.0], [1, 20], [1, 75]]), np.array([0, 1, 0.0]), ["intercept", "age"])
    full = bin_ages(ds, "age")
    np.testing.assert_array_equal(full.X[:, 1:], [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert bin_ages(ds, "age", drop_first=True).d == 4


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(np.ones((2, 1)), np.array([0, 0.5]), ["a"])
    with pytest.raises(DataError):
        Dataset(np.array([[1.0], [np.nan]]), np.array([0, 1.0]), ["a"])
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        Dataset(np.ones((1, 2)), np.array([1.0]), ["a", "b"])
        assert w


def test_horizontal_blocks(codec):
    ds = Dataset(np.arange(8.0).reshape(4, 2), np.array([0, 1, 1, 0.0]), ["a", "b"])
    p = partition(ds, "horizontal", 2, codec=codec)
    np.testing.assert_array_equal(p[0].X.decode()[2:], 0)
    np.testing.assert_array_equal(p[1].X.decode()[:2], 0)
    X, y = stack_inputs(p)
    assert reconstruct_ring(X).equals(codec.encode(ds.X))


@pytest.mark.parametrize("scheme", ["horizontal", "vertical", "additive_random"])
def test_schemes_sum_exactly(codec, scheme):
    ds = synth_dataset(1, n=30, d=4)
    for seed in range(3):
        p = partition(ds, scheme, 3, np.random.default_rng(seed), codec)
        X, y = stack_inputs(p)
        assert reconstruct_ring(X).equals(codec.encode(ds.X))
        assert reconstruct_ring(y).equals(codec.encode(ds.y))


def test_vertical_layout(codec):
    ds = synth_dataset(2, n=10, d=4)
    p = partition(ds, "vertical", 2, codec=codec)
    assert np.all(p[1].y.to_ints() == 0)
    np.testing.assert_array_equal(p[0].X.decode()[:, 0], 1.0)
    with pytest.raises(DataError):
        partition(ds, "vertical", 5, codec=codec)


def test_vertical_fit_equals_clear_fit(codec):
    ds = synth_dataset(3)
    cfg = Protocol1Config(L=100)
    z = sample_sets(cfg)[0].z
    clear = clear_oracle_protocol1(ds.X, ds.y, z, cfg)
    joined = combine(partition(ds, "vertical", 2, codec=codec))
    np.testing.assert_array_equal(clear_oracle_protocol1(joined.X, joined.y, z, cfg).beta, clear.beta)


def test_party_files_round_trip(tmp_path, codec):
    ds = synth_dataset(4, n=20)
    p = partition(ds, "additive_random", 3, np.random.default_rng(0), codec)
    write_party_files(p, tmp_path, "additive_random", 0, ds.column_names)
    back, info = read_party_files(tmp_path)
    assert info["scheme"] == "additive_random" and len(back) == 3
    for a, b in zip(p, back):
        assert a.X.equals(b.X) and a.y.equals(b.y)


def test_party_files_errors(tmp_path):
    with pytest.raises(DataError, match="manifest"):
        read_party_files(tmp_path)
