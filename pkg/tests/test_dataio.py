import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caea.dataio import (
    BUILTIN,
    DataError,
    Dataset,
    Mode,
    StreamOrder,
    load_builtin,
    load_csv,
    make_folds,
    order_stream,
    read_manifest,
    resolve_dataset,
    rng_for,
    save_csv,
)


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_basic(self, tmp_path):
        ds = load_csv(_write(tmp_path, "1,2,b\n3,4,a\n5,6,b\n"))
        assert ds.points.tolist() == [[1, 2], [3, 4], [5, 6]]
        assert ds.labels.tolist() == [0, 1, 0]
        assert ds.classes == ("b", "a")

    def test_header_and_label_column(self, tmp_path):
        ds = load_csv(_write(tmp_path, "cls,x,y\nA,1.5,2\nB,3,4e1\n"), has_header=True, label_column=0)
        assert ds.points.tolist() == [[1.5, 2.0], [3.0, 40.0]]
        assert ds.classes == ("A", "B")

    def test_one_row(self, tmp_path):
        ds = load_csv(_write(tmp_path, "0.5,7\n"))
        assert (ds.n, ds.dim, ds.n_classes) == (1, 1, 1)

    def test_whitespace(self, tmp_path):
        ds = load_csv(_write(tmp_path, "1.0  2.0\t1\n3 4 2\n", "d.txt"), delimiter=None)
        assert ds.points.tolist() == [[1, 2], [3, 4]]

    def test_ragged_row_reports_line(self, tmp_path):
        with pytest.raises(DataError, match="line 3"):
            load_csv(_write(tmp_path, "1,2,a\n3,4,b\n5,a\n"))

    def test_non_numeric_reports_line(self, tmp_path):
        with pytest.raises(DataError, match=r"line 2: non-numeric feature 'x'"):
            load_csv(_write(tmp_path, "1,2,a\nx,4,b\n"))

    def test_nan_rejected(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(_write(tmp_path, "1,nan,a\n"))

    def test_empty(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(_write(tmp_path, "\n\n"))
        with pytest.raises(DataError):
            load_csv(_write(tmp_path, "h1,h2\n"), has_header=True)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(tmp_path / "nope.csv")

    def test_label_column_out_of_range(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(_write(tmp_path, "1,2,a\n"), label_column=5)

    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        ds = Dataset(rng.normal(size=(20, 3)), rng.integers(0, 3, 20), classes=("x", "y", "z"))
        save_csv(ds, tmp_path / "r.csv")
        back = load_csv(tmp_path / "r.csv")
        assert back.points.tobytes() == ds.points.tobytes()
        assert [back.classes[i] for i in back.labels] == [ds.classes[i] for i in ds.labels]


class TestBuiltin:
    def test_iris_via_csv(self, tmp_path):
        iris = load_builtin("iris")
        save_csv(iris, tmp_path / "iris.csv")
        ds = load_csv(tmp_path / "iris.csv")
        assert (ds.n, ds.dim, ds.n_classes) == (150, 4, 3)
        assert ds.points.tolist() == iris.points.tolist()

    @pytest.mark.parametrize("name,shape", [("wine", (178, 13)), ("breast_cancer", (569, 30))])
    def test_shapes(self, name, shape):
        ds = load_builtin(name)
        assert (ds.n, ds.dim) == shape

    def test_unknown(self):
        with pytest.raises(DataError):
            load_builtin("nope")


class TestResolve:
    def test_path(self, tmp_path):
        p = _write(tmp_path, "1,2,a\n")
        assert resolve_dataset(str(p)).n == 1

    def test_builtin(self):
        assert resolve_dataset("iris").name == "iris"
        assert set(BUILTIN) == {"iris", "wine", "breast_cancer"}

    def test_data_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CAEA_DATA_DIR", str(tmp_path))
        (tmp_path / "jain.txt").write_text("0.85\t17.45\t2\n0.75\t15.6\t2\n3.3\t15.45\t1\n")
        ds = resolve_dataset("jain")
        assert (ds.n, ds.dim, ds.n_classes) == (3, 2, 2)

    def test_missing_names_manifest_url(self, tmp_path, monkeypatch):
        monkeypatch.setenv("CAEA_DATA_DIR", str(tmp_path))
        with pytest.raises(DataError, match="fetch it from http"):
            resolve_dataset("aggregation")

    def test_manifest(self):
        m = read_manifest()
        assert m["jain"]["rows"] == 373 and m["jain"]["cols"] == 2
        assert m["aggregation"]["rows"] == 788


class TestOrder:
    labels = np.array([2, 0, 1, 0, 2, 1, 1, 0, 2, 2])

    def test_stationary_is_permutation(self):
        idx = np.arange(10)
        o = order_stream(self.labels, idx, StreamOrder(Mode.STATIONARY, 3))
        assert sorted(o.tolist()) == idx.tolist()

    def test_nonstationary_blocks(self):
        idx = np.array([0, 1, 2, 3, 4, 5, 6, 7, 8, 9])
        o = order_stream(self.labels, idx, StreamOrder(Mode.NONSTATIONARY, 3), 1, 4)
        assert self.labels[o].tolist() == sorted(self.labels.tolist())
        assert sorted(o.tolist()) == idx.tolist()

    def test_subset(self):
        idx = np.array([1, 4, 5])
        o = order_stream(self.labels, idx, StreamOrder(Mode.NONSTATIONARY, 0))
        assert o.tolist() == [1, 5, 4]

    def test_seeded(self):
        a = order_stream(self.labels, np.arange(10), StreamOrder(Mode.STATIONARY, 7), 0, 1)
        b = order_stream(self.labels, np.arange(10), StreamOrder(Mode.STATIONARY, 7), 0, 1)
        c = order_stream(self.labels, np.arange(10), StreamOrder(Mode.STATIONARY, 7), 0, 2)
        assert a.tolist() == b.tolist() != c.tolist()

    def test_rng_for_is_pcg64(self):
        ref = np.random.Generator(np.random.PCG64(np.random.SeedSequence([5, 1, 2])))
        assert rng_for(5, 1, 2).integers(0, 2**32, 4).tolist() == ref.integers(0, 2**32, 4).tolist()


class TestFolds:
    def test_iris_stratified(self):
        y = load_builtin("iris").labels
        plan = make_folds(y, repeats=2, folds=10, seed=0)
        for r in range(2):
            seen = []
            for f in range(10):
                tr, te = plan.split(r, f)
                assert len(te) == 15
                assert np.bincount(y[te]).tolist() == [5, 5, 5]
                assert len(tr) + len(te) == 150
                seen.extend(te.tolist())
            assert sorted(seen) == list(range(150))
        assert plan.assignments[0].tolist() != plan.assignments[1].tolist()

    def test_too_few(self):
        with pytest.raises(ValueError):
            make_folds([0, 1, 0], folds=10)
        with pytest.raises(ValueError):
            make_folds([0, 1, 0], folds=1)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.integers(0, 4), min_size=10, max_size=120), st.integers(2, 10), st.integers(0, 99))
    def test_balance(self, labels, folds, seed):
        y = np.array(labels)
        a = make_folds(y, 1, folds, seed).assignments[0]
        sizes = np.bincount(a, minlength=folds)
        assert sizes.max() - sizes.min() <= 1
        for c in np.unique(y):
            per = np.bincount(a[y == c], minlength=folds)
            share = (y == c).sum() / folds
            assert per.min() >= np.floor(share) and per.max() <= np.ceil(share)
