import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairreweigh.data import (
    ColumnKind,
    Dataset,
    DataError,
    EmptyDataError,
    ParseError,
    Schema,
    SchemaError,
    apply_standardizer,
    fit_standardizer,
    invert_standardizer,
    load_csv,
    split,
    write_csv,
)

XAY = Schema.build("y", ["x"], {"a": "binary"})


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestSchema:
    def test_from_dict(self):
        s = Schema.from_dict(
            {"target": "y", "features": ["x1", "x2"], "sensitive": [{"name": "race", "kind": "categorical"}]}
        )
        assert s.names == ["x1", "x2", "race", "y"]
        assert s.kind("race") is ColumnKind.SENSITIVE_CATEGORICAL
        assert s.sensitive == ["race"]
        assert Schema.from_dict(s.to_dict()) == s

    def test_duplicate_names(self):
        with pytest.raises(SchemaError):
            Schema.build("y", ["x", "x"])

    def test_needs_one_target(self):
        with pytest.raises(SchemaError):
            Schema((("x", ColumnKind.FEATURE),))

    def test_unknown_kind(self):
        with pytest.raises(SchemaError):
            Schema.build("y", [], {"a": "ordinal"})


class TestLoadCsv:
    def test_three_rows_unit_weights(self, tmp_path):
        p = write(tmp_path, "x,a,y\n1.5,0,2\n2.5,1,3\n3.5,0,4\n")
        ds = load_csv(p, XAY)
        assert ds.n_rows == 3
        np.testing.assert_array_equal(ds.weights, [1, 1, 1])
        np.testing.assert_array_equal(ds["x"], [1.5, 2.5, 3.5])

    def test_text_categories_first_seen_order(self, tmp_path):
        p = write(tmp_path, "x,race,y\n1,black,0\n2,white,1\n3,black,1\n")
        ds = load_csv(p, Schema.build("y", ["x"], {"race": "binary"}))
        np.testing.assert_array_equal(ds["race"], [0, 1, 0])
        assert ds.codebooks["race"] == ("black", "white")

    def test_missing_target(self, tmp_path):
        p = write(tmp_path, "x,a\n1,0\n")
        with pytest.raises(SchemaError):
            load_csv(p, XAY)

    def test_unparseable_cell_location(self, tmp_path):
        p = write(tmp_path, "x,a,y\n1,0,2\nfoo,1,3\n")
        with pytest.raises(ParseError) as err:
            load_csv(p, XAY)
        assert err.value.row == 3 and err.value.column == "x"

    def test_empty_file(self, tmp_path):
        with pytest.raises(EmptyDataError):
            load_csv(write(tmp_path, ""), XAY)
        with pytest.raises(EmptyDataError):
            load_csv(write(tmp_path, "x,a,y\n", "h.csv"), XAY)

    def test_binary_column_checked(self, tmp_path):
        with pytest.raises(DataError):
            load_csv(write(tmp_path, "x,a,y\n1,2,3\n"), XAY)

    def test_round_trip(self, tmp_path, rng):
        schema = Schema.build("y", ["x"], {"a": "continuous", "g": "categorical"})
        ds = Dataset.from_columns(
            schema, {"x": rng.normal(size=20), "a": rng.random(20) * 1e-7, "g": rng.integers(0, 3, 20), "y": rng.normal(size=20) * 1e9}
        )
        path = tmp_path / "rt.csv"
        write_csv(ds, path)
        back = load_csv(path, schema)
        for name in schema.names:
            np.testing.assert_allclose(back[name], ds[name], rtol=0, atol=1e-12 * max(1, np.abs(ds[name]).max()))

    def test_round_trip_keeps_labels(self, tmp_path):
        p = write(tmp_path, "x,race,y\n1,black,0\n2,white,1\n")
        schema = Schema.build("y", ["x"], {"race": "binary"})
        ds = load_csv(p, schema)
        write_csv(ds, tmp_path / "out.csv")
        assert "black" in (tmp_path / "out.csv").read_text()


class TestDatasetInvariants:
    def test_weights_must_be_positive(self):
        with pytest.raises(DataError):
            Dataset.from_columns(XAY, {"x": [1, 2], "a": [0, 1], "y": [1, 2]}, weights=[1, 0])

    def test_lengths_must_agree(self):
        with pytest.raises(DataError):
            Dataset.from_columns(XAY, {"x": [1, 2, 3], "a": [0, 1], "y": [1, 2]})


class TestStandardizer:
    def test_population_stddev(self):
        ds = Dataset.from_columns(XAY, {"x": [1, 2, 3], "a": [0, 1, 0], "y": [0, 0, 0]})
        params = fit_standardizer(ds, ["x"])
        mean, sd = params.stats["x"]
        assert mean == 2
        assert sd == pytest.approx(math.sqrt(2 / 3), abs=1e-15)

    def test_constant_column(self):
        ds = Dataset.from_columns(XAY, {"x": [5, 5, 5], "a": [0, 1, 0], "y": [0, 1, 2]})
        assert fit_standardizer(ds, ["x"]).stats["x"] == (5.0, 1.0)
        np.testing.assert_array_equal(apply_standardizer(ds, fit_standardizer(ds, ["x"]))["x"], [0, 0, 0])

    def test_empty_columns(self):
        ds = Dataset.from_columns(XAY, {"x": [1], "a": [0], "y": [0]})
        assert fit_standardizer(ds, []).stats == {}

    def test_apply_given_params(self):
        from fairreweigh.data import StandardizationParams

        ds = Dataset.from_columns(XAY, {"x": [1, 2, 3], "a": [0, 1, 0], "y": [7, 8, 9]})
        out = apply_standardizer(ds, StandardizationParams({"x": (2.0, 1.0)}))
        np.testing.assert_array_equal(out["x"], [-1, 0, 1])
        np.testing.assert_array_equal(out["y"], [7, 8, 9])

    def test_unknown_column(self):
        ds = Dataset.from_columns(XAY, {"x": [1], "a": [0], "y": [0]})
        with pytest.raises(SchemaError):
            fit_standardizer(ds, ["nope"])

    def test_round_trip_and_moments(self, rng):
        ds = Dataset.from_columns(XAY, {"x": rng.normal(3, 7, 500), "a": rng.integers(0, 2, 500), "y": rng.normal(size=500)})
        params = fit_standardizer(ds, ["x", "y"])
        z = apply_standardizer(ds, params)
        for name in ("x", "y"):
            assert abs(z[name].mean()) < 1e-9
            assert abs(z[name].std() - 1) < 1e-9
        back = invert_standardizer(z, params)
        np.testing.assert_allclose(back["x"], ds["x"], atol=1e-12)

    def test_no_leakage(self, rng):
        ds = Dataset.from_columns(XAY, {"x": rng.normal(size=100), "a": rng.integers(0, 2, 100), "y": rng.normal(size=100)})
        train, test = split(ds, 0.5, 3)
        params = fit_standardizer(train, ["x"])
        m, s = params.stats["x"]
        np.testing.assert_allclose(apply_standardizer(test, params)["x"], (test["x"] - m) / s)
        assert m == pytest.approx(train["x"].mean())


class TestSplit:
    def make(self, n):
        return Dataset.from_columns(XAY, {"x": np.arange(n), "a": np.arange(n) % 2, "y": np.arange(n) * 2.0})

    def test_half_half_partition(self):
        ds = self.make(100)
        train, test = split(ds, 0.5, 7)
        assert train.n_rows == 50 and test.n_rows == 50
        assert sorted(np.concatenate([train["x"], test["x"]])) == list(range(100))

    def test_deterministic(self):
        ds = self.make(100)
        a, b = split(ds, 0.5, 7), split(ds, 0.5, 7)
        np.testing.assert_array_equal(a[0]["x"], b[0]["x"])

    def test_seed_changes_partition(self):
        ds = self.make(100)
        assert not np.array_equal(split(ds, 0.5, 1)[0]["x"], split(ds, 0.5, 2)[0]["x"])

    def test_too_small(self):
        with pytest.raises(DataError):
            split(self.make(1), 0.5, 0)

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(2, 300), frac=st.floats(0.01, 0.99), seed=st.integers(0, 2**32 - 1))
    def test_partition_property(self, n, frac, seed):
        train, test = split(self.make(n), frac, seed)
        idx = np.concatenate([train["x"], test["x"]]).astype(int)
        assert len(idx) == n and len(set(idx.tolist())) == n
        expected = min(max(int(math.floor(frac * n + 0.5)), 1), n - 1)
        assert train.n_rows == expected


def test_schema_json_file(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"target": "y", "features": ["x"], "sensitive": [{"name": "a", "kind": "binary"}]}))
    assert Schema.from_json(p) == XAY
