import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import polys, tables
from ptfsense import io
from ptfsense.generators import random_expansion
from ptfsense.hermite import HermiteExpansion
from ptfsense.learner import feature_index, l1_fit


@given(polys(max_n=8))
def test_polynomial_document_round_trip(p):
    assert io.poly_from_dict(json.loads(json.dumps(io.poly_to_dict(p)))) == p


def test_polynomial_document_layout():
    from ptfsense.poly import MultilinearPoly

    p = MultilinearPoly.from_terms(3, {(3,): 1.0, (1, 2): -0.5})
    doc = io.poly_to_dict(p)
    assert doc == {"n": 3, "basis": "monomial",
                   "terms": [{"vars": [3], "coeff": 1.0}, {"vars": [1, 2], "coeff": -0.5}]}


def test_hermite_document_round_trip(tmp_path):
    p = random_expansion(3, 3, np.random.default_rng(0))
    io.save_poly(p, tmp_path / "h.json")
    q = io.load_poly(tmp_path / "h.json")
    assert isinstance(q, HermiteExpansion) and q.coeffs == p.coeffs
    doc = io.poly_to_dict(p)
    assert all(len(t["index"]) == 3 for t in doc["terms"])


@pytest.mark.parametrize("doc,msg", [
    ({"n": 3, "terms": [{"vars": [2, 1], "coeff": 1}]}, "ascending"),
    ({"n": 3, "terms": [{"vars": [1], "coeff": 1}, {"vars": [1], "coeff": 2}]}, "duplicates"),
    ({"n": 3, "basis": "chebyshev", "terms": []}, "unknown basis"),
    ({"terms": []}, "malformed"),
])
def test_malformed_polynomial_documents(doc, msg):
    with pytest.raises(ValueError, match=msg):
        io.poly_from_dict(doc)


@given(tables(max_n=9))
def test_table_round_trip(t):
    doc = io.table_to_dict(t)
    assert len(doc["bits"]) == 2 * max(1, (1 << t.n) // 8)
    assert io.table_from_dict(doc) == t


def test_table_bit_layout():
    from ptfsense.poly import TruthTable

    t = TruthTable(3, np.array([1, -1, 1, 1, 1, 1, 1, -1]))
    assert io.table_to_dict(t)["bits"] == "82"
    with pytest.raises(ValueError):
        io.table_from_dict({"n": 4, "bits": "ff"})


def test_model_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    X = rng.choice([-1.0, 1.0], size=(300, 5))
    y = np.where(X[:, 0] * X[:, 1] + 0.3 * X[:, 2] >= 0, 1, -1)
    model = l1_fit(X, y, 2)
    io.save_model(model, tmp_path / "m.json")
    back = io.load_model(tmp_path / "m.json")
    assert back.weights == model.weights and back.threshold == model.threshold
    assert np.array_equal(back.weight_vector(), model.weight_vector())
    assert np.array_equal(back.predict(X), model.predict(X))
    assert list(back.weights) == [S for S in feature_index(5, 2) if S in back.weights]


def test_dataset_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    X = rng.choice([-1.0, 1.0], size=(20, 4))
    X[0, 0] = 0.125
    y = rng.choice([-1, 1], size=20)
    path = tmp_path / "d.csv"
    io.save_dataset(X, y, path)
    text = path.read_text()
    path.write_text("# comment line\n" + text)
    X2, y2 = io.load_dataset(path)
    assert np.array_equal(X2, X) and np.array_equal(y2, y)


def test_dataset_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,1\n1,1\n")
    with pytest.raises(ValueError, match="differing lengths"):
        io.load_dataset(bad)
    bad.write_text("1,x,1\n")
    with pytest.raises(ValueError, match="non-numeric"):
        io.load_dataset(bad)
    bad.write_text("# nothing\n")
    with pytest.raises(ValueError, match="empty"):
        io.load_dataset(bad)


def test_write_csv_formats_cells(tmp_path):
    path = tmp_path / "r.csv"
    io.write_csv(path, [{"a": 0.1, "b": None, "c": (1, 2)}, {"a": 2, "d": "x"}])
    lines = path.read_text().splitlines()
    assert lines[0] == "a,b,c,d"
    assert lines[1] == "0.1,,1 2,"
    assert lines[2] == "2,,,x"
