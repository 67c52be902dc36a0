import json

import numpy as np
import pytest

from rase import EnsembleConfig, LabeledDataset, fit
from rase.errors import DataError, SchemaError
from rase.io import (FORMAT_VERSION, load_csv, load_model, model_from_dict, model_to_dict,
                     save_csv, save_model)
from rase.simulation import SimModelSpec, generate


def _write(path, text):
    path.write_text(text)
    return path


def test_csv_round_trip_small(tmp_path):
    d = LabeledDataset(np.array([[0.1, -2.5e-300], [1 / 3, 7.0]]), np.array([0, 1]))
    save_csv(d, tmp_path / "a.csv")
    back = load_csv(tmp_path / "a.csv")
    assert np.array_equal(back.X, d.X) and np.array_equal(back.y, d.y)
    assert (tmp_path / "a.csv").read_text().splitlines()[0] == "x1,x2,y"


def test_csv_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(3)
    X = rng.standard_normal((1000, 50)) * 10.0 ** rng.integers(-8, 8, size=(1000, 50))
    d = LabeledDataset(X, rng.integers(0, 2, 1000))
    save_csv(d, tmp_path / "b.csv")
    back = load_csv(tmp_path / "b.csv")
    assert back.X.tobytes() == d.X.tobytes()
    assert np.array_equal(back.y, d.y)


def test_label_column_may_sit_anywhere(tmp_path):
    p = _write(tmp_path / "c.csv", "y,a,b\n1,0.5,2\n0,1.5,3\n\n")
    d = load_csv(p)
    assert d.X.tolist() == [[0.5, 2.0], [1.5, 3.0]] and d.y.tolist() == [1, 0]


def test_float_labels_accepted(tmp_path):
    d = load_csv(_write(tmp_path / "f.csv", "x,y\n1,1.0\n2,0.0\n"))
    assert d.y.tolist() == [1, 0]


@pytest.mark.parametrize("text, fragment", [
    ("", "empty file"),
    ("x1,x2\n1,2\n", "no label column"),
    ("x,y,y\n1,0,1\n", "more than once"),
    ("x,y\n", "no data rows"),
    ("y\n1\n0\n", "no feature columns"),
    ("x,y\n1,0\n2,1,3\n", ":3: expected 2 fields"),
    ("x,y\n1,0\nabc,1\n", ":3: column 'x': not a number"),
    ("x,y\n1,0\nnan,1\n", ":3: column 'x': non-finite"),
    ("x,y\n1,2\n", ":2: label must be 0 or 1"),
])
def test_bad_csv_reports_location(tmp_path, text, fragment):
    p = _write(tmp_path / "bad.csv", text)
    with pytest.raises(DataError, match=fragment.replace("(", r"\(")) as exc:
        load_csv(p)
    assert str(p) in str(exc.value)


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="cannot open"):
        load_csv(tmp_path / "nope.csv")


@pytest.fixture(scope="module")
def fitted():
    out = {}
    train, test, _ = generate(SimModelSpec("1", 80, 100, seed=2))
    for base in ("lda", "qda"):
        out[base] = (fit(train, EnsembleConfig(B1=15, B2=20, D=4, base=base, seed=1,
                                               threads=1)), test.X)
    gtrain, gtest, _ = generate(SimModelSpec("2", 80, 100, seed=2))
    out["gamma"] = (fit(gtrain, EnsembleConfig(B1=15, B2=20, D=4, base="gamma", seed=1,
                                               threads=1)), gtest.X)
    ktrain, ktest, _ = generate(SimModelSpec("4", 80, 100, seed=2))
    out["knn"] = (fit(ktrain, EnsembleConfig(B1=10, B2=10, D=4, base="knn", seed=1,
                                             threads=1)), ktest.X)
    return out


@pytest.mark.parametrize("base", ["lda", "qda", "gamma", "knn"])
def test_model_round_trip_predictions_identical(tmp_path, fitted, base):
    model, X = fitted[base]
    save_model(model, tmp_path / "m.json")
    back = load_model(tmp_path / "m.json")
    assert back.alpha_hat == model.alpha_hat
    assert np.array_equal(back.eta, model.eta)
    assert [s.one_based() for s in back.subspaces] == [s.one_based() for s in model.subspaces]
    assert back.config == model.config
    assert back.predict_score(X).tobytes() == model.predict_score(X).tobytes()
    assert np.array_equal(back.predict(X), model.predict(X))


def test_knn_model_embeds_training_once(fitted):
    doc = model_to_dict(fitted["knn"][0])
    assert "training" in doc
    assert all(set(lr) == {"kind", "subspace", "k"} for lr in doc["learners"])
    assert "training" not in model_to_dict(fitted["lda"][0])


def test_subspaces_stored_one_based(fitted):
    model = fitted["lda"][0]
    doc = model_to_dict(model)
    assert doc["learners"][0]["subspace"] == [int(i) + 1 for i in model.learners[0].subspace]


def test_truncated_file_is_schema_error(tmp_path, fitted):
    save_model(fitted["lda"][0], tmp_path / "m.json")
    text = (tmp_path / "m.json").read_text()
    (tmp_path / "t.json").write_text(text[: len(text) // 2])
    with pytest.raises(SchemaError, match="not valid JSON"):
        load_model(tmp_path / "t.json")


def test_newer_version_rejected(fitted):
    doc = model_to_dict(fitted["lda"][0])
    doc["format_version"] = FORMAT_VERSION + 1
    with pytest.raises(SchemaError, match="newer"):
        model_from_dict(doc)


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("learners"),
    lambda d: d.pop("format_version"),
    lambda d: d["learners"][0].pop("mean0"),
    lambda d: d["learners"][0].update(kind="svm"),
    lambda d: d["config"].update(B1=0),
])
def test_malformed_documents(fitted, mutate):
    doc = json.loads(json.dumps(model_to_dict(fitted["lda"][0])))
    mutate(doc)
    with pytest.raises(SchemaError):
        model_from_dict(doc)


def test_knn_without_training_rejected(fitted):
    doc = model_to_dict(fitted["knn"][0])
    del doc["training"]
    with pytest.raises(SchemaError, match="training"):
        model_from_dict(doc)
