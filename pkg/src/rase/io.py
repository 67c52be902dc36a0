"""CSV datasets and JSON model persistence.

CSV files carry a header row; the label column is named ``y`` and every
other column is a numeric feature, kept in file order. Floats are written
with ``repr`` (shortest round-trip form), so a save/load cycle is exact.

Model files are versioned JSON. Subspaces are stored 1-based. kNN models
store the full training matrix once; each learner keeps only its subspace
and ``k``.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .classifiers import BaseKind, GammaLearner, KnnLearner, LdaLearner, QdaLearner
from .criteria import CriterionConfig
from .dataset import LabeledDataset, Subspace
from .ensemble import EnsembleConfig, RaseModel
from .errors import DataError, SchemaError

FORMAT_VERSION = 1


# -- CSV ------------------------------------------------------------------------------

def _parse_float(text, path, line, col):
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"{path}:{line}: column {col!r}: not a number: {text!r}") from None
    if not math.isfinite(v):
        raise DataError(f"{path}:{line}: column {col!r}: non-finite value {text!r}")
    return v


def load_csv(path) -> LabeledDataset:
    """Read a labelled dataset; errors name the file and the offending line."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"{path}: cannot open: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError(f"{path}: empty file (expected a header row)")
        header = [h.strip() for h in header]
        if "y" not in header:
            raise DataError(f"{path}:1: no label column named 'y'")
        if header.count("y") > 1:
            raise DataError(f"{path}:1: label column 'y' appears more than once")
        yi = header.index("y")
        feats = [i for i in range(len(header)) if i != yi]
        X, y = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
            lab = row[yi].strip()
            if lab not in ("0", "1"):
                try:
                    lv = float(lab)
                except ValueError:
                    lv = None
                if lv not in (0.0, 1.0):
                    raise DataError(f"{path}:{line}: label must be 0 or 1, got {lab!r}")
                lab = str(int(lv))
            y.append(int(lab))
            X.append([_parse_float(row[i], path, line, header[i]) for i in feats])
    if not y:
        raise DataError(f"{path}: no data rows")
    if not feats:
        raise DataError(f"{path}:1: no feature columns")
    return LabeledDataset(np.array(X, dtype=np.float64).reshape(len(y), len(feats)),
                          np.array(y, dtype=np.int64))


def save_csv(dataset: LabeledDataset, path, feature_names=None):
    """Write ``x1..xp`` feature columns followed by ``y``."""
    p = dataset.p
    names = list(feature_names) if feature_names is not None else [f"x{j + 1}" for j in range(p)]
    if len(names) != p:
        raise DataError(f"{len(names)} feature names for {p} features")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names + ["y"])
        for xi, yi in zip(dataset.X.tolist(), dataset.y.tolist()):
            w.writerow([repr(v) for v in xi] + [str(yi)])


def save_predictions(path, labels, scores):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y_hat", "nu"])
        for lab, s in zip(np.asarray(labels).tolist(), np.asarray(scores).tolist()):
            w.writerow([str(lab), repr(s)])


# -- models ---------------------------------------------------------------------------

def _config_to_dict(cfg: EnsembleConfig):
    c = cfg.criterion
    return {"B1": cfg.B1, "B2": cfg.B2, "D": cfg.D,
            "base": {"name": cfg.base.name, "k_grid": list(cfg.base.k_grid)},
            "criterion": {"kind": c.kind, "c_n": c.c_n, "k0": c.k0, "k1": c.k1},
            "T": cfg.T, "C0": cfg.C0, "seed": cfg.seed, "threads": cfg.threads}


def _config_from_dict(d):
    return EnsembleConfig(B1=d["B1"], B2=d["B2"], D=d["D"],
                          base=BaseKind(d["base"]["name"], tuple(d["base"]["k_grid"])),
                          criterion=CriterionConfig(**d["criterion"]),
                          T=d["T"], C0=d["C0"], seed=d["seed"], threads=d["threads"])


def _learner_to_dict(lr):
    out = {"kind": lr.kind, "subspace": lr.subspace.one_based()}
    if lr.kind == "lda":
        out.update(mean0=lr.mean0.tolist(), mean1=lr.mean1.tolist(),
                   cov_inv=lr.cov_inv.tolist(), log_prior_ratio=lr.log_prior_ratio)
    elif lr.kind == "qda":
        out.update(mean0=lr.mean0.tolist(), mean1=lr.mean1.tolist(),
                   cov0_inv=lr.cov0_inv.tolist(), cov1_inv=lr.cov1_inv.tolist(),
                   logdet0=lr.logdet0, logdet1=lr.logdet1, log_prior_ratio=lr.log_prior_ratio)
    elif lr.kind == "gamma":
        out.update(shape0=lr.shape0.tolist(), scale0=lr.scale0.tolist(),
                   shape1=lr.shape1.tolist(), scale1=lr.scale1.tolist(),
                   log_prior_ratio=lr.log_prior_ratio)
    else:
        out["k"] = lr.k
    return out


def _arr(v):
    return np.asarray(v, dtype=np.float64)


def _learner_from_dict(d, training):
    s = Subspace.from_one_based(d["subspace"])
    kind = d["kind"]
    if kind == "lda":
        return LdaLearner(_arr(d["mean0"]), _arr(d["mean1"]), _arr(d["cov_inv"]),
                          float(d["log_prior_ratio"]), s)
    if kind == "qda":
        return QdaLearner(_arr(d["mean0"]), _arr(d["mean1"]), _arr(d["cov0_inv"]),
                          _arr(d["cov1_inv"]), float(d["logdet0"]), float(d["logdet1"]),
                          float(d["log_prior_ratio"]), s)
    if kind == "gamma":
        return GammaLearner(_arr(d["shape0"]), _arr(d["scale0"]), _arr(d["shape1"]),
                            _arr(d["scale1"]), float(d["log_prior_ratio"]), s)
    if kind == "knn":
        if training is None:
            raise SchemaError("kNN model without embedded training data")
        return KnnLearner(int(d["k"]), np.ascontiguousarray(training.X[:, s.array]),
                          np.asarray(training.y), s)
    raise SchemaError(f"unknown learner kind {kind!r}")


def model_to_dict(model: RaseModel):
    doc = {"format_version": FORMAT_VERSION, "p": model.p,
           "config": _config_to_dict(model.config),
           "alpha_hat": model.alpha_hat, "eta": np.asarray(model.eta).tolist(),
           "learners": [_learner_to_dict(lr) for lr in model.learners]}
    if model.training is not None:
        doc["training"] = {"X": model.training.X.tolist(), "y": model.training.y.tolist()}
    return doc


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise SchemaError("model document must be a JSON object")
    version = doc.get("format_version")
    if not isinstance(version, int):
        raise SchemaError("missing or invalid format_version")
    if version > FORMAT_VERSION:
        raise SchemaError(f"model format_version {version} is newer than supported "
                          f"({FORMAT_VERSION})")
    try:
        cfg = _config_from_dict(doc["config"])
        training = None
        if "training" in doc:
            training = LabeledDataset(np.asarray(doc["training"]["X"], dtype=np.float64),
                                      np.asarray(doc["training"]["y"], dtype=np.int64))
        learners = [_learner_from_dict(d, training) for d in doc["learners"]]
        eta = np.asarray(doc["eta"], dtype=np.float64)
        return RaseModel(learners, float(doc["alpha_hat"]), eta, cfg, int(doc["p"]), training)
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"malformed model document: {exc!r}") from exc


def save_model(model: RaseModel, path):
    """Write ``model`` as JSON. Floats use ``repr``, so loading is exact."""
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh)


def load_model(path) -> RaseModel:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
    return model_from_dict(doc)
