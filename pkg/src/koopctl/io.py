"""JSON and CSV persistence.

CSV files are UTF-8 with a header row; floats are written with ``repr`` so
they round-trip exactly. JSON documents keep the field order used here.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .ident.models import BilinearKoopmanModel, LinearKoopmanModel
from .ident.regressors import BilinearLayout, OperatingPoint

MODEL_FORMAT = "koopctl-model/1"


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_csv(path):
    """Return ``(header, float array)``; an empty body gives shape ``(0, ncols)``."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _rows(a):
    return np.asarray(a, dtype=float).tolist()


def model_to_dict(model, observables=None, estimator=None, bank=None, extra=None) -> dict:
    """Serialise a model with its observable bank and estimator settings."""
    doc = {"format": MODEL_FORMAT, "kind": model.kind,
           "dims": {"n1": model.n1, "n_lifted": model.n_lifted, "m": model.m,
                    "d": model.regressor_dim}}
    if observables is not None:
        doc["observables"] = {"identifier": observables.identifier, "names": observables.names}
    if bank is not None:
        doc["utility"] = bank
    if extra:
        doc.update(extra)
    if isinstance(model, BilinearKoopmanModel):
        doc["x0"] = {"z1": _rows(model.x0.z1), "lifted": _rows(model.x0.lifted)}
        doc["parameters"] = {
            "A21": _rows(model.A21), "A22": _rows(model.A22), "B2": _rows(model.B2),
            "f0": _rows(model.f0),
            **{f"Phi{k}": _rows(model.phi(k)) for k in range(1, 6)},
        }
    else:
        doc["x0"] = None
        doc["parameters"] = {"A21": _rows(model.A21), "A22": _rows(model.A22),
                             "B2": _rows(model.B2)}
    if estimator is not None:
        doc["estimator"] = {
            "rho": estimator.rho, "P0_scale": estimator.P0_scale, "p0": estimator.p0,
            "p1": estimator.p1,
            "projection": None if estimator.projection is None else "enabled",
            "steps": estimator.n_steps, "resets": list(estimator.resets),
        }
    return doc


def model_from_dict(doc: dict):
    if doc.get("format") != MODEL_FORMAT:
        raise ConfigurationError(f"not a {MODEL_FORMAT} document")
    dims = doc["dims"]
    n1, n2, m = dims["n1"], dims["n_lifted"], dims["m"]
    p = doc["parameters"]
    if doc["kind"] == "linear":
        return LinearKoopmanModel(np.array(p["A21"]).reshape(n2, n1),
                                  np.array(p["A22"]).reshape(n2, n2),
                                  np.array(p["B2"]).reshape(n2, m))
    if doc["kind"] == "bilinear":
        layout = BilinearLayout(n1, n2, m)
        x0 = OperatingPoint(doc["x0"]["z1"], doc["x0"]["lifted"])
        sizes = layout.sizes
        blocks = [np.array(p["A21"]).reshape(n2, n1).T, np.array(p["A22"]).reshape(n2, n2).T,
                  np.array(p["B2"]).reshape(n2, m).T, np.array(p["f0"]).reshape(1, n2)]
        blocks += [np.array(p[f"Phi{k}"]).reshape(sizes[f"g{k}"], n2) for k in range(1, 6)]
        return BilinearKoopmanModel(np.vstack(blocks), layout, x0)
    raise ConfigurationError(f"unknown model kind {doc['kind']!r}")


def save_model(path, model, **kwargs):
    write_json(path, model_to_dict(model, **kwargs))


def load_model(path):
    return model_from_dict(read_json(path))
