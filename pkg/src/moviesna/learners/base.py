"""Trained-model container and the flat text model format.

Format, one item per line::

    kind=<tree|forest|gb|mlp>
    n_features=<int>
    n_classes=<int>
    param.<name>=<value>
    array <name> <dtype> <dim>,<dim>...
    <space-separated values>

Floats are written with ``repr`` so a load reproduces every weight exactly.
"""

from __future__ import annotations

import numpy as np


class TrainedModel:
    kind = "base"

    def __init__(self, params: dict, arrays: dict, n_features: int, n_classes: int):
        self.params = dict(params)
        self.arrays = {k: np.asarray(v) for k, v in arrays.items()}
        self.n_features = int(n_features)
        self.n_classes = int(n_classes)

    def _proba(self, X):
        raise NotImplementedError

    def _check(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            width = X.shape[1] if X.ndim == 2 else None
            raise ValueError(f"expected {self.n_features} features, got {width}")
        return X

    def predict_proba(self, X):
        return self._proba(self._check(X))

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)


def check_training_data(X, y, n_classes=None):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("empty dataset")
    if len(y) != len(X):
        raise ValueError("X and y lengths differ")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    y = y.astype(np.int64)
    if y.min() < 0:
        raise ValueError("labels must be non-negative class indices")
    if len(np.unique(y)) < 2:
        raise ValueError("at least 2 classes are required")
    k = int(y.max()) + 1 if n_classes is None else int(n_classes)
    if y.max() >= k:
        raise ValueError(f"label {y.max()} outside {k} classes")
    return X, y, k


def _format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _parse_value(text):
    if text in ("true", "false"):
        return text == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def model_to_text(model: TrainedModel) -> str:
    lines = [f"kind={model.kind}", f"n_features={model.n_features}", f"n_classes={model.n_classes}"]
    for k in sorted(model.params):
        lines.append(f"param.{k}={_format_value(model.params[k])}")
    for name in sorted(model.arrays):
        a = model.arrays[name]
        dims = ",".join(str(d) for d in a.shape)
        lines.append(f"array {name} {a.dtype.str} {dims}")
        flat = a.ravel()
        if a.dtype.kind == "f":
            lines.append(" ".join(repr(float(v)) for v in flat))
        else:
            lines.append(" ".join(str(int(v)) for v in flat))
    return "\n".join(lines) + "\n"


def model_from_text(text: str) -> TrainedModel:
    from . import MODEL_CLASSES
    lines = text.splitlines()
    head, params, arrays = {}, {}, {}
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith("array "):
            _, name, dtype, dims = line.split(" ")
            shape = tuple(int(d) for d in dims.split(",")) if dims else ()
            body = lines[i + 1].split() if i + 1 < len(lines) else []
            arrays[name] = np.array([float(v) if "f" in dtype else int(v) for v in body],
                                    dtype=np.dtype(dtype)).reshape(shape)
            i += 2
            continue
        if line.strip():
            key, _, val = line.partition("=")
            if key.startswith("param."):
                params[key[6:]] = _parse_value(val)
            else:
                head[key] = val
        i += 1
    try:
        cls = MODEL_CLASSES[head["kind"]]
    except KeyError:
        raise ValueError(f"unknown or missing model kind: {head.get('kind')!r}") from None
    return cls(params, arrays, int(head["n_features"]), int(head["n_classes"]))


def save_model(model: TrainedModel, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_text(model))


def load_model(path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_text(fh.read())
