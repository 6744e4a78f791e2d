"""From-scratch classifiers: decision tree, random forest, boosted trees, MLP."""

from .base import TrainedModel, load_model, model_from_text, model_to_text, save_model
from .boosting import BoostModel, BoostParams, train_gb
from .mlp import MlpModel, MlpParams, param_count, train_mlp
from .tree import ForestModel, ForestParams, TreeModel, TreeParams, gini, train_forest, train_tree

MODEL_CLASSES = {c.kind: c for c in (TreeModel, ForestModel, BoostModel, MlpModel)}
MODEL_KINDS = ("tree", "forest", "gb", "mlp")


def predict(model: TrainedModel, X):
    return model.predict(X)


def predict_proba(model: TrainedModel, X):
    return model.predict_proba(X)


def default_params(kind, seed=0):
    """Hyperparameters used for each model family unless overridden."""
    if kind == "tree":
        return TreeParams(max_depth=300, max_features="all", seed=seed)
    if kind == "forest":
        return ForestParams(n_estimators=250, tree=TreeParams(max_depth=300, seed=seed), seed=seed)
    if kind == "gb":
        return BoostParams(seed=seed)
    if kind == "mlp":
        return MlpParams(seed=seed)
    raise ValueError(f"unknown model kind {kind!r}")


def train(kind, X, y, params=None, n_classes=None):
    params = default_params(kind) if params is None else params
    fn = {"tree": train_tree, "forest": train_forest, "gb": train_gb, "mlp": train_mlp}[kind]
    return fn(X, y, params, n_classes=n_classes)
