"""Flat ``key=value`` run configuration with typed, materialized defaults."""

from __future__ import annotations

from pathlib import Path

from .graph import FireConfig
from .learners import BoostParams, ForestParams, MlpParams, TreeParams
from .node2vec import EmbedConfig, WalkConfig
from .pipeline import ExperimentConfig
from .synth import SynthConfig


class ConfigError(ValueError):
    pass


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_int(text):
    return None if text.strip().lower() in ("", "none") else int(text)


def _float_list(text):
    items = [float(x) for x in text.split(",") if x.strip()]
    if not items:
        raise ValueError("empty list")
    return items


def _max_features(text):
    t = text.strip()
    if t in ("auto", "sqrt", "all"):
        return t
    return float(t) if "." in t else int(t)


def _choice(*options):
    def parse(text):
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    return parse


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


# key -> (parser, default); the seed has no default and must be supplied
SCHEMA = {
    "seed": (int, None),
    "synth.n_actors": (int, 1500),
    "synth.n_directors": (int, 400),
    "synth.n_casting_directors": (int, 40),
    "synth.n_writers": (int, 300),
    "synth.n_agents": (int, 40),
    "synth.n_titles": (int, 2000),
    "synth.actors_min": (int, 4),
    "synth.actors_max": (int, 10),
    "synth.w_director": (float, 0.50),
    "synth.w_casting": (float, 0.25),
    "synth.w_actor": (float, 0.15),
    "synth.w_writer": (float, 0.10),
    "synth.noise_sigma": (float, 0.45),
    "synth.popularity_exponent": (float, 1.0),
    "synth.casting_skill_shape": (float, 12.0),
    "fire.n_seed_actors": (int, 100),
    "fire.p_burn": (float, 0.7),
    "fire.node_budget": (_opt_int, None),
    "walk.walks_per_node": (int, 20),
    "walk.walk_length": (int, 40),
    "walk.p": (float, 1.0),
    "walk.q": (float, 1.0),
    "embed.dim": (int, 24),
    "embed.window": (int, 5),
    "embed.negatives": (int, 5),
    "embed.epochs": (int, 5),
    "embed.learning_rate": (float, 0.025),
    "experiment.model": (_choice("tree", "forest", "gb", "mlp"), "gb"),
    "experiment.with_sna": (_bool, True),
    "experiment.actor_mode": (_choice("mean", "concat4"), "mean"),
    "experiment.smote": (_bool, True),
    "experiment.k_neighbors": (int, 5),
    "experiment.split_ratio": (float, 0.8),
    "experiment.stratified": (_bool, True),
    "grid.p_list": (_float_list, [1.0, 2.0, 3.0, 4.0]),
    "grid.q_list": (_float_list, [1.0, 2.0, 3.0, 4.0]),
    "importance.n_repeats": (int, 10),
    "stats.betweenness_sources": (_opt_int, 200),
    "stats.sample_pairs": (int, 5000),
    "gb.depth": (int, 5),
    "gb.learning_rate": (float, 0.05),
    "gb.l2_leaf_reg": (float, 1.0),
    "gb.n_iterations": (int, 300),
    "gb.max_bins": (int, 64),
    "tree.max_depth": (int, 300),
    "tree.max_features": (_max_features, "all"),
    "tree.min_samples_leaf": (int, 1),
    "forest.n_estimators": (int, 250),
    "forest.bootstrap": (_bool, True),
    "forest.max_depth": (int, 300),
    "forest.max_features": (_max_features, "auto"),
    "forest.min_samples_leaf": (int, 1),
    "mlp.dropout_rate": (float, 0.2),
    "mlp.epochs": (int, 60),
    "mlp.learning_rate": (float, 0.01),
    "mlp.batch_size": (int, 32),
    "mlp.momentum": (float, 0.9),
}


class RunConfig:
    """Validated settings; every key of ``SCHEMA`` is present after construction."""

    def __init__(self, values: dict):
        self.values = {k: d for k, (_, d) in SCHEMA.items()}
        self.values.update(values)
        if self.values["seed"] is None:
            raise ConfigError("seed is mandatory")
        try:
            self.synth_config()
            self.fire_config()
            self.walk_config()
            self.embed_config()
            self.experiment_config()
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def __getitem__(self, key):
        return self.values[key]

    @property
    def seed(self) -> int:
        return self.values["seed"]

    def to_text(self) -> str:
        return "".join(f"{k}={_fmt(self.values[k])}\n" for k in SCHEMA)

    def synth_config(self) -> SynthConfig:
        v = self.values
        return SynthConfig(
            n_actors=v["synth.n_actors"], n_directors=v["synth.n_directors"],
            n_casting_directors=v["synth.n_casting_directors"], n_writers=v["synth.n_writers"],
            n_agents=v["synth.n_agents"], n_titles=v["synth.n_titles"],
            actors_per_title=(v["synth.actors_min"], v["synth.actors_max"]), seed=self.seed,
            w_director=v["synth.w_director"], w_casting=v["synth.w_casting"],
            w_actor=v["synth.w_actor"], w_writer=v["synth.w_writer"],
            noise_sigma=v["synth.noise_sigma"], popularity_exponent=v["synth.popularity_exponent"],
            casting_skill_shape=v["synth.casting_skill_shape"],
        )

    def fire_config(self) -> FireConfig:
        v = self.values
        return FireConfig(v["fire.n_seed_actors"], v["fire.p_burn"], v["fire.node_budget"], self.seed)

    def walk_config(self) -> WalkConfig:
        v = self.values
        return WalkConfig(v["walk.walks_per_node"], v["walk.walk_length"], v["walk.p"], v["walk.q"],
                          self.seed)

    def embed_config(self) -> EmbedConfig:
        v = self.values
        return EmbedConfig(dim=v["embed.dim"], window=v["embed.window"], negatives=v["embed.negatives"],
                           epochs=v["embed.epochs"], learning_rate=v["embed.learning_rate"],
                           seed=self.seed)

    def model_params(self, kind):
        v, s = self.values, self.seed
        if kind == "gb":
            return BoostParams(v["gb.depth"], v["gb.learning_rate"], v["gb.l2_leaf_reg"],
                               v["gb.n_iterations"], v["gb.max_bins"], s)
        if kind == "tree":
            return TreeParams(v["tree.max_depth"], v["tree.max_features"], "gini",
                              v["tree.min_samples_leaf"], s)
        if kind == "forest":
            tree = TreeParams(v["forest.max_depth"], v["forest.max_features"], "gini",
                              v["forest.min_samples_leaf"], s)
            return ForestParams(v["forest.n_estimators"], tree, v["forest.bootstrap"], s)
        if kind == "mlp":
            return MlpParams(dropout_rate=v["mlp.dropout_rate"], epochs=v["mlp.epochs"],
                             learning_rate=v["mlp.learning_rate"], batch_size=v["mlp.batch_size"],
                             momentum=v["mlp.momentum"], seed=s)
        raise ConfigError(f"unknown model kind {kind!r}")

    def experiment_config(self, model=None, with_sna=None) -> ExperimentConfig:
        v = self.values
        kind = model or v["experiment.model"]
        return ExperimentConfig(
            model=kind, params=self.model_params(kind),
            with_sna=v["experiment.with_sna"] if with_sna is None else with_sna,
            actor_mode=v["experiment.actor_mode"], smote=v["experiment.smote"],
            k_neighbors=v["experiment.k_neighbors"], split_ratio=v["experiment.split_ratio"],
            stratified=v["experiment.stratified"], seed=self.seed,
        )


def parse_assignment(line, where="") -> tuple:
    key, sep, raw = line.partition("=")
    key, raw = key.strip(), raw.strip()
    if not sep or not key:
        raise ConfigError(f"{where}expected key=value, got {line.strip()!r}")
    if key not in SCHEMA:
        raise ConfigError(f"{where}unknown key {key!r}")
    parser, _ = SCHEMA[key]
    try:
        return key, parser(raw)
    except ValueError as e:
        raise ConfigError(f"{where}bad value for {key}: {e}") from None


def parse_config(text, source="config") -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment, blank lines are skipped."""
    values = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, value = parse_assignment(line, f"{source} line {n}: ")
        values[key] = value
    return values


def load_config(path=None, overrides=(), seed=None) -> RunConfig:
    """Merge a config file, ``key=value`` overrides and an explicit seed (later wins)."""
    values = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"no such file: {path}")
        values.update(parse_config(p.read_text(encoding="utf-8"), str(path)))
    for item in overrides:
        key, value = parse_assignment(item, "--set: ")
        values[key] = value
    if seed is not None:
        values["seed"] = seed
    return RunConfig(values)
