"""Command-line entry point: ``moviesna <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 data or validation error, 3 runtime failure.
Tables go to stdout, diagnostics to stderr; every artefact lands in a fresh
run directory ``<out>/<timestamp>_seed<seed>_<command>``.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .catalog import CatalogError, emit_csv, load_catalog_dir, summary_stats
from .config import ConfigError, load_config
from .features import assemble, bucket_shares
from .graph import build_graph, forest_fire_sample, read_graph
from .learners import save_model
from .netstats import ccdf_slope, hits, node_table, summarize
from .node2vec import EmbeddingTable, embed_pipeline, set_threads
from .pipeline import (
    class_share_rows, compare_models, comparison_markdown, experiment_markdown, grid_markdown,
    grid_pq, importance_rows, markdown_table, permutation_importance, run_on_dataset, write_csv,
)
from .synth import generate, planted_signal_check, write_groundtruth

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3

DECISIONS = (
    "split=stratified hold-out",
    "smote=training fold only",
    "history=titles strictly earlier than the target year",
    "imputation=training-fold mean for history, zero vector for embeddings",
    "top_k_categories=20",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _log(msg):
    print(msg, file=sys.stderr)


def print_table(header, rows, stream=None):
    stream = stream or sys.stdout
    cells = [[str(c) for c in header]] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    for r in cells:
        print("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip(), file=stream)


# --- run directory -----------------------------------------------------------------

class Run:
    def __init__(self, root, command, config):
        stamp = _dt.datetime.now().strftime("%Y%m%d-%H%M%S")
        base = Path(root) / f"{stamp}_seed{config.seed}_{command}"
        path, k = base, 1
        while path.exists():
            k += 1
            path = Path(f"{base}-{k}")
        path.mkdir(parents=True)
        self.path = path
        self.command = command
        self.config = config
        self.meta = {"command": command, "version": __version__, "timestamp": stamp,
                     "python": platform.python_version(), "numpy": np.__version__}
        self.start = time.perf_counter()
        (path / "config.cfg").write_text(config.to_text(), encoding="utf-8")

    def file(self, name):
        return self.path / name

    def finish(self):
        self.meta["wall_time_s"] = f"{time.perf_counter() - self.start:.3f}"
        lines = [f"{k}={v}" for k, v in self.meta.items()]
        lines += [f"decision.{i}={d}" for i, d in enumerate(DECISIONS, 1)]
        self.file("meta.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
        _log(f"run directory: {self.path}")


def _catalog(args, cfg, run):
    if args.data:
        cat = load_catalog_dir(args.data)
        run.meta["data"] = str(Path(args.data).resolve())
        return cat
    run.meta["data"] = "synthetic"
    cat, _ = generate(cfg.synth_config())
    return cat


def _embeddings(args, cfg, cat, run, threads):
    if getattr(args, "embeddings", None):
        return EmbeddingTable.read_csv(args.embeddings)
    graph = build_graph(cat)
    return embed_pipeline(graph, cfg.walk_config(), cfg.embed_config(), threads=threads)


# --- subcommands ---------------------------------------------------------------------

def cmd_synth(args, cfg, run):
    cat, truth = generate(cfg.synth_config())
    emit_csv(cat, run.path)
    write_groundtruth(truth, run.file("groundtruth.csv"))
    sig = planted_signal_check(cat, truth)
    rows = [(r, f"{sig.corr[r]:.6f}", f"{sig.corr_published[r]:.6f}") for r in sig.corr]
    write_csv(run.file("signal.csv"), ("role", "corr_latent", "corr_published"), rows)
    shares = bucket_shares(cat)
    share_rows = [(lab, f"{s:.6f}") for lab, s in zip(plotting.BUCKET_LABELS, shares)]
    write_csv(run.file("bucket_shares.csv"), ("bucket", "share"), share_rows)
    plotting.class_shares(plotting.BUCKET_LABELS, {"synthetic": shares}, run.file("bucket_shares.png"))
    print_table(("titles", "people", "credits"), [cat.counts()])
    print_table(("bucket", "share"), share_rows)
    print_table(("role", "corr_latent", "corr_published"), rows)


def cmd_ingest(args, cfg, run):
    cat = load_catalog_dir(args.data)
    stats = summary_stats(cat)
    rows = list(stats.rows())
    write_csv(run.file("stats.csv"), ("section", "key", "count", "value"), rows)
    run.file("stats.md").write_text(
        "# Catalog summary\n\n" + markdown_table(("section", "key", "count", "value"), rows) + "\n",
        encoding="utf-8")
    plotting.rating_histogram(stats.histogram, run.file("rating_histogram.png"))
    print_table(("titles", "people", "credits"), [cat.counts()])
    print_table(("section", "key", "count", "value"), rows)


def cmd_graph(args, cfg, run):
    cat = _catalog(args, cfg, run)
    g = build_graph(cat)
    g.write_csv(run.path)
    kinds = {}
    for n in g.nodes():
        kinds[g.kind(n)] = kinds.get(g.kind(n), 0) + 1
    rows = [("nodes", g.n_nodes), ("edges", g.n_edges)] + sorted(kinds.items())
    print_table(("item", "count"), rows)


def cmd_sample(args, cfg, run):
    cat = _catalog(args, cfg, run)
    reduced = forest_fire_sample(cat, cfg.fire_config())
    emit_csv(reduced, run.path)
    header, rows = class_share_rows(cat, reduced)
    write_csv(run.file("class_shares.csv"), header, rows)
    plotting.class_shares(plotting.BUCKET_LABELS,
                          {h: [float(r[i + 1]) for r in rows] for i, h in enumerate(header[1:])},
                          run.file("class_shares.png"))
    print_table(("catalog", "titles", "people", "credits"),
                [("full", *cat.counts()), ("reduced", *reduced.counts())])
    print_table(header, rows)


def cmd_stats(args, cfg, run):
    if args.graph:
        g = read_graph(args.graph)
    else:
        g = build_graph(_catalog(args, cfg, run))
    n_src = cfg["stats.betweenness_sources"]
    summary = summarize(g, sample_pairs=cfg["stats.sample_pairs"], seed=cfg.seed)
    srows = [(k, f"{v:.6f}" if isinstance(v, float) else v) for k, v in summary.items()]
    write_csv(run.file("summary.csv"), ("metric", "value"), srows)
    rows = node_table(g, n_sources=n_src, seed=cfg.seed, threads=args.threads)
    fmt = [(r[0], r[1], r[2], r[3], *(f"{x:.9g}" for x in r[4:])) for r in rows]
    write_csv(run.file("stats.csv"), ("node_id", "kind", "in_degree", "out_degree", "betweenness",
                                      "eigenvector", "hub", "authority"), fmt)
    hub, auth = hits(g)
    top = [("hub", n, g.kind(n), f"{v:.6f}") for n, v in hub.top(5)]
    top += [("authority", n, g.kind(n), f"{v:.6f}") for n, v in auth.top(5)]
    by_degree = sorted(g.nodes(), key=lambda n: (-g.degree(n), n))[:5]
    top += [("degree", n, g.kind(n), g.degree(n)) for n in by_degree]
    write_csv(run.file("top_nodes.csv"), ("ranking", "node_id", "kind", "score"), top)
    degs = [g.degree(n) for n in g.nodes()]
    plotting.degree_ccdf(degs, run.file("degree_ccdf.png"), slope=ccdf_slope(degs))
    run.meta["betweenness_sources"] = n_src
    print_table(("metric", "value"), srows)
    print_table(("ranking", "node_id", "kind", "score"), top)


def cmd_embed(args, cfg, run):
    cat = _catalog(args, cfg, run)
    emb = _embeddings(args, cfg, cat, run, args.threads)
    emb.write_csv(run.file("embeddings.csv"))
    print_table(("key", "value"), sorted(emb.meta.items()))


def _experiment_outputs(run, report, importance):
    write_csv(run.file("report.csv"), ("key", "value"), report.rows())
    if importance:
        write_csv(run.file("importance.csv"), ("group", "importance", "std", "rank"),
                  importance_rows(importance))
        plotting.importance_bars([r.group for r in importance], [r.importance for r in importance],
                                 run.file("importance.png"))
    run.file("report.md").write_text(experiment_markdown(report, importance), encoding="utf-8")
    plotting.confusion_heatmap(report.confusion, run.file("confusion.png"))
    save_model(report.model, run.file("model.txt"))


def cmd_train(args, cfg, run):
    cat = _catalog(args, cfg, run)
    exp = cfg.experiment_config()
    emb = _embeddings(args, cfg, cat, run, args.threads) if exp.with_sna else None
    ds = assemble(cat, emb, exp.actor_mode)
    ds.write_csv(run.path)
    report = run_on_dataset(ds, exp)
    importance = permutation_importance(report.model, report.test,
                                        n_repeats=cfg["importance.n_repeats"], seed=cfg.seed)
    _experiment_outputs(run, report, importance)
    run.meta["train_wall_time_s"] = f"{report.wall_time:.3f}"
    print_table(("metric", "value"), [("accuracy", f"{report.accuracy:.6f}"),
                                      ("n_train", report.n_train), ("n_test", report.n_test)])
    print_table(("group", "importance", "std", "rank"), importance_rows(importance))


def cmd_grid(args, cfg, run):
    cat = _catalog(args, cfg, run)
    rep = grid_pq(cat, cfg.experiment_config(with_sna=True), cfg["grid.p_list"], cfg["grid.q_list"],
                  cfg.walk_config(), cfg.embed_config(), threads=args.threads,
                  progress=lambda p, q, a: _log(f"p={p:g} q={q:g} accuracy={a:.4f}"))
    rows = rep.rows()
    write_csv(run.file("report.csv"), ("p", "q", "accuracy", "best"), rows)
    run.file("report.md").write_text(grid_markdown(rep), encoding="utf-8")
    plotting.grid_heatmap(rep.p_list, rep.q_list, rep.accuracy, run.file("grid.png"))
    print_table(("p", "q", "accuracy", "best"), rows)
    _log(f"spread={rep.spread:.4f}")


def cmd_compare(args, cfg, run):
    cat = _catalog(args, cfg, run)
    emb = _embeddings(args, cfg, cat, run, args.threads)
    params = {k: cfg.model_params(k) for k in ("tree", "forest", "gb", "mlp")}
    rep = compare_models(cat, emb, seed=cfg.seed, params=params,
                         actor_mode=cfg["experiment.actor_mode"], smote=cfg["experiment.smote"],
                         progress=lambda k, s, a: _log(f"{k} with_sna={s} accuracy={a:.4f}"))
    header = ("model", "without_sna", "with_sna", "gain")
    write_csv(run.file("report.csv"), header, rep.rows())
    run.file("report.md").write_text(
        comparison_markdown(rep) + "\n## Hyperparameters\n\n"
        + markdown_table(("key", "value"), list(rep.config.items())) + "\n", encoding="utf-8")
    plotting.comparison_bars(rep.kinds, rep.accuracy, run.file("compare.png"))
    print_table(header, rep.rows())


def _read_csv(path):
    import csv
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def cmd_report(args, cfg, run):
    """Re-render figures and markdown from the CSV reports of an earlier run."""
    src = Path(args.run)
    if not (src / "report.csv").is_file():
        raise FileNotFoundError(f"no such file: {src / 'report.csv'}")
    header, rows = _read_csv(src / "report.csv")
    if header[:2] == ["p", "q"]:
        ps = sorted({float(r[0]) for r in rows})
        qs = sorted({float(r[1]) for r in rows})
        acc = np.zeros((len(ps), len(qs)))
        for r in rows:
            acc[ps.index(float(r[0])), qs.index(float(r[1]))] = float(r[2])
        plotting.grid_heatmap(ps, qs, acc, run.file("grid.png"))
        kind = "grid"
    elif header[0] == "model":
        acc = np.array([[float(r[1]), float(r[2])] for r in rows])
        plotting.comparison_bars([r[0] for r in rows], acc, run.file("compare.png"))
        kind = "compare"
    else:
        values = dict(rows)
        cm = np.array([[int(values[f"confusion_{i}_{j}"]) for j in range(4)] for i in range(4)])
        plotting.confusion_heatmap(cm, run.file("confusion.png"))
        if (src / "importance.csv").is_file():
            _, imp = _read_csv(src / "importance.csv")
            plotting.importance_bars([r[0] for r in imp], [float(r[1]) for r in imp],
                                     run.file("importance.png"))
        kind = "experiment"
    md = f"# Report for {src.name}\n\n" + markdown_table(header, rows) + "\n"
    run.file("report.md").write_text(md, encoding="utf-8")
    write_csv(run.file("report.csv"), header, rows)
    run.meta["source_run"] = str(src.resolve())
    print_table(header, rows)
    _log(f"rendered {kind} report")


COMMANDS = {
    "synth": (cmd_synth, "generate a synthetic catalog with planted skill signal"),
    "ingest": (cmd_ingest, "validate catalog CSVs and print summary statistics"),
    "graph": (cmd_graph, "build the community graph and export nodes/edges"),
    "sample": (cmd_sample, "forest-fire reduction of a catalog"),
    "stats": (cmd_stats, "network diagnostics: centralities, HITS, clustering, paths"),
    "embed": (cmd_embed, "Node2Vec embeddings of the community graph"),
    "train": (cmd_train, "one experiment with grouped permutation importance"),
    "grid": (cmd_grid, "accuracy over the p/q grid"),
    "compare": (cmd_compare, "model families with and without graph features"),
    "report": (cmd_report, "re-render tables and figures of an earlier run"),
}


def build_parser():
    parser = _Parser(prog="moviesna", description="Collaboration-network features for rating prediction.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--out", default="runs", help="parent directory for run directories")
        p.add_argument("--threads", type=int, default=1, help="worker cap; 1 is deterministic")
        if name in ("graph", "sample", "stats", "embed", "train", "grid", "compare"):
            p.add_argument("--data", help="directory with titles.csv, people.csv, credits.csv "
                                          "(synthetic catalog from the config when omitted)")
        if name == "ingest":
            p.add_argument("--data", required=True, help="directory with the catalog CSVs")
        if name == "stats":
            p.add_argument("--graph", help="directory with nodes.csv and edges.csv")
        if name in ("train", "grid", "compare"):
            p.add_argument("--no-smote", action="store_true",
                           help="train on the unbalanced training fold (experiment.smote=false)")
        if name in ("train", "compare"):
            p.add_argument("--embeddings", help="embeddings.csv from an earlier embed run")
        if name == "report":
            p.add_argument("--run", required=True, help="earlier run directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            parser.error("--threads must be >= 1")
    except UsageError as e:
        _log(str(e))
        return EXIT_USAGE
    except SystemExit as e:       # --help / --version
        return int(e.code or 0)
    run = None
    try:
        overrides = list(args.set)
        if getattr(args, "no_smote", False):
            overrides.append("experiment.smote=false")
        cfg = load_config(args.config, overrides, args.seed)
        set_threads(args.threads)
        run = Run(args.out, args.command, cfg)
        COMMANDS[args.command][0](args, cfg, run)
        code, message = EXIT_OK, None
    except (FileNotFoundError, CatalogError, ConfigError, ValueError) as e:
        code, message = EXIT_DATA, f"error: {e}"
    except Exception as e:  # noqa: BLE001 - top-level boundary
        code, message = EXIT_RUNTIME, f"runtime failure: {type(e).__name__}: {e}"
    if message:
        _log(message)
    if run is not None:
        run.meta["status"] = "ok" if code == EXIT_OK else f"failed ({message})"
        run.finish()
    return code


if __name__ == "__main__":
    sys.exit(main())
