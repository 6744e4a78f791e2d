import pytest

from moviesna.cli import main

TINY = """\
# small smoke settings
seed=3
synth.n_titles=150
synth.n_actors=200
synth.n_directors=40
synth.n_casting_directors=15
synth.n_writers=30
synth.n_agents=8
fire.n_seed_actors=10
walk.walks_per_node=2
walk.walk_length=10
embed.epochs=1
gb.n_iterations=10
forest.n_estimators=5
mlp.epochs=3
grid.p_list=1,2
grid.q_list=1,2
importance.n_repeats=2
stats.betweenness_sources=none
"""


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "tiny.cfg"
    p.write_text(TINY)
    return p


def run(tmp_path, cfg, *args):
    out = tmp_path / "runs"
    code = main([*args, "--config", str(cfg), "--out", str(out)])
    dirs = sorted(out.glob(f"*_{args[0]}*")) if out.exists() else []
    return code, (dirs[-1] if dirs else None)


def test_synth_then_ingest_graph_sample_stats(tmp_path, cfg):
    code, d = run(tmp_path, cfg, "synth")
    assert code == 0
    data = d
    assert (data / "titles.csv").exists() and (data / "groundtruth.csv").exists()
    assert "status=ok" in (d / "meta.txt").read_text()
    code, d = run(tmp_path, cfg, "ingest", "--data", str(data))
    assert code == 0 and (d / "stats.csv").exists() and (d / "rating_histogram.png").exists()
    code, g = run(tmp_path, cfg, "graph", "--data", str(data))
    assert code == 0 and (g / "edges.csv").exists()
    code, d = run(tmp_path, cfg, "sample", "--data", str(data))
    assert code == 0 and (d / "class_shares.csv").exists()
    code, d = run(tmp_path, cfg, "stats", "--graph", str(g))
    assert code == 0
    for name in ("summary.csv", "stats.csv", "top_nodes.csv", "degree_ccdf.png"):
        assert (d / name).exists()


def test_embed_train_report(tmp_path, cfg, capsys):
    code, e = run(tmp_path, cfg, "embed")
    assert code == 0 and (e / "embeddings.csv").exists()
    code, t = run(tmp_path, cfg, "train", "--embeddings", str(e / "embeddings.csv"))
    assert code == 0
    for name in ("report.csv", "report.md", "importance.csv", "importance.png",
                 "confusion.png", "model.txt", "features.csv", "config.cfg"):
        assert (t / name).exists(), name
    assert "accuracy" in (t / "report.csv").read_text()
    code, r = run(tmp_path, cfg, "report", "--run", str(t))
    assert code == 0 and (r / "confusion.png").exists()
    assert (r / "report.csv").read_bytes() == (t / "report.csv").read_bytes()


def test_grid_and_compare(tmp_path, cfg):
    code, g = run(tmp_path, cfg, "grid")
    assert code == 0
    lines = (g / "report.csv").read_text().splitlines()
    assert lines[0] == "p,q,accuracy,best" and len(lines) == 5
    assert (g / "grid.png").exists()
    code, c = run(tmp_path, cfg, "compare")
    assert code == 0
    lines = (c / "report.csv").read_text().splitlines()
    assert len(lines) == 5 and (c / "compare.png").exists()
    code, r = run(tmp_path, cfg, "report", "--run", str(g))
    assert code == 0 and (r / "grid.png").exists()


def test_deterministic_reports(tmp_path, cfg):
    _, a = run(tmp_path, cfg, "train")
    _, b = run(tmp_path, cfg, "train")
    assert a != b
    for name in ("report.csv", "report.md", "importance.csv", "model.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_echo_round_trips(tmp_path, cfg):
    _, a = run(tmp_path, cfg, "synth")
    code, b = run(tmp_path, a / "config.cfg", "synth")
    assert code == 0
    assert (a / "titles.csv").read_bytes() == (b / "titles.csv").read_bytes()


def test_exit_codes(tmp_path, cfg, capsys):
    assert main(["synth", "--bogus"]) == 1
    assert main([]) == 1
    assert main(["ingest", "--data", str(tmp_path / "missing"), "--out", str(tmp_path),
                 "--seed", "1"]) == 2
    assert "titles.csv" in capsys.readouterr().err
    assert main(["synth", "--out", str(tmp_path)]) == 2
    assert main(["synth", "--seed", "1", "--set", "nope=1", "--out", str(tmp_path)]) == 2
    assert main(["synth", "--config", str(tmp_path / "none.cfg"), "--out", str(tmp_path)]) == 2
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path),
                 "--embeddings", str(tmp_path / "none.csv")]) == 2


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "grid" in capsys.readouterr().out


def test_no_smote_flag(tmp_path, cfg):
    code, d = run(tmp_path, cfg, "train", "--no-smote")
    assert code == 0
    assert "experiment.smote=false" in (d / "config.cfg").read_text()
    assert "smote_synthetic" not in (d / "report.csv").read_text()
