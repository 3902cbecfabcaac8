import json
import math

import numpy as np
import pytest

from pull.bench import format_bench_csv, linear_fit_r2, subsample_edges
from pull.cli import main
from pull.data import format_edges, format_features, gen_sbm, read_edges, read_features
from pull.errors import ArgumentError, ValidationError
from pull.experiment import MetricsReport, RunConfig
from pull.splitter import Split


def test_edge_and_feature_round_trip(tmp_path):
    g, x = gen_sbm(20, 2, 0.5, 0.05, 4, seed=0)
    (tmp_path / "e.txt").write_text(format_edges(g.edges))
    (tmp_path / "x.txt").write_text(format_features(x))
    g2 = read_edges(tmp_path / "e.txt", num_nodes=20)
    assert np.array_equal(g2.edges, g.edges)
    assert np.array_equal(read_features(tmp_path / "x.txt"), x)


@pytest.mark.parametrize("text", ["0 1\n1 1\n", "0 1\n1 0\n", "0 x\n", "0 1 2\n", "-1 2\n"])
def test_bad_edge_files(tmp_path, text):
    (tmp_path / "e.txt").write_text(text)
    with pytest.raises(ValueError):
        read_edges(tmp_path / "e.txt")


def test_gen_sbm_two_triangles():
    g, x = gen_sbm(6, 2, 1.0, 0.0, 2, seed=0)
    assert g.edges.tolist() == [[0, 1], [0, 2], [1, 2], [3, 4], [3, 5], [4, 5]]
    assert np.array_equal(x, np.repeat(np.eye(2), 3, axis=0))


def test_gen_sbm_rejects_bad_probabilities():
    with pytest.raises(ArgumentError):
        gen_sbm(10, 2, 0.3, 0.3, 4, 0)
    with pytest.raises(ArgumentError):
        gen_sbm(10, 2, 0.3, 0.4, 4, 0)


def test_gen_sbm_edge_count_within_4_sigma():
    within = 3 * 100 * 99 // 2
    cross = 3 * 100 * 100
    mean = within * 0.1 + cross * 0.005
    sd = math.sqrt(within * 0.1 * 0.9 + cross * 0.005 * 0.995)
    for seed in range(5):
        g, _ = gen_sbm(300, 3, 0.1, 0.005, 16, seed)
        assert abs(g.num_edges - mean) < 4 * sd
    a, xa = gen_sbm(300, 3, 0.1, 0.005, 16, 7)
    b, xb = gen_sbm(300, 3, 0.1, 0.005, 16, 7)
    assert np.array_equal(a.edges, b.edges) and np.array_equal(xa, xb)


def test_subsample_and_r2():
    g, _ = gen_sbm(50, 2, 0.4, 0.05, 2, 0)
    for p in (0.25, 0.5, 1.0):
        assert subsample_edges(g, p, 0).num_edges == math.floor(p * g.num_edges)
    assert linear_fit_r2([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert math.isnan(linear_fit_r2([5], [1.0]))
    text = format_bench_csv([{"portion": 1.0, "edges": 10, "seconds": 0.5}])
    assert text.splitlines()[-1] == "# r2,NA"


def test_metrics_report_round_trip():
    r = MetricsReport("pull", 3, 0.1, 0.91, 0.88, [0.5, 0.7000000000000001], 1.25, {"a": 1},
                      0.9, 0.87)
    assert MetricsReport.from_json(r.to_json()) == r
    assert list(json.loads(r.to_json())) == sorted(json.loads(r.to_json()))


def test_run_config_schema(tmp_path):
    base = {"method": "pull", "edges": "e", "features": "x", "output_dir": "o"}
    rc = RunConfig.from_dict(dict(base, max_outer=2), tmp_path)
    assert rc.train.max_outer == 2 and rc.edges == str(tmp_path / "e")
    assert RunConfig.from_dict(dict(base, method="pull-no-lc")).train.ablate_lc
    for bad in (dict(base, bogus=1), {"method": "pull"}, dict(base, method="x"), dict(base, lr=-1)):
        with pytest.raises(ValidationError):
            RunConfig.from_dict(bad)


# CLI


def write_sbm(tmp_path, nodes=60, seed=0):
    g, x = gen_sbm(nodes, 3, 0.3, 0.02, 6, seed)
    (tmp_path / "e.txt").write_text(format_edges(g.edges))
    (tmp_path / "x.txt").write_text(format_features(x))
    return g


def test_cli_split_counts_on_36101_edges(tmp_path):
    rng = np.random.default_rng(0)
    n = 2277
    ids = np.sort(rng.choice(n * (n - 1) // 2, size=36101, replace=False))
    iu, ju = np.triu_indices(n, 1)
    (tmp_path / "e.txt").write_text(format_edges(np.stack([iu[ids], ju[ids]], 1)))
    assert main(["split", "--edges", str(tmp_path / "e.txt"), "--r-m", "0.1", "--r-valid", "0.1",
                 "--seed", "0", "--out", str(tmp_path / "s.json")]) == 0
    sp = Split.from_json((tmp_path / "s.json").read_text())
    assert len(sp.test_missing) == 3610 and len(sp.test_neg) == 3610


def test_cli_split_errors_and_warning(tmp_path, capsys):
    write_sbm(tmp_path)
    out = str(tmp_path / "s.json")
    assert main(["split", "--edges", str(tmp_path / "missing.txt"), "--r-m", "0.1", "--out", out]) == 2
    assert main(["split", "--edges", str(tmp_path / "e.txt"), "--r-m", "1.5", "--out", out]) == 2
    assert main(["split", "--edges", str(tmp_path / "e.txt"), "--r-m", "0", "--out", out]) == 0
    assert "warning" in capsys.readouterr().err
    assert len(Split.from_json(open(out).read()).test_missing) == 0


def test_cli_oracle_check(tmp_path):
    assert main(["oracle-check", "--trials", "5", "--out", str(tmp_path / "o.json")]) == 0
    rows = json.loads((tmp_path / "o.json").read_text())
    assert len(rows) == 15 and all(r["passed"] for r in rows)
    assert main(["oracle-check", "--trials", "3", "--perturb", "0.01"]) == 1


def test_cli_bench_bad_portions(tmp_path):
    write_sbm(tmp_path)
    assert main(["bench-scaling", "--edges", str(tmp_path / "e.txt"), "--portions", "0,1"]) == 2
    assert main(["bench-scaling", "--edges", str(tmp_path / "e.txt"), "--portions", "1.5"]) == 2


def test_cli_bench_format(tmp_path, capsys):
    write_sbm(tmp_path)
    assert main(["bench-scaling", "--edges", str(tmp_path / "e.txt"), "--features", str(tmp_path / "x.txt"),
                 "--portions", "0.25,0.5,0.75,1.0", "--outer", "1", "--inner", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "portion,edges,seconds" and len(lines) == 6 and lines[-1].startswith("# r2,")


def run_train(tmp_path, name, **extra):
    cfg = {"method": "pull", "edges": "e.txt", "features": "x.txt", "output_dir": name,
           "max_outer": 2, "inner_epochs": 5, "seed": 3}
    cfg.update(extra)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    return main(["train", "--config", str(path)])


def test_cli_train_artifacts_and_determinism(tmp_path):
    write_sbm(tmp_path)
    assert run_train(tmp_path, "a") == 0 and run_train(tmp_path, "b") == 0
    for f in ("history.csv", "checkpoint.json", "expected_graph.tsv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    header = (tmp_path / "a" / "history.csv").read_text().splitlines()[0]
    assert header == "iteration,K,num_selected,loss_le_prime,loss_lc,valid_auroc,valid_auprc"
    report = MetricsReport.from_json((tmp_path / "a" / "report.json").read_text())
    assert report.method == "pull" and 0 <= report.test_auroc <= 1


def test_cli_train_baseline_and_ablation(tmp_path):
    write_sbm(tmp_path)
    assert run_train(tmp_path, "ce", method="gcn-ce", max_epochs=20, min_epoch=5, patience=3) == 0
    assert (tmp_path / "ce" / "curve.csv").exists()
    assert run_train(tmp_path, "nolc", method="pull-no-lc") == 0
    rows = (tmp_path / "nolc" / "history.csv").read_text().splitlines()[1:]
    assert all(float(r.split(",")[4]) == 0.0 for r in rows)


def test_cli_train_bad_config(tmp_path):
    write_sbm(tmp_path)
    assert run_train(tmp_path, "bad", bogus=1) == 2
    (tmp_path / "broken.json").write_text("{not json")
    assert main(["train", "--config", str(tmp_path / "broken.json")]) == 2


def test_cli_gen_sbm(tmp_path):
    assert main(["gen-sbm", "--nodes", "6", "--blocks", "2", "--p-in", "1", "--p-out", "0", "--feature-dim", "2",
                 "--out-edges", str(tmp_path / "e.txt"), "--out-features", str(tmp_path / "x.txt")]) == 0
    assert read_edges(tmp_path / "e.txt").num_edges == 6
    assert main(["gen-sbm", "--nodes", "6", "--blocks", "2", "--p-in", "0.5", "--p-out", "0.5",
                 "--out-edges", str(tmp_path / "e.txt"), "--out-features", str(tmp_path / "x.txt")]) == 2


def test_cli_train_numeric_failure_saves_history(tmp_path, monkeypatch):
    import pull.experiment as experiment
    from pull.errors import NumericError
    from pull.trainer import HistoryRow, TrainHistory

    def boom(*args, **kwargs):
        exc = NumericError("non-finite gradient")
        exc.history = TrainHistory("pull", [HistoryRow(0, 10.0, 0, 1.5, 0.5, 0.7, 0.6)])
        raise exc

    monkeypatch.setattr(experiment, "train_pull", boom)
    write_sbm(tmp_path)
    assert run_train(tmp_path, "nan") == 3
    assert len((tmp_path / "nan" / "history.csv").read_text().splitlines()) == 2
