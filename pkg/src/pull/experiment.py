"""Run configuration, method dispatch and metric reports."""

from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import atomic_write, read_edges, read_features
from .errors import ArgumentError, NumericError, ValidationError
from .gcn import GCNParams
from .graph import Graph, WeightedGraph
from .splitter import Split, split as make_split
from .trainer import TrainConfig, TrainHistory, evaluate_checkpoint, train_baseline_gcn_ce, train_pull

METHODS = ("pull", "pull-ws", "pull-no-lc", "gcn-ce")
_TRAIN_FIELDS = {f.name for f in dataclasses.fields(TrainConfig)}


@dataclass
class RunConfig:
    method: str
    edges: str
    features: str
    output_dir: str
    split: str | None = None
    r_m: float = 0.1
    r_valid: float = 0.1
    train: TrainConfig = field(default_factory=TrainConfig)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "RunConfig":
        """Build from a flat JSON object; TrainConfig keys sit beside the run keys."""
        if not isinstance(doc, dict):
            raise ValidationError("config must be a JSON object")
        run_keys = {"method", "edges", "features", "output_dir", "split", "r_m", "r_valid"}
        unknown = set(doc) - run_keys - _TRAIN_FIELDS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        for key in ("method", "edges", "features", "output_dir"):
            if key not in doc:
                raise ValidationError(f"config is missing {key!r}")
        if doc["method"] not in METHODS:
            raise ValidationError(f"method must be one of {METHODS}")
        train_kw = {k: doc[k] for k in _TRAIN_FIELDS & set(doc)}
        if doc["method"] == "pull-no-lc":
            train_kw["ablate_lc"] = True
        elif doc["method"] == "pull-ws":
            # weighted sampling already guards against self-reinforcement, so L_C is dropped
            train_kw.setdefault("approx", "sample")
            train_kw["ablate_lc"] = True
        try:
            train = TrainConfig(**train_kw)
        except (TypeError, ArgumentError) as exc:
            raise ValidationError(f"bad training settings: {exc}") from None

        def resolve(p):
            if p is None or base_dir is None:
                return p
            p = Path(p)
            return str(p if p.is_absolute() else base_dir / p)

        return cls(method=doc["method"], edges=resolve(doc["edges"]), features=resolve(doc["features"]),
                   output_dir=resolve(doc["output_dir"]), split=resolve(doc.get("split")),
                   r_m=float(doc.get("r_m", 0.1)), r_valid=float(doc.get("r_valid", 0.1)), train=train)

    def to_dict(self) -> dict:
        doc = {k: getattr(self, k) for k in ("method", "edges", "features", "output_dir", "split", "r_m", "r_valid")}
        doc.update(dataclasses.asdict(self.train))
        return doc


@dataclass
class MetricsReport:
    method: str
    seed: int
    r_m: float
    test_auroc: float
    test_auprc: float
    valid_curve: list[float]
    seconds: float
    config: dict
    test_auroc_observed: float | None = None
    test_auprc_observed: float | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls(**json.loads(text))


@dataclass
class RunResult:
    params: GCNParams
    history: TrainHistory
    report: MetricsReport
    expected_graph: WeightedGraph | None = None


def run_method(method: str, graph: Graph, x, sp: Split, cfg: TrainConfig, config_echo: dict | None = None) -> RunResult:
    """Train ``method`` on ``sp``'s training edges and score the test pairs.

    PULL variants are scored with propagation over their final approximated
    graph; the observed-graph-propagated scores are reported alongside.
    """
    if method not in METHODS:
        raise ArgumentError(f"unknown method {method!r}")
    train_graph = sp.train_graph()
    test_pairs, test_labels = sp.eval_set("test")
    observed = WeightedGraph.from_graph(train_graph)
    t0 = time.perf_counter()
    if method == "gcn-ce":
        res = train_baseline_gcn_ce(train_graph, x, sp, cfg)
        params, history, g_bar = res.params, res.history, None
        curve = history.epoch_valid_auroc
    else:
        res = train_pull(train_graph, x, sp, cfg)
        params, history, g_bar = res.params, res.history, res.expected_graph
        curve = [r.valid_auroc for r in history.rows]
    seconds = time.perf_counter() - t0

    nan = math.nan
    test = obs = {"auroc": nan, "auprc": nan}
    if len(test_pairs) and 0 < test_labels.sum() < len(test_labels):
        obs = evaluate_checkpoint(params, x, observed, test_pairs, test_labels)
        test = evaluate_checkpoint(params, x, g_bar, test_pairs, test_labels) if g_bar is not None else obs
    report = MetricsReport(
        method=method, seed=cfg.seed, r_m=sp.r_m,
        test_auroc=test["auroc"], test_auprc=test["auprc"],
        valid_curve=[float(v) for v in curve], seconds=seconds,
        config=config_echo if config_echo is not None else dataclasses.asdict(cfg),
        test_auroc_observed=obs["auroc"] if g_bar is not None else None,
        test_auprc_observed=obs["auprc"] if g_bar is not None else None,
    )
    return RunResult(params, history, report, g_bar)


def load_inputs(rc: RunConfig) -> tuple[Graph, np.ndarray, Split]:
    x = read_features(rc.features)
    graph = read_edges(rc.edges, num_nodes=x.shape[0])
    if rc.split:
        sp = Split.from_json(Path(rc.split).read_text(encoding="utf-8"))
        if sp.num_nodes != graph.num_nodes:
            raise ValidationError("split and edge file disagree on the node count")
    else:
        sp = make_split(graph, rc.r_m, rc.r_valid, rc.train.seed)
    return graph, x, sp


def write_artifacts(out_dir, result: RunResult | None, history: TrainHistory | None = None) -> None:
    out = Path(out_dir)
    history = history if history is not None else result.history
    atomic_write(out / "history.csv", history.to_csv())
    if history.epoch_losses:
        atomic_write(out / "curve.csv", history.curve_csv())
    if result is None:
        return
    atomic_write(out / "checkpoint.json", result.params.to_json())
    atomic_write(out / "report.json", result.report.to_json())
    if result.expected_graph is not None:
        atomic_write(out / "expected_graph.tsv", result.expected_graph.to_tsv())


def run_config(rc: RunConfig) -> RunResult:
    graph, x, sp = load_inputs(rc)
    try:
        result = run_method(rc.method, graph, x, sp, rc.train, rc.to_dict())
    except NumericError as exc:
        history = getattr(exc, "history", None)
        if history is not None:
            write_artifacts(rc.output_dir, None, history)
        raise
    write_artifacts(rc.output_dir, result)
    return result
