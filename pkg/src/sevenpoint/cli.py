"""Command-line entry points: train, eval, graph, score, serve.

Exit codes form a stable contract: 0 success, 1 runtime or numerical
failure, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import checkpoint as ckpt
from .constants import default_label_mapping
from .dataset import CaseSet, SyntheticSpec, generate_synthetic, load_features, parse_metadata, split
from .embedding import encode_all_nodes, load_embeddings, one_hot_node_features
from .errors import ConfigError, SevenPointError
from .evaluation import compare_weights, metrics_report, roc_curve, traditional_roc
from .graph import graph_dump, round_significant
from .model import Hyperparameters, build_graph_artifacts, forward, train
from .service import build_score_response

EXIT_OK = 0
EXIT_RUNTIME = 1  # runtime/numerical failures
EXIT_CONFIG = 2  # configuration/usage errors


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"config file not found: {config_path}")
    try:
        config = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON at offset {exc.pos}: {exc.msg}") from None
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    return config


def _require_path(config: dict, key: str) -> Path:
    value = config.get(key)
    if value is None:
        raise ConfigError(f"config is missing required path {key!r}")
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"{key} path does not exist: {path}")
    return path


def _load_dataset(config: dict) -> CaseSet:
    dataset_cfg = config.get("dataset")
    if not dataset_cfg:
        raise ConfigError("config needs a 'dataset' section (synthetic or metadata+features)")
    if "synthetic" in dataset_cfg:
        spec = SyntheticSpec(**dataset_cfg["synthetic"])
        return generate_synthetic(spec)
    metadata = Path(dataset_cfg.get("metadata", ""))
    features = Path(dataset_cfg.get("features", ""))
    if not dataset_cfg.get("metadata") or not metadata.exists():
        raise ConfigError(f"dataset.metadata path missing or not found: {metadata}")
    if not dataset_cfg.get("features") or not features.exists():
        raise ConfigError(f"dataset.features path missing or not found: {features}")
    mapping = None
    if dataset_cfg.get("mapping"):
        mapping_path = Path(dataset_cfg["mapping"])
        if not mapping_path.exists():
            raise ConfigError(f"dataset.mapping path not found: {mapping_path}")
        mapping = json.loads(mapping_path.read_text(encoding="utf-8"))
    else:
        mapping = default_label_mapping()
    return load_features(features, parse_metadata(metadata, mapping))


def _node_features(config: dict):
    embeddings = config.get("embeddings")
    if embeddings is not None:
        path = Path(embeddings)
        if not path.exists():
            raise ConfigError(f"embeddings path not found: {path}")
        return encode_all_nodes(load_embeddings(path))
    if not config.get("one_hot_fallback", True):
        raise ConfigError("no embeddings path given and one_hot_fallback is disabled")
    return one_hot_node_features()


def _split_dataset(config: dict, cases: CaseSet) -> tuple[CaseSet, CaseSet, CaseSet]:
    split_cfg = config.get("split", {})
    fractions = split_cfg.get("fractions", (0.5, 0.2, 0.3))
    seed = split_cfg.get("seed", 0)
    return split(cases, fractions, seed)


def _hyperparameters(config: dict, seed_override: int | None) -> Hyperparameters:
    overrides = dict(config.get("hyperparameters", {}))
    if "gamma" in overrides:
        overrides["gamma"] = tuple(overrides["gamma"])
    if overrides.get("mu") is not None:
        overrides["mu"] = tuple(overrides["mu"])
    if seed_override is not None:
        overrides["seed"] = seed_override
    try:
        return Hyperparameters(**overrides)
    except TypeError as exc:
        raise ConfigError(f"bad hyperparameters section: {exc}") from None


def _out_dir(config: dict, out_override: str | None) -> Path:
    out = out_override or config.get("out")
    if out is None:
        raise ConfigError("an output directory is required (--out or config 'out')")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")


def _write_roc_csv(path: Path, curve) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "sens", "spec"])
        for threshold, sens, spec in curve.to_rows():
            writer.writerow([repr(float(threshold)), repr(float(sens)), repr(float(spec))])


def cmd_train(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(config, args.out)
    cases = _load_dataset(config)
    train_set, val_set, _ = _split_dataset(config, cases)
    hyper = _hyperparameters(config, args.seed)
    node_features = _node_features(config)
    graph_cfg = config.get("graph", {})
    artifacts = build_graph_artifacts(
        train_set,
        node_features,
        alpha=graph_cfg.get("alpha", 0.5),
        beta=graph_cfg.get("beta", 0.5),
        min_out=graph_cfg.get("min_out", 1),
        max_out=graph_cfg.get("max_out", 3),
        order=hyper.order,
    )
    model = train(train_set, val_set, hyper, artifacts)

    ckpt.save(model, out / "checkpoint.json")
    with (out / "history.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_mean_auc", "val_mel_auc"])
        for record in model.history:
            writer.writerow(
                [record.epoch, repr(record.train_loss), repr(record.val_mean_auc), repr(record.val_mel_auc)]
            )
    art = model.artifacts
    _write_json(
        out / "graph.json",
        round_significant(graph_dump(art.internal, art.external, art.combined, art.prox), 12),
    )
    print(
        json.dumps(
            {
                "checkpoint": str(out / "checkpoint.json"),
                "best_epoch": model.best_epoch,
                "val_mean_auc": model.val_metrics["mean_auc"],
                "val_mel_auc": model.val_metrics["mel_auc"],
            }
        )
    )
    return EXIT_OK


def _subset(config: dict, cases: CaseSet) -> CaseSet:
    subset = config.get("subset", "test")
    if subset == "all":
        return cases
    train_set, val_set, test_set = _split_dataset(config, cases)
    try:
        return {"train": train_set, "val": val_set, "test": test_set}[subset]
    except KeyError:
        raise ConfigError(f"subset must be train/val/test/all, got {subset!r}") from None


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    out = _out_dir(config, args.out)
    model = ckpt.load(_require_path(config, "checkpoint"))
    cases = _subset(config, _load_dataset(config))
    if len(cases) == 0:
        raise ConfigError("selected evaluation subset is empty")
    xd, xc = cases.feature_matrices()
    labels = cases.label_matrix()
    trace = forward(xd, xc, model.params, model.hyper, model.artifacts.prox, model.artifacts.node_features)
    workers = int(config.get("workers", 1))
    metrics = metrics_report(
        trace.y7hat, trace.ymhat, labels[:, :7], labels[:, 7], model.threshold, workers=workers
    )
    _write_json(out / "metrics.json", metrics.to_dict())
    _write_json(out / "weights.json", compare_weights(model.attribute_weights()).to_dict())
    _write_roc_csv(out / "roc_learned.csv", roc_curve(trace.ymhat, labels[:, 7]))
    _write_roc_csv(out / "roc_traditional.csv", traditional_roc(trace.y7hat, labels[:, 7]))
    print(json.dumps({"metrics": str(out / "metrics.json"), "mel_auc": metrics.per_label["MEL"]["auc"]}))
    return EXIT_OK


def cmd_graph(args) -> int:
    config = _load_config(args.config)
    cases = _load_dataset(config)
    train_set, _, _ = _split_dataset(config, cases) if config.get("split") else (cases, None, None)
    graph_cfg = config.get("graph", {})
    artifacts = build_graph_artifacts(
        train_set,
        one_hot_node_features(),
        alpha=graph_cfg.get("alpha", 0.5),
        beta=graph_cfg.get("beta", 0.5),
        min_out=graph_cfg.get("min_out", 1),
        max_out=graph_cfg.get("max_out", 3),
        order=int(config.get("hyperparameters", {}).get("order", 3)),
    )
    payload = round_significant(
        graph_dump(artifacts.internal, artifacts.external, artifacts.combined, artifacts.prox), 12
    )
    if args.out:
        _write_json(Path(args.out), payload)
    else:
        print(json.dumps(payload, sort_keys=True))
    return EXIT_OK


def _parse_attrs(text: str) -> np.ndarray:
    text = text.strip()
    if "," in text:
        parts = [p.strip() for p in text.split(",")]
    else:
        parts = list(text)
    if len(parts) != 7:
        raise ConfigError(f"attrs must have exactly 7 entries, got {len(parts)}")
    try:
        values = np.array([float(p) for p in parts])
    except ValueError:
        raise ConfigError(f"attrs entries must be numbers in [0, 1]: {text!r}") from None
    if np.any(values < 0) or np.any(values > 1):
        raise ConfigError("attrs entries must lie in [0, 1]")
    return values


def cmd_score(args) -> int:
    config = _load_config(args.config)
    model = ckpt.load(_require_path(config, "checkpoint"))
    response = build_score_response(model, _parse_attrs(args.attrs))
    print(json.dumps(response))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = _load_config(args.config)
    model = ckpt.load(_require_path(config, "checkpoint"))
    port = args.port if args.port is not None else int(config.get("port", 8000))
    if not 1024 <= port <= 65535:
        raise ConfigError(f"port must lie in [1024, 65535], got {port}")
    uvicorn.run(create_app(model), host="127.0.0.1", port=port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sevenpoint",
        description="Data-driven 7-point checklist melanoma scoring",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="override the training seed")
        p.add_argument("--out", help="output directory (or file for `graph`)")
        p.add_argument("--port", type=int, help="port for `serve`")
        p.set_defaults(func=func)
        return p

    add("train", cmd_train, "train a model and write checkpoint/history/graph files")
    add("eval", cmd_eval, "evaluate a checkpoint and write metrics/ROC/weights files")
    add("graph", cmd_graph, "emit the co-occurrence graph and proximity matrices as JSON")
    score_parser = add("score", cmd_score, "score one attribute vector against a checkpoint")
    score_parser.add_argument("--attrs", required=True, help="7 values, e.g. 0000010 or 0,0.5,0,0,0,1,0")
    add("serve", cmd_serve, "serve the scoring API over HTTP")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except SevenPointError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(json.dumps({"error": "OSError", "message": str(exc)}), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
