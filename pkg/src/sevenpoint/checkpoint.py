"""Single-document JSON checkpoints.

The checkpoint is self-contained: besides the trained parameters it embeds
the operational graph (matrices, proximity stack, stationary vector) and
the node feature matrix, so evaluation, scoring, and the HTTP service need
no access to the training data. Floats are serialized with Python's
shortest round-trip repr, which preserves the exact double value, so
re-loading a checkpoint reproduces training-time predictions bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .embedding import NodeFeatureMatrix
from .errors import CheckpointFormatError
from .graph import DirectedWeightedGraph, ProximityStack, graph_dump
from .model import GraphArtifacts, Hyperparameters, ModelParameters, TrainedModel

FORMAT_VERSION = 1


def _hyper_to_dict(hyper: Hyperparameters) -> dict:
    return {
        "delta": hyper.delta,
        "gamma": list(hyper.gamma),
        "order": hyper.order,
        "mu": list(hyper.mu) if hyper.mu is not None else None,
        "tau": hyper.tau,
        "lam": hyper.lam,
        "learning_rate": hyper.learning_rate,
        "max_epochs": hyper.max_epochs,
        "patience": hyper.patience,
        "batch_size": hyper.batch_size,
        "graph_dim": hyper.graph_dim,
        "seed": hyper.seed,
    }


def _hyper_from_dict(data: dict) -> Hyperparameters:
    return Hyperparameters(
        delta=data["delta"],
        gamma=tuple(data["gamma"]),
        order=data["order"],
        mu=tuple(data["mu"]) if data["mu"] is not None else None,
        tau=data["tau"],
        lam=data["lam"],
        learning_rate=data["learning_rate"],
        max_epochs=data["max_epochs"],
        patience=data["patience"],
        batch_size=data["batch_size"],
        graph_dim=data["graph_dim"],
        seed=data["seed"],
    )


def model_to_document(model: TrainedModel) -> dict:
    art = model.artifacts
    return {
        "format_version": FORMAT_VERSION,
        "hyperparameters": _hyper_to_dict(model.hyper),
        "parameters": {
            "theta": [t.tolist() for t in model.params.theta],
            "pool_proj": model.params.pool_proj.tolist(),
            "head_w": model.params.head_w.tolist(),
            "head_b": model.params.head_b.tolist(),
            "u": model.params.u.tolist(),
        },
        "graph": {
            "alpha": art.alpha,
            "beta": art.beta,
            "prune": {"min_out": art.min_out, "max_out": art.max_out},
            "cooccurrence_digest": art.cooccurrence_digest,
            **graph_dump(art.internal, art.external, art.combined, art.prox),
        },
        "node_features": art.node_features.matrix.tolist(),
        "embedding_digest": art.node_features.digest(),
        "best_epoch": model.best_epoch,
        "threshold": model.threshold,
        "metrics": model.val_metrics,
    }


def save(model: TrainedModel, path: str | Path) -> None:
    path = Path(path)
    doc = model_to_document(model)
    path.write_text(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8")


def load(path: str | Path) -> TrainedModel:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointFormatError(
            f"{path.name}: invalid JSON at offset {exc.pos}: {exc.msg}"
        ) from None
    return document_to_model(doc, source=path.name)


def document_to_model(doc: dict, source: str = "checkpoint") -> TrainedModel:
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CheckpointFormatError(f"{source}: not a checkpoint document")
    if doc["format_version"] != FORMAT_VERSION:
        raise CheckpointFormatError(
            f"{source}: format version {doc['format_version']} unsupported "
            f"(expected {FORMAT_VERSION})"
        )
    try:
        params = ModelParameters(
            theta=[np.array(t, dtype=float) for t in doc["parameters"]["theta"]],
            pool_proj=np.array(doc["parameters"]["pool_proj"], dtype=float),
            head_w=np.array(doc["parameters"]["head_w"], dtype=float),
            head_b=np.array(doc["parameters"]["head_b"], dtype=float),
            u=np.array(doc["parameters"]["u"], dtype=float),
        )
        hyper = _hyper_from_dict(doc["hyperparameters"])
        g = doc["graph"]
        internal = DirectedWeightedGraph(np.array(g["internal"], dtype=float), kind="internal")
        external = DirectedWeightedGraph(np.array(g["external"], dtype=float), kind="external")
        combined = DirectedWeightedGraph(
            np.array(g["combined"], dtype=float),
            kind="combined",
            alpha=g["alpha"],
            beta=g["beta"],
        )
        order = max(int(k) for k in g["proximity"])
        prox = ProximityStack(
            matrices=[np.array(g["proximity"][str(k)], dtype=float) for k in range(order + 1)],
            stationary=np.array(g["stationary"], dtype=float),
        )
        artifacts = GraphArtifacts(
            internal=internal,
            external=external,
            combined=combined,
            prox=prox,
            node_features=NodeFeatureMatrix(np.array(doc["node_features"], dtype=float)),
            cooccurrence_digest=g["cooccurrence_digest"],
            min_out=g["prune"]["min_out"],
            max_out=g["prune"]["max_out"],
        )
        return TrainedModel(
            params=params,
            hyper=hyper,
            artifacts=artifacts,
            best_epoch=doc["best_epoch"],
            threshold=doc["threshold"],
            history=[],
            val_metrics=doc["metrics"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointFormatError(f"{source}: malformed checkpoint: {exc}") from exc
