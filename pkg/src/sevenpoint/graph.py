"""Directed weighted graph construction and k-th order proximity.

The eight nodes are the seven checklist attributes plus the diagnosis node.
Edge weights come from label co-occurrence on the training split: internal
edges carry the conditional probability of one attribute given another,
external edges carry occurrence-total ratios between each attribute and the
diagnosis node. Higher-order relatedness is captured by proximity matrices
built from meeting paths (both nodes reach a common neighbor) and diffusion
paths (a common neighbor reaches both nodes).
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import MEL, N_ATTRIBUTES, N_NODES, NODE_NAMES
from .errors import (
    ConfigError,
    ContractError,
    InsufficientDataError,
    IsolatedNodeError,
    IsolatedNodeWarning,
)
from .validation import check_row_stochastic

TELEPORT = 0.1  # smoothing weight toward the uniform chain for the stationary vector


@dataclass
class CoOccurrenceMatrix:
    """Joint positive counts between nodes; diagonal equals per-node totals."""

    counts: np.ndarray  # (8, 8) int
    totals: np.ndarray  # (8,) int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.totals = np.asarray(self.totals, dtype=np.int64)
        if self.counts.shape != (N_NODES, N_NODES) or self.totals.shape != (N_NODES,):
            raise ContractError("co-occurrence matrix must be 8x8 with an 8-vector of totals")
        if np.any(self.counts < 0) or np.any(self.totals < 0):
            raise ContractError("co-occurrence counts must be nonnegative")
        if np.any(np.diag(self.counts) != self.totals):
            raise ContractError("co-occurrence diagonal must equal totals")
        cap = np.minimum.outer(self.totals, self.totals)
        if np.any(self.counts > cap):
            raise ContractError("counts[p][q] cannot exceed min(totals[p], totals[q])")

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.counts.tobytes())
        h.update(self.totals.tobytes())
        return h.hexdigest()


@dataclass
class DirectedWeightedGraph:
    """8x8 adjacency; entry (p, q) is the weight of the directed edge p -> q."""

    adjacency: np.ndarray
    kind: str  # internal | external | combined
    alpha: float | None = None
    beta: float | None = None
    isolated_nodes: tuple[int, ...] = ()
    clamp_count: int = 0

    def __post_init__(self):
        self.adjacency = np.asarray(self.adjacency, dtype=float)
        if self.adjacency.shape != (N_NODES, N_NODES):
            raise ContractError("adjacency must be 8x8")
        if self.kind not in ("internal", "external", "combined"):
            raise ContractError(f"unknown graph kind {self.kind!r}")
        if np.any(self.adjacency < 0) or np.any(self.adjacency > 1):
            raise ContractError("edge weights must lie in [0, 1]")
        if self.kind == "internal":
            if np.any(self.adjacency[MEL, :] != 0) or np.any(self.adjacency[:, MEL] != 0):
                raise ContractError("internal graph must not touch the MEL node")
        if self.kind == "external":
            interior = self.adjacency[:MEL, :MEL]
            if np.any(interior != 0):
                raise ContractError("external graph may only use the MEL row/column")


@dataclass
class ProximityStack:
    """Proximity matrices P^(0)..P^(K) plus the stationary vector of P^(1)."""

    matrices: list[np.ndarray]
    stationary: np.ndarray
    order: int = field(init=False)

    def __post_init__(self):
        self.matrices = [np.asarray(m, dtype=float) for m in self.matrices]
        self.stationary = np.asarray(self.stationary, dtype=float)
        self.order = len(self.matrices) - 1
        if self.order < 0:
            raise ContractError("proximity stack needs at least P^(0)")
        if not np.array_equal(self.matrices[0], np.eye(N_NODES)):
            raise ContractError("P^(0) must be the identity")
        if self.order >= 1:
            check_row_stochastic(self.matrices[1], name="P^(1)")
        for k in range(2, self.order + 1):
            m = self.matrices[k]
            if np.any(m < 0) or not np.allclose(m, m.T, atol=1e-12):
                raise ContractError(f"P^({k}) must be symmetric and nonnegative")
        if (
            self.stationary.shape != (N_NODES,)
            or np.any(self.stationary <= 0)
            or abs(float(self.stationary.sum()) - 1.0) > 1e-9
        ):
            raise ContractError("stationary vector must be positive and sum to 1")


def count_cooccurrence(labels) -> CoOccurrenceMatrix:
    """Count joint positives over (attr_labels, mel_label) pairs or an (n, 8) matrix."""
    if hasattr(labels, "label_matrix"):
        mat = labels.label_matrix()
    else:
        labels = list(labels)
        if labels and isinstance(labels[0], tuple) and len(labels[0]) == 2:
            mat = np.array([list(a) + [m] for a, m in labels], dtype=np.int64)
        else:
            mat = np.asarray(labels, dtype=np.int64)
    if mat.size == 0:
        raise InsufficientDataError("cannot count co-occurrence over an empty label list")
    if mat.ndim != 2 or mat.shape[1] != N_NODES:
        raise ContractError(f"labels must form an (n, 8) matrix, got {mat.shape}")
    if not np.all(np.isin(mat, (0, 1))):
        raise ContractError("labels must be binary")
    counts = mat.T @ mat
    return CoOccurrenceMatrix(counts=counts, totals=np.diag(counts).copy())


def build_internal_graph(q: CoOccurrenceMatrix) -> DirectedWeightedGraph:
    """Attribute-to-attribute conditional co-occurrence weights.

    For p != q with at least one joint positive, weight(p -> q) is the
    fraction of p-positive cases that are also q-positive.
    """
    a = np.zeros((N_NODES, N_NODES))
    for p in range(N_ATTRIBUTES):
        for t in range(N_ATTRIBUTES):
            if p != t and q.counts[p, t] >= 1:
                a[p, t] = q.counts[p, t] / q.totals[p]
    isolated = tuple(
        p for p in range(N_ATTRIBUTES) if not a[p, :].any() and not a[:, p].any()
    )
    if isolated:
        warnings.warn(
            f"internal graph has isolated attribute node(s): {[NODE_NAMES[i] for i in isolated]}",
            IsolatedNodeWarning,
            stacklevel=2,
        )
    return DirectedWeightedGraph(adjacency=a, kind="internal", isolated_nodes=isolated)


def build_external_graph(q: CoOccurrenceMatrix) -> DirectedWeightedGraph:
    """Attribute <-> diagnosis edges weighted by occurrence-total ratios.

    Ratios can exceed 1 (an attribute more frequent than melanoma); such
    weights are clamped to 1 and the clamp count recorded.
    """
    if q.totals[MEL] == 0:
        raise InsufficientDataError("no melanoma-positive cases; external graph undefined")
    a = np.zeros((N_NODES, N_NODES))
    clamps = 0
    for p in range(N_ATTRIBUTES):
        if q.counts[p, MEL] >= 1:
            w = q.totals[p] / q.totals[MEL]
            if w > 1.0:
                w = 1.0
                clamps += 1
            a[MEL, p] = w
        if q.counts[MEL, p] >= 1:
            w = q.totals[MEL] / q.totals[p]
            if w > 1.0:
                w = 1.0
                clamps += 1
            a[p, MEL] = w
    return DirectedWeightedGraph(adjacency=a, kind="external", clamp_count=clamps)


def combine_graphs(
    g_int: DirectedWeightedGraph,
    g_ext: DirectedWeightedGraph,
    alpha: float,
    beta: float,
) -> DirectedWeightedGraph:
    """Weighted blend alpha * internal + beta * external, clamped to [0, 1]."""
    if alpha < 0 or beta < 0:
        raise ConfigError("alpha and beta must be nonnegative")
    if alpha + beta <= 0:
        raise ConfigError("alpha + beta must be positive")
    blended = alpha * g_int.adjacency + beta * g_ext.adjacency
    clamps = int(np.count_nonzero(blended > 1.0))
    blended = np.clip(blended, 0.0, 1.0)
    np.fill_diagonal(blended, 0.0)
    return DirectedWeightedGraph(
        adjacency=blended,
        kind="combined",
        alpha=float(alpha),
        beta=float(beta),
        clamp_count=clamps,
    )


def prune_edges(
    g: DirectedWeightedGraph, min_out: int = 1, max_out: int = 3
) -> DirectedWeightedGraph:
    """Keep each node's top max_out outgoing edges by weight.

    Ties for the last kept slot go to the lower target index. Every node
    must end up with at least min_out outgoing edges, which only requires
    it to have that many candidates.
    """
    if min_out < 1 or max_out < min_out:
        raise ConfigError("need 1 <= min_out <= max_out")
    a = np.zeros_like(g.adjacency)
    for p in range(N_NODES):
        candidates = [(float(g.adjacency[p, t]), t) for t in range(N_NODES) if g.adjacency[p, t] > 0]
        if len(candidates) < min_out:
            raise IsolatedNodeError(
                f"node {NODE_NAMES[p]} has {len(candidates)} outgoing candidate(s), "
                f"needs at least {min_out}"
            )
        candidates.sort(key=lambda wt: (-wt[0], wt[1]))
        for w, t in candidates[:max_out]:
            a[p, t] = w
    return DirectedWeightedGraph(
        adjacency=a,
        kind=g.kind,
        alpha=g.alpha,
        beta=g.beta,
        isolated_nodes=g.isolated_nodes,
        clamp_count=g.clamp_count,
    )


def transition_matrix(g: DirectedWeightedGraph) -> np.ndarray:
    """Row-normalized adjacency with the zero-out-degree self-loop repair."""
    a = g.adjacency.copy()
    out = a.sum(axis=1)
    for p in np.flatnonzero(out == 0):
        a[p, p] = 1.0
    return a / a.sum(axis=1, keepdims=True)


def _intersect(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    both = (m != 0) & (n != 0)
    return np.where(both, m + n, 0.0)


def proximity_matrix(g: DirectedWeightedGraph, k: int) -> np.ndarray:
    """k-th order proximity: identity at k=0, the transition matrix at k=1,
    and for k >= 2 the averaged intersection of meeting-path and
    diffusion-path products of P^(1)."""
    if k < 0:
        raise ContractError("proximity order k must be nonnegative")
    if k == 0:
        return np.eye(N_NODES)
    p1 = transition_matrix(g)
    if k == 1:
        return p1
    fwd = np.linalg.matrix_power(p1, k - 1)
    meeting = fwd @ fwd.T
    diffusion = fwd.T @ fwd
    return _intersect(meeting, diffusion) / 2.0


def stationary_distribution(p1: np.ndarray, *, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Dominant left eigenvector of the teleport-smoothed chain.

    Smoothing mixes TELEPORT of the uniform chain into p1, which makes the
    chain ergodic so power iteration converges to a strictly positive vector.
    """
    p1 = check_row_stochastic(p1, name="P^(1)")
    smoothed = (1.0 - TELEPORT) * p1 + TELEPORT / N_NODES
    pi = np.full(N_NODES, 1.0 / N_NODES)
    for _ in range(max_iter):
        nxt = pi @ smoothed
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt
        pi = nxt
    return pi


def build_proximity_stack(g: DirectedWeightedGraph, order: int) -> ProximityStack:
    """All proximity matrices up to the given order plus the stationary vector."""
    matrices = [proximity_matrix(g, k) for k in range(order + 1)]
    p1 = matrices[1] if order >= 1 else transition_matrix(g)
    return ProximityStack(matrices=matrices, stationary=stationary_distribution(p1))


def graph_dump(
    g_int: DirectedWeightedGraph,
    g_ext: DirectedWeightedGraph,
    g_combined: DirectedWeightedGraph,
    prox: ProximityStack,
) -> dict:
    """JSON-ready description of the graph artifacts (full precision)."""
    return {
        "nodes": list(NODE_NAMES),
        "internal": g_int.adjacency.tolist(),
        "external": g_ext.adjacency.tolist(),
        "combined": g_combined.adjacency.tolist(),
        "proximity": {str(k): prox.matrices[k].tolist() for k in range(prox.order + 1)},
        "stationary": prox.stationary.tolist(),
    }


def round_significant(obj, digits: int = 12):
    """Recursively round floats to the given significant digits for emission."""
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, dict):
        return {k: round_significant(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_significant(v, digits) for v in obj]
    return obj
