"""Node-name encoding from GloVe-format word vectors.

Each of the eight graph nodes is encoded as the mean of its name tokens'
word vectors, then bridged to the fixed 128-dim node feature length by a
seeded orthonormal projection (identity when the source dimension is
already 128). Shared tokens such as "irregular" give related attribute
names overlapping encodings, which one-hot rows cannot.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import EMBED_DIM, N_NODES, NODE_NAMES, default_node_tokens
from .errors import ContractError, DuplicateWordWarning, FormatError

# Seed for the dimension-bridging projection; fixed so encodings are stable
# across runs and machines.
PROJECTION_SEED = 0x7C1


@dataclass
class EmbeddingTable:
    """Case-insensitive word -> vector lookup with a uniform dimension."""

    vectors: dict[str, np.ndarray]
    dim: int

    def __len__(self) -> int:
        return len(self.vectors)

    def lookup(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word.lower())


@dataclass
class NodeFeatureMatrix:
    """(8, 128) node feature rows in canonical node order."""

    matrix: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        if self.matrix.shape != (N_NODES, EMBED_DIM):
            raise ContractError(f"node feature matrix must be (8, {EMBED_DIM})")
        if not np.all(np.isfinite(self.matrix)):
            raise ContractError("node feature matrix contains non-finite values")

    def digest(self) -> str:
        return hashlib.sha256(self.matrix.tobytes()).hexdigest()


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Parse a GloVe-format text file: one `word v1 ... vd` record per line."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            word, values = parts[0].lower(), parts[1:]
            if not values:
                raise FormatError(f"{path.name}: line {line_no}: no vector components")
            try:
                vec = np.array([float(v) for v in values], dtype=float)
            except ValueError:
                raise FormatError(
                    f"{path.name}: line {line_no}: non-numeric vector component"
                ) from None
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise FormatError(
                    f"{path.name}: line {line_no}: dimension {vec.shape[0]} != {dim}"
                )
            if word in vectors:
                warnings.warn(
                    f"{path.name}: duplicate word {word!r} at line {line_no}; last occurrence wins",
                    DuplicateWordWarning,
                    stacklevel=2,
                )
            vectors[word] = vec
    if dim is None:
        raise FormatError(f"{path.name}: empty embedding file")
    return EmbeddingTable(vectors=vectors, dim=dim)


def _fallback_vector(token: str, dim: int) -> np.ndarray:
    """Deterministic unit vector for out-of-vocabulary tokens."""
    seed = int.from_bytes(hashlib.sha256(token.lower().encode("utf-8")).digest()[:8], "big")
    vec = np.random.default_rng(seed).normal(size=dim)
    return vec / np.linalg.norm(vec)


def projection(d_src: int, d_out: int = EMBED_DIM) -> np.ndarray:
    """Seeded (d_src, d_out) projection with orthonormal rows or columns.

    An isometry when projecting up (orthonormal rows), a contraction when
    projecting down (orthonormal columns); the identity when d_src == d_out.
    """
    if d_src == d_out:
        return np.eye(d_src)
    rng = np.random.default_rng(PROJECTION_SEED)
    if d_src < d_out:
        q, _ = np.linalg.qr(rng.normal(size=(d_out, d_src)))
        return q.T
    q, _ = np.linalg.qr(rng.normal(size=(d_src, d_out)))
    return q


def encode_node(name_tokens: list[str], table: EmbeddingTable) -> np.ndarray:
    """Mean of the tokens' vectors mapped to the 128-dim node feature space."""
    if not name_tokens:
        raise ContractError("encode_node needs at least one token")
    rows = []
    for token in name_tokens:
        vec = table.lookup(token)
        rows.append(vec if vec is not None else _fallback_vector(token, table.dim))
    mean = np.mean(rows, axis=0)
    return mean @ projection(table.dim)


def encode_all_nodes(
    table: EmbeddingTable, node_tokens: dict[str, list[str]] | None = None
) -> NodeFeatureMatrix:
    """Encode all eight node names in canonical order."""
    if node_tokens is None:
        node_tokens = default_node_tokens()
    missing = [name for name in NODE_NAMES if name not in node_tokens]
    if missing:
        raise ContractError(f"node token table missing entries for {missing}")
    rows = [encode_node(node_tokens[name], table) for name in NODE_NAMES]
    return NodeFeatureMatrix(matrix=np.stack(rows))


def one_hot_node_features() -> NodeFeatureMatrix:
    """Fallback when no word-vector file is supplied: identity rows, zero padded."""
    matrix = np.zeros((N_NODES, EMBED_DIM))
    matrix[:, :N_NODES] = np.eye(N_NODES)
    return NodeFeatureMatrix(matrix=matrix)
