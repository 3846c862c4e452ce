"""Forward pass, losses, analytic gradients, and the training loop.

The network fuses the two imaging modalities, gates them with a feature
pooled from the multi-scale digraph convolution over the attribute graph,
predicts the seven attributes with independent sigmoid heads, and then
predicts melanoma from those attribute probabilities through a learned
positive-weight average squashed by a sigmoid. Gradients are exact and
hand-derived; the optimizer is Adam with early stopping on validation
mean AUC.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .constants import EMBED_DIM, N_ATTRIBUTES, TRADITIONAL_WEIGHTS
from .dataset import CaseSet
from .embedding import NodeFeatureMatrix
from .errors import ConfigError, ContractError, NumericalError
from .graph import (
    CoOccurrenceMatrix,
    DirectedWeightedGraph,
    ProximityStack,
    build_internal_graph,
    build_external_graph,
    build_proximity_stack,
    combine_graphs,
    count_cooccurrence,
    prune_edges,
)
from . import evaluation
from .validation import check_vector

_CLAMP = 1e-12


def sigmoid(x):
    """Numerically stable logistic function."""
    return np.exp(-np.logaddexp(0.0, -np.asarray(x, dtype=float)))


def softplus(x):
    return np.logaddexp(0.0, np.asarray(x, dtype=float))


def inverse_softplus(y):
    """x such that softplus(x) == y, stable for large y."""
    y = np.asarray(y, dtype=float)
    return y + np.log1p(-np.exp(-y))


@dataclass
class Hyperparameters:
    """Training configuration; defaults follow the reference operating point."""

    delta: float = 0.4  # clinical-modality weight in the first fusion
    gamma: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    order: int = 3  # highest proximity order K
    mu: tuple[float, ...] | None = None  # focal balance per attribute; None = from train split
    tau: float = 2.0  # focal focusing parameter
    lam: float = 1.0  # weight of the melanoma loss term
    learning_rate: float = 1e-5
    max_epochs: int = 150
    patience: int = 50
    batch_size: int | None = 32
    graph_dim: int | None = None  # columns of the digraph conv output; None = feature dim
    head_epochs: int = 0  # warm-start epochs with the melanoma loss disabled (0 = fully joint)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError("delta must lie in [0, 1]")
        self.gamma = tuple(float(g) for g in self.gamma)
        if len(self.gamma) != 3 or any(g < 0 for g in self.gamma):
            raise ConfigError("gamma must be 3 nonnegative weights")
        if abs(sum(self.gamma) - 1.0) > 1e-9:
            raise ConfigError("gamma must sum to 1 within 1e-9")
        if self.order < 0:
            raise ConfigError("proximity order must be nonnegative")
        if self.mu is not None:
            self.mu = tuple(float(m) for m in self.mu)
            if len(self.mu) != N_ATTRIBUTES or any(m <= 0 for m in self.mu):
                raise ConfigError("mu must be 7 positive reals")
        if self.tau < 0:
            raise ConfigError("tau must be nonnegative")
        if self.lam < 0:
            raise ConfigError("lam must be nonnegative")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be at least 1")
        if self.patience < 0:
            raise ConfigError("patience must be nonnegative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be positive or None for full batch")
        if self.graph_dim is not None and self.graph_dim < 1:
            raise ConfigError("graph_dim must be positive")
        if self.head_epochs < 0:
            raise ConfigError("head_epochs must be nonnegative")


@dataclass
class ModelParameters:
    """Trainable state; attribute weights live pre-activation as u."""

    theta: list[np.ndarray]  # K+1 matrices, each (128, graph_dim)
    pool_proj: np.ndarray  # (graph_dim, d): pooled graph feature -> image space
    head_w: np.ndarray  # (7, d)
    head_b: np.ndarray  # (7,)
    u: np.ndarray  # (7,), attribute weights are softplus(u)

    def attribute_weights(self) -> np.ndarray:
        return softplus(self.u)

    def copy(self) -> "ModelParameters":
        return ModelParameters(
            theta=[t.copy() for t in self.theta],
            pool_proj=self.pool_proj.copy(),
            head_w=self.head_w.copy(),
            head_b=self.head_b.copy(),
            u=self.u.copy(),
        )

    def items(self):
        for k, t in enumerate(self.theta):
            yield f"theta{k}", t
        yield "pool_proj", self.pool_proj
        yield "head_w", self.head_w
        yield "head_b", self.head_b
        yield "u", self.u


Gradients = ModelParameters  # same shape, different role


def init_parameters(
    hyper: Hyperparameters, feature_dim: int, rng: np.random.Generator
) -> ModelParameters:
    """Fan-in-scaled uniform graph weights, zero heads, traditional-weight u.

    Zero heads make every initial prediction exactly sigmoid(0) = 0.5; the
    nonzero graph side keeps gradients flowing into the heads from step one.
    """
    graph_dim = hyper.graph_dim or feature_dim
    s_theta = 1.0 / np.sqrt(EMBED_DIM)
    theta = [
        rng.uniform(-s_theta, s_theta, size=(EMBED_DIM, graph_dim))
        for _ in range(hyper.order + 1)
    ]
    s_pool = 1.0 / np.sqrt(graph_dim)
    pool_proj = rng.uniform(-s_pool, s_pool, size=(graph_dim, feature_dim))
    return ModelParameters(
        theta=theta,
        pool_proj=pool_proj,
        head_w=np.zeros((N_ATTRIBUTES, feature_dim)),
        head_b=np.zeros(N_ATTRIBUTES),
        u=inverse_softplus(TRADITIONAL_WEIGHTS.copy()),
    )


@dataclass
class GraphArtifacts:
    """Everything the forward pass needs from the pre-training graph stage."""

    internal: DirectedWeightedGraph
    external: DirectedWeightedGraph
    combined: DirectedWeightedGraph  # after pruning; the operational graph
    prox: ProximityStack
    node_features: NodeFeatureMatrix
    cooccurrence_digest: str
    min_out: int = 1
    max_out: int = 3

    @property
    def alpha(self) -> float:
        return self.combined.alpha

    @property
    def beta(self) -> float:
        return self.combined.beta


def build_graph_artifacts(
    train_set: CaseSet | CoOccurrenceMatrix,
    node_features: NodeFeatureMatrix,
    alpha: float = 0.5,
    beta: float = 0.5,
    min_out: int = 1,
    max_out: int = 3,
    order: int = 3,
) -> GraphArtifacts:
    """Run the full graph stage: counts, blend, prune, proximity stack."""
    if isinstance(train_set, CoOccurrenceMatrix):
        q = train_set
    else:
        q = count_cooccurrence(train_set)
    g_int = build_internal_graph(q)
    g_ext = build_external_graph(q)
    combined = prune_edges(combine_graphs(g_int, g_ext, alpha, beta), min_out, max_out)
    prox = build_proximity_stack(combined, order)
    return GraphArtifacts(
        internal=g_int,
        external=g_ext,
        combined=combined,
        prox=prox,
        node_features=node_features,
        cooccurrence_digest=q.digest(),
        min_out=min_out,
        max_out=max_out,
    )


def fuse_modalities(xc: np.ndarray, xd: np.ndarray, delta: float) -> np.ndarray:
    """Weighted average of the clinical and dermoscopic feature vectors."""
    xc = np.asarray(xc, dtype=float)
    xd = np.asarray(xd, dtype=float)
    if xc.shape != xd.shape:
        raise ContractError(f"modality shapes differ: {xc.shape} vs {xd.shape}")
    return delta * xc + (1.0 - delta) * xd


def propagation_matrices(prox: ProximityStack) -> list[np.ndarray]:
    """Per-order propagation operators used by the digraph convolution.

    Order 0 is the identity; order 1 symmetrizes the transition matrix with
    the stationary vector; higher orders normalize P^(k) by its row sums.
    """
    mats = [np.eye(prox.matrices[0].shape[0])]
    if prox.order >= 1:
        p1 = prox.matrices[1]
        sqrt_pi = np.sqrt(prox.stationary)
        s1 = 0.5 * (
            (sqrt_pi[:, None] * p1) / sqrt_pi[None, :]
            + (p1.T * sqrt_pi[None, :]) / sqrt_pi[:, None]
        )
        mats.append(s1)
    for k in range(2, prox.order + 1):
        pk = prox.matrices[k]
        w = pk.sum(axis=1)
        w = np.where(w == 0, 1.0, w)
        inv_sqrt = 1.0 / np.sqrt(w)
        mats.append(inv_sqrt[:, None] * pk * inv_sqrt[None, :])
    return mats


def digraph_conv(
    prox: ProximityStack, x_nodes: NodeFeatureMatrix | np.ndarray, theta: Sequence[np.ndarray]
) -> np.ndarray:
    """Multi-scale digraph convolution; the per-order outputs are summed."""
    x = x_nodes.matrix if isinstance(x_nodes, NodeFeatureMatrix) else np.asarray(x_nodes, dtype=float)
    theta = [np.asarray(t, dtype=float) for t in theta]
    if len(theta) != prox.order + 1:
        raise ContractError(f"need {prox.order + 1} theta matrices, got {len(theta)}")
    for k, t in enumerate(theta):
        if t.shape[0] != x.shape[1]:
            raise ContractError(f"theta{k} has {t.shape[0]} rows, node features have {x.shape[1]} columns")
    mats = propagation_matrices(prox)
    z = np.zeros((x.shape[0], theta[0].shape[1]))
    for s, t in zip(mats, theta):
        z += s @ x @ t
    return z


def fuse_graph_image(
    xd: np.ndarray,
    xc: np.ndarray,
    xf: np.ndarray,
    z_nodes: np.ndarray,
    params: ModelParameters,
    gamma: Sequence[float],
) -> np.ndarray:
    """Gate each modality with the pooled graph feature and blend.

    The eight node rows are mean-pooled, projected into image-feature space,
    multiplied elementwise into each modality channel, and averaged with the
    gamma weights.
    """
    xd, xc, xf = (np.asarray(v, dtype=float) for v in (xd, xc, xf))
    if not xd.shape == xc.shape == xf.shape:
        raise ContractError("modality feature shapes must agree")
    pooled = np.asarray(z_nodes, dtype=float).mean(axis=0)
    if pooled.shape[0] != params.pool_proj.shape[0]:
        raise ContractError(
            f"graph feature has {pooled.shape[0]} dims, pool_proj expects {params.pool_proj.shape[0]}"
        )
    z = pooled @ params.pool_proj
    if z.shape[0] != xd.shape[-1]:
        raise ContractError(f"projected graph feature has {z.shape[0]} dims, features {xd.shape[-1]}")
    gd, gc, gf = gamma
    return gd * (xd * z) + gc * (xc * z) + gf * (xf * z)


def attribute_heads(x: np.ndarray, params: ModelParameters) -> np.ndarray:
    """Independent sigmoid head per attribute."""
    x = np.asarray(x, dtype=float)
    logits = x @ params.head_w.T + params.head_b
    return sigmoid(logits)


def melanoma_head(y7, u) -> np.ndarray | float:
    """Sigmoid of the softplus(u)-weighted average of attribute probabilities.

    The weighted average is normalized by the weight sum, so the output is
    invariant to rescaling all weights and always lies in
    [sigmoid(0), sigmoid(1)].
    """
    y7 = np.asarray(y7, dtype=float)
    w = softplus(check_vector(u, N_ATTRIBUTES, name="u"))
    avg = y7 @ w / w.sum()
    out = sigmoid(avg)
    return float(out) if np.isscalar(avg) or avg.ndim == 0 else out


def focal_loss(yhat, y, mu, tau):
    """Cross-entropy modulated toward hard examples; symmetric in the class.

    Predictions are clamped 1e-12 away from the boundary so the logs stay
    finite.
    """
    p = np.clip(np.asarray(yhat, dtype=float), _CLAMP, 1.0 - _CLAMP)
    y = np.asarray(y)
    mu = np.asarray(mu, dtype=float)
    pos = -mu * (1.0 - p) ** tau * np.log(p)
    neg = -mu * p**tau * np.log(1.0 - p)
    out = np.where(y == 1, pos, neg)
    return float(out) if out.ndim == 0 else out


def _focal_loss_grad(yhat, y, mu, tau):
    """d focal_loss / d yhat, evaluated at the clamped prediction."""
    p = np.clip(np.asarray(yhat, dtype=float), _CLAMP, 1.0 - _CLAMP)
    y = np.asarray(y)
    mu = np.asarray(mu, dtype=float)
    pos = mu * (tau * (1.0 - p) ** (tau - 1.0) * np.log(p) - (1.0 - p) ** tau / p)
    neg = mu * (p**tau / (1.0 - p) - tau * p ** (tau - 1.0) * np.log(1.0 - p))
    return np.where(y == 1, pos, neg)


def total_loss(y7hat, y7, ymhat, ym, hyper: Hyperparameters):
    """(attribute loss, melanoma loss, joint loss) per case.

    The attribute term sums the seven per-label focal losses; the melanoma
    term uses balance weight 1; the joint loss adds them with weight lam.
    """
    mu = np.asarray(hyper.mu if hyper.mu is not None else np.ones(N_ATTRIBUTES), dtype=float)
    l7 = focal_loss(y7hat, y7, mu, hyper.tau)
    l7 = np.asarray(l7).sum(axis=-1)
    lmel = focal_loss(ymhat, ym, 1.0, hyper.tau)
    total = l7 + hyper.lam * lmel
    if np.ndim(total) == 0:
        return float(l7), float(lmel), float(total)
    return l7, np.asarray(lmel), total


@dataclass
class ForwardTrace:
    """Batched intermediate values of one forward pass (row per case)."""

    x_f: np.ndarray  # (n, d) modality fusion
    z_nodes: np.ndarray  # (8, graph_dim) digraph convolution output
    z: np.ndarray  # (d,) pooled + projected graph feature
    x_fused_d: np.ndarray
    x_fused_c: np.ndarray
    x_fused_f: np.ndarray
    x: np.ndarray  # (n, d) final fused feature
    logits: np.ndarray  # (n, 7)
    y7hat: np.ndarray  # (n, 7)
    wavg: np.ndarray  # (n,) pre-sigmoid weighted attribute average
    ymhat: np.ndarray  # (n,)


def forward(
    xd: np.ndarray,
    xc: np.ndarray,
    params: ModelParameters,
    hyper: Hyperparameters,
    prox: ProximityStack,
    x_nodes: NodeFeatureMatrix | np.ndarray,
) -> ForwardTrace:
    """Full forward pass over a batch of derm/clin feature rows."""
    xd = np.atleast_2d(np.asarray(xd, dtype=float))
    xc = np.atleast_2d(np.asarray(xc, dtype=float))
    x_f = fuse_modalities(xc, xd, hyper.delta)
    z_nodes = digraph_conv(prox, x_nodes, params.theta)
    pooled = z_nodes.mean(axis=0)
    z = pooled @ params.pool_proj
    gd, gc, gf = hyper.gamma
    x_fused_d = xd * z
    x_fused_c = xc * z
    x_fused_f = x_f * z
    x = gd * x_fused_d + gc * x_fused_c + gf * x_fused_f
    logits = x @ params.head_w.T + params.head_b
    y7hat = sigmoid(logits)
    w = softplus(params.u)
    wavg = y7hat @ w / w.sum()
    ymhat = sigmoid(wavg)
    return ForwardTrace(
        x_f=x_f,
        z_nodes=z_nodes,
        z=z,
        x_fused_d=x_fused_d,
        x_fused_c=x_fused_c,
        x_fused_f=x_fused_f,
        x=x,
        logits=logits,
        y7hat=y7hat,
        wavg=wavg,
        ymhat=ymhat,
    )


def _batch_arrays(batch) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, list[str]]:
    cases = list(batch)
    if not cases:
        raise ContractError("batch must be nonempty")
    xd = np.stack([c.derm_features for c in cases])
    xc = np.stack([c.clin_features for c in cases])
    y7 = np.stack([c.attr_labels for c in cases]).astype(float)
    ym = np.array([c.mel_label for c in cases], dtype=float)
    return xd, xc, y7, ym, [c.id for c in cases]


def _loss_and_gradients(
    xd: np.ndarray,
    xc: np.ndarray,
    y7: np.ndarray,
    ym: np.ndarray,
    params: ModelParameters,
    hyper: Hyperparameters,
    prox: ProximityStack,
    x_nodes: NodeFeatureMatrix | np.ndarray,
    case_ids: list[str] | None = None,
) -> tuple[float, Gradients]:
    """Mean joint loss over the batch and its exact gradient."""
    n = xd.shape[0]
    mu = np.asarray(hyper.mu if hyper.mu is not None else np.ones(N_ATTRIBUTES), dtype=float)
    trace = forward(xd, xc, params, hyper, prox, x_nodes)

    if not np.all(np.isfinite(trace.ymhat)):
        bad = int(np.flatnonzero(~np.isfinite(trace.ymhat))[0])
        case = case_ids[bad] if case_ids else str(bad)
        raise NumericalError(f"non-finite prediction for case {case}")

    _, _, per_case = total_loss(trace.y7hat, y7, trace.ymhat, ym, hyper)
    loss = float(np.mean(per_case))

    w = softplus(params.u)
    w_sum = w.sum()
    scale = 1.0 / n

    # Backprop through the melanoma head.
    dmel_dy = _focal_loss_grad(trace.ymhat, ym, 1.0, hyper.tau)  # dL_mel/d ymhat
    d_wavg = hyper.lam * dmel_dy * trace.ymhat * (1.0 - trace.ymhat)  # (n,)

    # Attribute probabilities feed both their own loss and the melanoma head.
    d_y7 = _focal_loss_grad(trace.y7hat, y7, mu, hyper.tau)
    d_y7 = d_y7 + d_wavg[:, None] * (w / w_sum)[None, :]
    d_logits = d_y7 * trace.y7hat * (1.0 - trace.y7hat)  # (n, 7)

    grad_head_w = scale * d_logits.T @ trace.x
    grad_head_b = scale * d_logits.sum(axis=0)

    # Into the fused feature and the shared graph-side vector.
    d_x = d_logits @ params.head_w  # (n, d)
    gd, gc, gf = hyper.gamma
    x_mix = gd * xd + gc * xc + gf * trace.x_f  # x = x_mix * z elementwise
    d_z = (d_x * x_mix).sum(axis=0)  # (d,)

    pooled = trace.z_nodes.mean(axis=0)
    grad_pool_proj = scale * np.outer(pooled, d_z)
    d_pooled = params.pool_proj @ d_z  # (graph_dim,)
    d_z_nodes = np.broadcast_to(d_pooled / trace.z_nodes.shape[0], trace.z_nodes.shape)

    x_mat = x_nodes.matrix if isinstance(x_nodes, NodeFeatureMatrix) else np.asarray(x_nodes)
    mats = propagation_matrices(prox)
    grad_theta = [scale * (s @ x_mat).T @ d_z_nodes for s in mats]

    # Attribute weights: only the melanoma term sees them.
    d_w = (d_wavg[:, None] * (trace.y7hat - trace.wavg[:, None])).sum(axis=0) / w_sum
    grad_u = scale * d_w * sigmoid(params.u)

    grads = Gradients(
        theta=grad_theta,
        pool_proj=grad_pool_proj,
        head_w=grad_head_w,
        head_b=grad_head_b,
        u=grad_u,
    )
    return loss, grads


def gradients(
    batch,
    params: ModelParameters,
    hyper: Hyperparameters,
    prox: ProximityStack,
    x_nodes: NodeFeatureMatrix | np.ndarray,
) -> Gradients:
    """Exact gradient of the mean joint loss over a batch of cases."""
    xd, xc, y7, ym, ids = _batch_arrays(batch)
    _, grads = _loss_and_gradients(xd, xc, y7, ym, params, hyper, prox, x_nodes, ids)
    return grads


def batch_loss(
    batch,
    params: ModelParameters,
    hyper: Hyperparameters,
    prox: ProximityStack,
    x_nodes: NodeFeatureMatrix | np.ndarray,
) -> float:
    """Mean joint loss over a batch of cases."""
    xd, xc, y7, ym, _ = _batch_arrays(batch)
    trace = forward(xd, xc, params, hyper, prox, x_nodes)
    _, _, per_case = total_loss(trace.y7hat, y7, trace.ymhat, ym, hyper)
    return float(np.mean(per_case))


class AdamOptimizer:
    """Standard Adam with bias correction; state keyed by parameter name."""

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def step(self, params: ModelParameters, grads: Gradients) -> None:
        self.step_count += 1
        t = self.step_count
        for (name, value), (_, grad) in zip(params.items(), grads.items()):
            m = self._m.setdefault(name, np.zeros_like(value))
            v = self._v.setdefault(name, np.zeros_like(value))
            m += (1.0 - self.beta1) * (grad - m)
            v += (1.0 - self.beta2) * (grad * grad - v)
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            value -= self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps)


def default_focal_balance(train_set: CaseSet) -> tuple[float, ...]:
    """Inverse positive-class frequency per attribute, normalized to mean 1."""
    labels = train_set.label_matrix()[:, :N_ATTRIBUTES]
    n = labels.shape[0]
    rates = np.clip(labels.mean(axis=0), 0.5 / n, 1.0)
    inv = 1.0 / rates
    return tuple(inv / inv.mean())


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_mean_auc: float
    val_mel_auc: float


@dataclass
class TrainedModel:
    """Best-epoch parameters plus everything needed to reuse them."""

    params: ModelParameters
    hyper: Hyperparameters
    artifacts: GraphArtifacts
    best_epoch: int
    threshold: float  # Youden-optimal melanoma operating point from validation
    history: list[EpochRecord]
    val_metrics: dict

    def attribute_weights(self) -> np.ndarray:
        return self.params.attribute_weights()

    def predict(self, xd: np.ndarray, xc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(attribute probabilities, melanoma probability) for feature rows."""
        trace = forward(xd, xc, self.params, self.hyper, self.artifacts.prox, self.artifacts.node_features)
        return trace.y7hat, trace.ymhat


def _validation_aucs(y7hat: np.ndarray, ymhat: np.ndarray, y7: np.ndarray, ym: np.ndarray):
    """Per-label AUCs (7 attributes + melanoma); NaN where undefined."""
    aucs = np.full(N_ATTRIBUTES + 1, np.nan)
    for j in range(N_ATTRIBUTES):
        if len(np.unique(y7[:, j])) == 2:
            aucs[j] = evaluation.auc(y7hat[:, j], y7[:, j])
    if len(np.unique(ym)) == 2:
        aucs[N_ATTRIBUTES] = evaluation.auc(ymhat, ym)
    return aucs


def train(
    train_set: CaseSet,
    val_set: CaseSet,
    hyper: Hyperparameters,
    artifacts: GraphArtifacts,
) -> TrainedModel:
    """Mini-batch Adam with early stopping on validation mean AUC.

    Fully deterministic for a fixed seed: initialization and the per-epoch
    shuffles come from independent child streams of the seed, and batches
    are reduced in a fixed order.

    head_epochs > 0 trains attributes-first: the melanoma loss term is
    disabled for that many initial epochs, so the attribute weights only
    start moving once the heads have settled. Joint training as the loss
    defines it is the head_epochs = 0 default.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise ConfigError("train and validation splits must be nonempty")
    overlap = set(train_set.ids()) & set(val_set.ids())
    if overlap:
        raise ConfigError(f"train/val splits share case ids: {sorted(overlap)[:5]}")
    if train_set.feature_dim is None or val_set.feature_dim is None:
        raise ConfigError("splits must have populated features")
    if train_set.feature_dim != val_set.feature_dim:
        raise ConfigError("train and validation feature dimensions differ")

    if hyper.mu is None:
        hyper = replace(hyper, mu=default_focal_balance(train_set))

    seed_seq = np.random.SeedSequence(hyper.seed)
    init_seed, shuffle_seed = seed_seq.spawn(2)
    params = init_parameters(hyper, train_set.feature_dim, np.random.default_rng(init_seed))
    shuffle_rng = np.random.default_rng(shuffle_seed)

    xd_tr, xc_tr, y7_tr, ym_tr, ids_tr = _batch_arrays(train_set.cases)
    xd_va, xc_va, y7_va, ym_va, _ = _batch_arrays(val_set.cases)
    prox, x_nodes = artifacts.prox, artifacts.node_features

    n = len(train_set)
    batch_size = hyper.batch_size or n
    optimizer = AdamOptimizer(hyper.learning_rate)

    history: list[EpochRecord] = []
    best_mean = -np.inf
    best_epoch = 0
    best_params = params.copy()

    for epoch in range(1, hyper.max_epochs + 1):
        epoch_hyper = replace(hyper, lam=0.0) if epoch <= hyper.head_epochs else hyper
        perm = shuffle_rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, batch_size):
            idx = perm[start : start + batch_size]
            loss, grads = _loss_and_gradients(
                xd_tr[idx], xc_tr[idx], y7_tr[idx], ym_tr[idx],
                params, epoch_hyper, prox, x_nodes,
                [ids_tr[i] for i in idx],
            )
            optimizer.step(params, grads)
            loss_sum += loss * len(idx)

        val_trace = forward(xd_va, xc_va, params, hyper, prox, x_nodes)
        aucs = _validation_aucs(val_trace.y7hat, val_trace.ymhat, y7_va, ym_va)
        defined = aucs[np.isfinite(aucs)]
        if defined.size == 0:
            raise ConfigError("validation split has a single class for every label; cannot track AUC")
        mean_auc = float(defined.mean())
        history.append(
            EpochRecord(
                epoch=epoch,
                train_loss=loss_sum / n,
                val_mean_auc=mean_auc,
                val_mel_auc=float(aucs[N_ATTRIBUTES]),
            )
        )
        if mean_auc > best_mean:
            best_mean = mean_auc
            best_epoch = epoch
            best_params = params.copy()
        if epoch - best_epoch >= hyper.patience:
            break

    val_trace = forward(xd_va, xc_va, best_params, hyper, prox, x_nodes)
    aucs = _validation_aucs(val_trace.y7hat, val_trace.ymhat, y7_va, ym_va)
    if np.isfinite(aucs[N_ATTRIBUTES]):
        threshold = evaluation.youden_threshold(val_trace.ymhat, ym_va)
    else:
        threshold = float(sigmoid(0.5))  # midpoint of the head's output range
    val_metrics = {
        "mean_auc": float(aucs[np.isfinite(aucs)].mean()),
        "mel_auc": float(aucs[N_ATTRIBUTES]),
        "per_label_auc": [float(a) for a in aucs],
    }
    return TrainedModel(
        params=best_params,
        hyper=hyper,
        artifacts=artifacts,
        best_epoch=best_epoch,
        threshold=float(threshold),
        history=history,
        val_metrics=val_metrics,
    )


def score_attributes(attrs: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    """(weighted average, melanoma probability) for one attribute vector.

    Shared by the CLI and the HTTP service so both always agree.
    """
    attrs = np.asarray(attrs, dtype=float)
    weights = np.asarray(weights, dtype=float)
    wavg = float(attrs @ weights / weights.sum())
    return wavg, float(sigmoid(wavg))
