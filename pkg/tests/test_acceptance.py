"""Acceptance gate: one test per release criterion, each printing a
pass/fail line with its runtime. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import hashlib
import itertools
import json
import time
from fractions import Fraction

import numpy as np
import pytest

from sevenpoint.constants import MAJOR_INDICES, MINOR_INDICES, TRADITIONAL_WEIGHTS
from sevenpoint.dataset import SyntheticSpec, generate_synthetic, split
from sevenpoint.embedding import one_hot_node_features
from sevenpoint.evaluation import (
    auc,
    metrics_report,
    normalize_weights,
    roc_curve,
    traditional_roc,
    traditional_score,
)
from sevenpoint.graph import (
    DirectedWeightedGraph,
    build_external_graph,
    build_internal_graph,
    count_cooccurrence,
    proximity_matrix,
    transition_matrix,
)
from sevenpoint.model import (
    Hyperparameters,
    build_graph_artifacts,
    forward,
    inverse_softplus,
    melanoma_head,
    sigmoid,
    softplus,
    train,
)

from tests.test_graph import proximity_oracle
from tests.test_model import finite_difference_check


class _Criterion:
    """Context manager that prints one pass/fail line with the elapsed time."""

    def __init__(self, name: str, budget_seconds: float):
        self.name = name
        self.budget = budget_seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        status = "PASS" if exc_type is None else "FAIL"
        print(f"[{status}] {self.name} ({elapsed:.2f}s, budget {self.budget:.0f}s)")
        if exc_type is None:
            assert elapsed < self.budget, f"{self.name}: {elapsed:.2f}s over budget"
        return False


def test_cooccurrence_weight_oracle():
    """Internal/external edge weights equal brute-force conditional counts."""
    with _Criterion("co-occurrence weight oracle", 10.0):
        rng = np.random.default_rng(1001)
        for trial in range(50):
            n = int(rng.integers(5, 201))
            labels = (rng.random((n, 8)) < rng.uniform(0.2, 0.7, size=8)).astype(np.int64)
            labels[0] = 1  # keep every node alive so the graphs exist

            # brute-force joint counts, pure Python
            totals = [sum(int(labels[i, p]) for i in range(n)) for p in range(8)]
            joint = [
                [sum(int(labels[i, p] and labels[i, q]) for i in range(n)) for q in range(8)]
                for p in range(8)
            ]

            q = count_cooccurrence(labels)
            g_int = build_internal_graph(q)
            g_ext = build_external_graph(q)

            for p in range(7):
                for t in range(7):
                    if p != t and joint[p][t] >= 1:
                        assert g_int.adjacency[p, t] == float(Fraction(joint[p][t], totals[p]))
                    else:
                        assert g_int.adjacency[p, t] == 0.0
            for p in range(7):
                expected_out = min(1.0, float(Fraction(totals[p], totals[7]))) if joint[p][7] >= 1 else 0.0
                expected_in = min(1.0, float(Fraction(totals[7], totals[p]))) if joint[7][p] >= 1 and totals[p] else 0.0
                assert g_ext.adjacency[7, p] == expected_out
                assert g_ext.adjacency[p, 7] == expected_in

        # conditional-probability asymmetry regression: 0.42 / 0.31 pair
        rows = (
            [[1, 0, 1, 0, 0, 0, 0, 0]] * 651
            + [[1, 0, 0, 0, 0, 0, 0, 0]] * 899
            + [[0, 0, 1, 0, 0, 0, 0, 0]] * 1449
        )
        import warnings

        from sevenpoint.errors import IsolatedNodeWarning

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IsolatedNodeWarning)  # only two nodes used
            g = build_internal_graph(count_cooccurrence(np.array(rows, dtype=np.int64)))
        assert abs(g.adjacency[0, 2] - 0.42) < 1e-12
        assert abs(g.adjacency[2, 0] - 0.31) < 1e-12


def test_proximity_path_oracle():
    """P^(k) matches independent meeting/diffusion path enumeration."""
    with _Criterion("proximity path oracle", 30.0):
        rng = np.random.default_rng(2002)
        for trial in range(200):
            a = rng.random((8, 8)) * (rng.random((8, 8)) < rng.uniform(0.2, 0.8))
            np.fill_diagonal(a, 0.0)
            g = DirectedWeightedGraph(adjacency=a, kind="combined")

            assert np.array_equal(proximity_matrix(g, 0), np.eye(8))
            p1 = proximity_matrix(g, 1)
            assert np.allclose(p1.sum(axis=1), 1.0, atol=1e-12)
            for k in (2, 3):
                fast = proximity_matrix(g, k)
                slow = proximity_oracle(g, k)
                assert np.max(np.abs(fast - slow)) < 1e-12


def test_gradient_finite_differences():
    """Every analytic partial matches central differences to 1e-4 relative."""
    with _Criterion("analytic gradient vs finite differences", 120.0):
        rng = np.random.default_rng(3003)
        configs = list(itertools.product((4, 8, 16), (0, 1, 2, 3)))
        extra = [(4, 3), (8, 2), (16, 1), (4, 2), (8, 3), (16, 0), (4, 1), (8, 0)]
        worst = 0.0
        for d, order in configs + extra:
            worst = max(worst, finite_difference_check(rng, d=d, order=order))
        print(f"  gradient check: 20 configurations, worst relative error {worst:.2e}")


def test_weighted_head_algebra():
    """Scale invariance, range bounds, monotonicity, and the pinned value."""
    with _Criterion("weighted-average head algebra", 1.0):
        rng = np.random.default_rng(4004)

        u_trad = inverse_softplus(TRADITIONAL_WEIGHTS.copy())
        bwv_only = np.zeros(7)
        bwv_only[5] = 1.0
        assert melanoma_head(bwv_only, u_trad) == pytest.approx(0.549833997312478, abs=1e-12)

        for _ in range(20):
            y7 = rng.random(7)
            u = rng.normal(loc=0.4, scale=0.7, size=7)
            base = melanoma_head(y7, u)
            for c in (0.1, 3.0, 100.0):
                rescaled = inverse_softplus(c * softplus(u))
                assert abs(melanoma_head(y7, rescaled) - base) < 1e-12
            assert sigmoid(0.0) <= base <= sigmoid(1.0)
            for j in range(7):
                bumped = y7.copy()
                bumped[j] = min(1.0, bumped[j] + 0.1)
                assert melanoma_head(bumped, u) >= base
        assert melanoma_head(np.zeros(7), u_trad) == sigmoid(0.0)
        assert melanoma_head(np.ones(7), u_trad) == pytest.approx(sigmoid(1.0), abs=1e-15)


def test_traditional_scorer_exhaustive():
    """All 128 attribute vectors score 2*majors + minors with referral at 3."""
    with _Criterion("traditional integer scorer", 1.0):
        for bits in itertools.product((0, 1), repeat=7):
            score = traditional_score(list(bits))
            majors = sum(bits[i] for i in MAJOR_INDICES)
            minors = sum(bits[i] for i in MINOR_INDICES)
            assert score == 2 * majors + minors
            assert 0 <= score <= 10
        assert traditional_score([0, 0, 1, 0, 0, 1, 0]) == 3  # minimal referral mix


def test_auc_pairwise_oracle():
    """Rank-based AUC equals the O(n^2) statistic; monotone-transform invariant."""
    with _Criterion("AUC pairwise oracle", 30.0):
        rng = np.random.default_rng(5005)
        for trial in range(100):
            scores = np.round(rng.random(200), 2)  # two decimals force ties
            labels = (rng.random(200) < rng.uniform(0.2, 0.8)).astype(int)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            fast = auc(scores, labels)

            pos = scores[labels == 1]
            neg = scores[labels == 0]
            slow = (
                sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in pos for n in neg)
                / (len(pos) * len(neg))
            )
            assert abs(fast - slow) < 1e-9
            assert abs(auc(1 / (1 + np.exp(-scores)), labels) - fast) < 1e-9
            assert abs(auc(5.0 * scores - 2.0, labels) - fast) < 1e-9


# Pinned synthetic recipe for the end-to-end direction check. The three clean
# heavyweight attributes plus one reliable minor carry most of the melanoma
# signal; the three unreliable minors are where the fixed integer weighting
# loses to learned discounting.
DIRECTION_SPEC = SyntheticSpec(
    n_cases=5000,
    feature_dim=16,
    planted_weights=(18.0, 8.0, 2.0, 2.0, 2.0, 18.0, 18.0),
    attr_base_rates=(0.35, 0.35, 0.5, 0.5, 0.5, 0.35, 0.35),
    noise_sigma=1.28,
    seed=20260801,
    signature_scales=(8.0, 8.0, 2.4, 2.4, 2.4, 8.0, 8.0),
)

DIRECTION_HYPER = Hyperparameters(
    learning_rate=1e-3,
    max_epochs=120,
    patience=25,
    tau=0.0,  # plain cross-entropy keeps the attribute probabilities calibrated
    head_epochs=40,
    seed=5,
)


def test_end_to_end_synthetic_direction():
    """Training beats the fixed integer rule on planted data and recovers
    the major-over-minor weight ordering."""
    with _Criterion("end-to-end synthetic direction check", 300.0):
        cases = generate_synthetic(DIRECTION_SPEC)
        train_set, val_set, test_set = split(cases, (0.5, 0.2, 0.3), seed=7)
        artifacts = build_graph_artifacts(train_set, one_hot_node_features())
        model = train(train_set, val_set, DIRECTION_HYPER, artifacts)

        xd, xc = test_set.feature_matrices()
        labels = test_set.label_matrix()
        mel = labels[:, 7]
        trace = forward(xd, xc, model.params, model.hyper, model.artifacts.prox,
                        model.artifacts.node_features)

        learned_curve = roc_curve(trace.ymhat, mel)
        traditional_curve = traditional_roc(trace.y7hat, mel)
        weights = normalize_weights(model.attribute_weights())

        print(
            f"  held-out melanoma AUC {learned_curve.auc:.4f}, traditional "
            f"{traditional_curve.auc:.4f}, learned weights {np.round(weights, 3)}"
        )
        assert learned_curve.auc >= 0.90
        assert learned_curve.auc > traditional_curve.auc
        # planted weights put every major above every minor; so must the learned ones
        planted = np.array(DIRECTION_SPEC.planted_weights)
        assert planted[list(MAJOR_INDICES)].min() > planted[list(MINOR_INDICES)].max()
        assert weights[list(MAJOR_INDICES)].min() > weights[list(MINOR_INDICES)].max()
        # reference profile from the original clinical study, context only:
        # majors about 1.35-1.47, minors about 0.92-0.97 after normalization


def test_determinism_train_and_eval():
    """Identical config and seed give identical checkpoint bytes; worker
    count never changes metrics bytes."""
    with _Criterion("training and evaluation determinism", 120.0):
        import tempfile
        from pathlib import Path

        from sevenpoint.cli import main

        synth = {
            "n_cases": 240,
            "feature_dim": 6,
            "planted_weights": [6, 2, 2, 2, 2, 6, 6],
            "attr_base_rates": [0.4] * 7,
            "noise_sigma": 0.3,
            "seed": 17,
        }
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            digests = []
            for name in ("a", "b"):
                config = {
                    "dataset": {"synthetic": synth},
                    "split": {"fractions": [0.6, 0.2, 0.2], "seed": 3},
                    "hyperparameters": {
                        "learning_rate": 3e-3,
                        "max_epochs": 5,
                        "patience": 5,
                        "seed": 23,
                    },
                    "out": str(tmp / name),
                }
                cfg_path = tmp / f"{name}.json"
                cfg_path.write_text(json.dumps(config))
                assert main(["train", "--config", str(cfg_path)]) == 0
                digests.append(
                    hashlib.sha256((tmp / name / "checkpoint.json").read_bytes()).hexdigest()
                )
            assert digests[0] == digests[1]

        rng = np.random.default_rng(6006)
        n = 150
        y7hat = rng.random((n, 7))
        ymhat = rng.random(n)
        y7 = (rng.random((n, 7)) < 0.5).astype(int)
        ym = (rng.random(n) < 0.5).astype(int)
        serialized = [
            json.dumps(
                metrics_report(y7hat, ymhat, y7, ym, 0.6, workers=w).to_dict(),
                sort_keys=True,
            ).encode()
            for w in (1, 4)
        ]
        assert serialized[0] == serialized[1]
