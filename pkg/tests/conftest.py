import numpy as np
import pytest

from sevenpoint.dataset import Case, CaseSet, SyntheticSpec, generate_synthetic, split

DATA_DIR = __import__("pathlib").Path(__file__).parent / "data"


@pytest.fixture
def mini_glove_path():
    return DATA_DIR / "mini_glove.txt"


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def make_case(i, attrs, mel, derm=None, clin=None):
    return Case(
        id=f"C{i:04d}",
        attr_labels=np.array(attrs, dtype=np.int64),
        mel_label=mel,
        derm_features=derm,
        clin_features=clin,
    )


@pytest.fixture
def labeled_cases():
    """Small labeled CaseSet without features."""
    rows = [
        ([1, 0, 1, 0, 0, 1, 0], 1),
        ([0, 1, 0, 0, 1, 0, 0], 0),
        ([1, 1, 1, 0, 0, 1, 1], 1),
        ([0, 0, 0, 1, 0, 0, 0], 0),
        ([1, 0, 0, 0, 1, 1, 0], 1),
        ([0, 0, 1, 1, 0, 0, 0], 0),
    ]
    return CaseSet(cases=tuple(make_case(i, a, m) for i, (a, m) in enumerate(rows)))


@pytest.fixture(scope="session")
def small_synthetic():
    """Featureful synthetic dataset small enough for fast training tests."""
    spec = SyntheticSpec(
        n_cases=320,
        feature_dim=8,
        planted_weights=(6.0, 2.0, 2.0, 2.0, 2.0, 6.0, 6.0),
        attr_base_rates=(0.4,) * 7,
        noise_sigma=0.3,
        seed=99,
    )
    return generate_synthetic(spec)


@pytest.fixture(scope="session")
def small_splits(small_synthetic):
    return split(small_synthetic, (0.6, 0.2, 0.2), seed=13)


@pytest.fixture(scope="session")
def traditional_checkpoint_path(tmp_path_factory):
    """Checkpoint whose attribute weights are still the traditional profile."""
    from sevenpoint import checkpoint as ckpt
    from sevenpoint.embedding import one_hot_node_features
    from sevenpoint.model import Hyperparameters, TrainedModel, build_graph_artifacts, init_parameters

    spec = SyntheticSpec(
        n_cases=260,
        feature_dim=6,
        planted_weights=(6.0, 2.0, 2.0, 2.0, 2.0, 6.0, 6.0),
        attr_base_rates=(0.4,) * 7,
        noise_sigma=0.3,
        seed=31,
    )
    cases = generate_synthetic(spec)
    tr, _, _ = split(cases, (0.6, 0.2, 0.2), seed=3)
    arts = build_graph_artifacts(tr, one_hot_node_features())
    hyper = Hyperparameters(seed=11)
    params = init_parameters(hyper, tr.feature_dim, np.random.default_rng(0))
    model = TrainedModel(
        params=params,
        hyper=hyper,
        artifacts=arts,
        best_epoch=0,
        threshold=0.6,
        history=[],
        val_metrics={"mean_auc": 0.5, "mel_auc": 0.5, "per_label_auc": [0.5] * 8},
    )
    path = tmp_path_factory.mktemp("ckpt") / "traditional.json"
    ckpt.save(model, path)
    return path
