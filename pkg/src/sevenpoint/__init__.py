"""Data-driven 7-point checklist melanoma scoring.

Mines a directed weighted attribute graph from label co-occurrence, runs
multi-scale digraph convolution over it, and trains an attributes-first
melanoma head with learned positive weights; ships the traditional integer
scoring rule alongside for comparison.
"""

from .constants import (
    ATTRIBUTES,
    MAJOR_INDICES,
    MINOR_INDICES,
    NODE_NAMES,
    REFERRAL_THRESHOLD,
    TRADITIONAL_WEIGHTS,
)
from .dataset import (
    Case,
    CaseSet,
    SyntheticSpec,
    generate_synthetic,
    load_features,
    parse_metadata,
    split,
)
from .embedding import EmbeddingTable, NodeFeatureMatrix, encode_all_nodes, load_embeddings, one_hot_node_features
from .estimator import ChecklistGraphClassifier
from .evaluation import (
    MetricsReport,
    RocCurve,
    WeightsComparison,
    auc,
    confusion_metrics,
    report,
    roc_curve,
    traditional_roc,
    traditional_score,
    youden_threshold,
)
from .graph import (
    CoOccurrenceMatrix,
    DirectedWeightedGraph,
    ProximityStack,
    build_external_graph,
    build_internal_graph,
    build_proximity_stack,
    combine_graphs,
    count_cooccurrence,
    proximity_matrix,
    prune_edges,
    stationary_distribution,
)
from .model import (
    GraphArtifacts,
    Hyperparameters,
    ModelParameters,
    TrainedModel,
    attribute_heads,
    build_graph_artifacts,
    digraph_conv,
    focal_loss,
    forward,
    fuse_graph_image,
    fuse_modalities,
    gradients,
    melanoma_head,
    total_loss,
    train,
)

__version__ = "0.1.0"
