"""Canonical attribute ordering and checklist scoring constants.

Every 7-vector in this package uses the same attribute order. Index 7 is
the melanoma (diagnosis) node in all 8-node graph structures.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

# Canonical attribute order: majors are APN, BWV, IR-VS.
ATTRIBUTES = ("APN", "IR-STR", "IR-PIG", "RS", "IR-DaG", "BWV", "IR-VS")
NODE_NAMES = ATTRIBUTES + ("MEL",)

N_ATTRIBUTES = 7
N_NODES = 8
MEL = 7  # node index of the melanoma/diagnosis node

MAJOR_INDICES = (0, 5, 6)
MINOR_INDICES = (1, 2, 3, 4)

# Clinic scoring: 2 points per major attribute, 1 per minor; referral at >= 3.
TRADITIONAL_WEIGHTS = np.array([2, 1, 1, 1, 1, 2, 2], dtype=float)
REFERRAL_THRESHOLD = 3
MAX_TRADITIONAL_SCORE = 10

# Metadata CSV header, attribute columns in canonical order.
METADATA_COLUMNS = (
    "case_id",
    "pigment_network",
    "streaks",
    "pigmentation",
    "regression",
    "dots_globules",
    "bwv",
    "vascular",
    "melanoma",
)
ATTRIBUTE_COLUMNS = METADATA_COLUMNS[1:8]

# Category strings used when writing metadata CSVs; the shipped mapping file
# sends these back to the binary labels.
POSITIVE_CATEGORY = {
    "pigment_network": "atypical",
    "streaks": "irregular",
    "pigmentation": "irregular",
    "regression": "present",
    "dots_globules": "irregular",
    "bwv": "present",
    "vascular": "irregular",
}
NEGATIVE_CATEGORY = {column: "absent" for column in ATTRIBUTE_COLUMNS}

# Node feature vectors are this long regardless of the word-vector source.
EMBED_DIM = 128


def _load_data_json(name: str) -> dict:
    with resources.files("sevenpoint.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def default_label_mapping() -> dict[str, dict[str, int]]:
    """Shipped mapping from categorical attribute strings to 0/1 positivity."""
    return _load_data_json("default_mapping.json")


def default_node_tokens() -> dict[str, list[str]]:
    """Shipped word tokens used to encode each graph node name."""
    return _load_data_json("node_tokens.json")
