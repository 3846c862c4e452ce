"""Case ingestion, synthetic data generation, and deterministic splits.

A Case carries the seven binary checklist attributes, the melanoma label,
and one precomputed feature vector per imaging modality. Feature extraction
itself happens upstream; this module only reads the resulting files or
synthesizes desk-scale stand-ins.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .constants import (
    ATTRIBUTE_COLUMNS,
    METADATA_COLUMNS,
    N_ATTRIBUTES,
    NEGATIVE_CATEGORY,
    POSITIVE_CATEGORY,
    default_label_mapping,
)
from .errors import (
    ConfigError,
    ContractError,
    DimensionError,
    DuplicateIdError,
    IncompleteDataError,
    MappingError,
    SchemaError,
)
from .validation import check_fractions

MODALITIES = ("derm", "clin")


@dataclass
class Case:
    """One lesion: labels plus per-modality feature vectors (or None)."""

    id: str
    attr_labels: np.ndarray  # (7,) int, canonical order
    mel_label: int
    derm_features: np.ndarray | None = None
    clin_features: np.ndarray | None = None

    def __post_init__(self):
        self.attr_labels = np.asarray(self.attr_labels, dtype=np.int64)
        if self.attr_labels.shape != (N_ATTRIBUTES,):
            raise ContractError(f"case {self.id}: attr_labels must have shape (7,)")
        if not np.all(np.isin(self.attr_labels, (0, 1))):
            raise ContractError(f"case {self.id}: attr_labels must be 0/1")
        if self.mel_label not in (0, 1):
            raise ContractError(f"case {self.id}: mel_label must be 0 or 1")
        for name in ("derm_features", "clin_features"):
            vec = getattr(self, name)
            if vec is not None:
                vec = np.asarray(vec, dtype=float)
                vec.setflags(write=False)
                setattr(self, name, vec)
        self.attr_labels.setflags(write=False)

    @property
    def has_features(self) -> bool:
        return self.derm_features is not None and self.clin_features is not None


@dataclass
class CaseSet:
    """Ordered, immutable collection of cases sharing one feature dimension."""

    cases: tuple[Case, ...]
    feature_dim: int | None = None
    split_tag: str = "unsplit"

    def __post_init__(self):
        self.cases = tuple(self.cases)
        if self.split_tag not in ("train", "val", "test", "unsplit"):
            raise ContractError(f"unknown split_tag {self.split_tag!r}")
        seen = set()
        for case in self.cases:
            if case.id in seen:
                raise DuplicateIdError(f"duplicate case id {case.id!r}")
            seen.add(case.id)
        dims = {c.derm_features.shape[0] for c in self.cases if c.derm_features is not None}
        dims |= {c.clin_features.shape[0] for c in self.cases if c.clin_features is not None}
        if len(dims) > 1:
            raise DimensionError(f"cases disagree on feature dimension: {sorted(dims)}")
        if dims:
            observed = dims.pop()
            if self.feature_dim is not None and self.feature_dim != observed:
                raise DimensionError(
                    f"feature_dim={self.feature_dim} but case vectors have length {observed}"
                )
            self.feature_dim = observed

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)

    def label_matrix(self) -> np.ndarray:
        """(n, 8) int matrix: seven attribute columns then the melanoma column."""
        out = np.zeros((len(self.cases), N_ATTRIBUTES + 1), dtype=np.int64)
        for i, case in enumerate(self.cases):
            out[i, :N_ATTRIBUTES] = case.attr_labels
            out[i, N_ATTRIBUTES] = case.mel_label
        return out

    def feature_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """(derm, clin) matrices of shape (n, d); requires populated features."""
        missing = [c.id for c in self.cases if not c.has_features]
        if missing:
            raise IncompleteDataError(f"cases without features: {missing[:5]}")
        derm = np.stack([c.derm_features for c in self.cases])
        clin = np.stack([c.clin_features for c in self.cases])
        return derm, clin

    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.cases)


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a seed-deterministic synthetic dataset.

    The melanoma label for a case with attribute vector a is drawn with
    probability sigmoid(planted_weights . (a - attr_base_rates)): a weighted
    sum of the attributes centered at its expectation, so the scale of
    planted_weights controls how cleanly the attributes determine melanoma.
    """

    n_cases: int
    feature_dim: int
    planted_weights: tuple[float, ...]
    attr_base_rates: tuple[float, ...]
    noise_sigma: float
    seed: int
    signature_scales: tuple[float, ...] | None = None  # per-attribute feature SNR; None = all 1

    def __post_init__(self):
        if self.n_cases <= 0:
            raise ConfigError("n_cases must be positive")
        if self.feature_dim <= 0:
            raise ConfigError("feature_dim must be positive")
        object.__setattr__(self, "planted_weights", tuple(float(w) for w in self.planted_weights))
        object.__setattr__(self, "attr_base_rates", tuple(float(r) for r in self.attr_base_rates))
        if len(self.planted_weights) != N_ATTRIBUTES or any(w <= 0 for w in self.planted_weights):
            raise ConfigError("planted_weights must be 7 positive reals")
        if len(self.attr_base_rates) != N_ATTRIBUTES or any(
            not 0.0 < r < 1.0 for r in self.attr_base_rates
        ):
            raise ConfigError("attr_base_rates must be 7 probabilities in (0, 1)")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")
        if self.signature_scales is not None:
            object.__setattr__(
                self, "signature_scales", tuple(float(s) for s in self.signature_scales)
            )
            if len(self.signature_scales) != N_ATTRIBUTES or any(
                s <= 0 for s in self.signature_scales
            ):
                raise ConfigError("signature_scales must be 7 positive reals")


def parse_metadata(csv_path: str | Path, mapping: dict[str, dict[str, int]] | None = None) -> CaseSet:
    """Read the metadata CSV into a CaseSet with features unset.

    The mapping sends each categorical attribute string to 0/1; the shipped
    default covers the standard category vocabulary. Row order is preserved.
    """
    if mapping is None:
        mapping = default_label_mapping()
    csv_path = Path(csv_path)
    with csv_path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in METADATA_COLUMNS if col not in header]
        if missing:
            raise SchemaError(f"{csv_path.name}: missing column(s) {missing}")
        cases = []
        seen: set[str] = set()
        for row in reader:
            line_no = reader.line_num
            case_id = row["case_id"]
            if case_id in seen:
                raise DuplicateIdError(f"{csv_path.name}: duplicate case_id {case_id!r} (line {line_no})")
            seen.add(case_id)
            labels = np.zeros(N_ATTRIBUTES, dtype=np.int64)
            for j, column in enumerate(ATTRIBUTE_COLUMNS):
                raw = (row[column] or "").strip()
                column_map = mapping.get(column, {})
                value = column_map.get(raw, column_map.get(raw.lower()))
                if value is None:
                    raise MappingError(
                        f"{csv_path.name}: line {line_no}: no mapping for "
                        f"{column}={raw!r}"
                    )
                labels[j] = int(value)
            mel_raw = (row["melanoma"] or "").strip()
            mel_map = mapping.get("melanoma")
            if mel_map is not None and mel_raw in mel_map:
                mel = int(mel_map[mel_raw])
            else:
                try:
                    mel = int(mel_raw)
                except ValueError:
                    raise MappingError(
                        f"{csv_path.name}: line {line_no}: melanoma value {mel_raw!r} is not 0/1"
                    ) from None
            if mel not in (0, 1):
                raise MappingError(f"{csv_path.name}: line {line_no}: melanoma must be 0/1, got {mel}")
            cases.append(Case(id=case_id, attr_labels=labels, mel_label=mel))
    return CaseSet(cases=tuple(cases))


def write_metadata(caseset: CaseSet, csv_path: str | Path) -> None:
    """Emit a metadata CSV that parse_metadata maps back to the same labels."""
    csv_path = Path(csv_path)
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METADATA_COLUMNS)
        for case in caseset:
            row = [case.id]
            for j, column in enumerate(ATTRIBUTE_COLUMNS):
                row.append(
                    POSITIVE_CATEGORY[column] if case.attr_labels[j] else NEGATIVE_CATEGORY[column]
                )
            row.append(str(case.mel_label))
            writer.writerow(row)


def load_features(feature_path: str | Path, caseset: CaseSet) -> CaseSet:
    """Attach derm/clin feature vectors from the feature CSV to every case."""
    feature_path = Path(feature_path)
    table: dict[tuple[str, str], np.ndarray] = {}
    dim: int | None = None
    with feature_path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 3 or header[0] != "case_id" or header[1] != "modality":
            raise SchemaError(f"{feature_path.name}: expected header case_id,modality,f0,...")
        for row in reader:
            if not row:
                continue
            case_id, modality, *values = row
            if modality not in MODALITIES:
                raise SchemaError(
                    f"{feature_path.name}: modality must be one of {MODALITIES}, got {modality!r}"
                )
            vec = np.array([float(v) for v in values], dtype=float)
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DimensionError(
                    f"{feature_path.name}: case {case_id} {modality} has length "
                    f"{vec.shape[0]}, expected {dim}"
                )
            table[(case_id, modality)] = vec
    if caseset.feature_dim is not None and dim is not None and dim != caseset.feature_dim:
        raise DimensionError(
            f"{feature_path.name}: feature dimension {dim} conflicts with existing "
            f"feature_dim {caseset.feature_dim}"
        )
    populated = []
    for case in caseset:
        keys = [(case.id, m) for m in MODALITIES]
        missing = [m for (cid, m) in keys if (cid, m) not in table]
        if missing:
            raise IncompleteDataError(
                f"{feature_path.name}: case {case.id} missing {missing} row(s)"
            )
        populated.append(
            replace(case, derm_features=table[keys[0]], clin_features=table[keys[1]])
        )
    return CaseSet(cases=tuple(populated), split_tag=caseset.split_tag)


def write_features(caseset: CaseSet, feature_path: str | Path) -> None:
    """Emit the feature CSV (one derm row and one clin row per case)."""
    if caseset.feature_dim is None:
        raise IncompleteDataError("caseset has no features to write")
    feature_path = Path(feature_path)
    with feature_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["case_id", "modality"] + [f"f{i}" for i in range(caseset.feature_dim)])
        for case in caseset:
            writer.writerow([case.id, "derm"] + [repr(float(v)) for v in case.derm_features])
            writer.writerow([case.id, "clin"] + [repr(float(v)) for v in case.clin_features])


def _draw_signatures(rng: np.random.Generator, spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray]:
    sig_derm = rng.normal(size=(N_ATTRIBUTES, spec.feature_dim))
    sig_clin = rng.normal(size=(N_ATTRIBUTES, spec.feature_dim))
    sig_derm /= np.linalg.norm(sig_derm, axis=1, keepdims=True)
    sig_clin /= np.linalg.norm(sig_clin, axis=1, keepdims=True)
    if spec.signature_scales is not None:
        scales = np.array(spec.signature_scales)[:, None]
        sig_derm *= scales
        sig_clin *= scales
    return sig_derm, sig_clin


def synthetic_signatures(spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per-attribute signature directions (derm, clin), each (7, d).

    Unit rows unless signature_scales rescales them. Drawn first from the
    seeded generator, so they can be regenerated independently of the cases.
    """
    return _draw_signatures(np.random.default_rng(spec.seed), spec)


def generate_synthetic(spec: SyntheticSpec) -> CaseSet:
    """Draw a fully deterministic synthetic CaseSet from the spec.

    Features are the label-weighted sum of the modality's signature
    directions plus isotropic Gaussian noise of sd noise_sigma.
    """
    rng = np.random.default_rng(spec.seed)
    sig_derm, sig_clin = _draw_signatures(rng, spec)

    rates = np.array(spec.attr_base_rates)
    weights = np.array(spec.planted_weights)
    attrs = (rng.random((spec.n_cases, N_ATTRIBUTES)) < rates).astype(np.int64)
    score = (attrs - rates) @ weights
    p_mel = 1.0 / (1.0 + np.exp(-score))
    mel = (rng.random(spec.n_cases) < p_mel).astype(np.int64)

    # Accumulate signatures in attribute order so zero-noise features are an
    # exact, reproducible linear function of the labels.
    derm = np.zeros((spec.n_cases, spec.feature_dim))
    clin = np.zeros((spec.n_cases, spec.feature_dim))
    for j in range(N_ATTRIBUTES):
        derm += attrs[:, j : j + 1] * sig_derm[j]
        clin += attrs[:, j : j + 1] * sig_clin[j]
    derm += spec.noise_sigma * rng.normal(size=(spec.n_cases, spec.feature_dim))
    clin += spec.noise_sigma * rng.normal(size=(spec.n_cases, spec.feature_dim))

    width = max(4, len(str(spec.n_cases - 1)))
    cases = [
        Case(
            id=f"S{i:0{width}d}",
            attr_labels=attrs[i],
            mel_label=int(mel[i]),
            derm_features=derm[i],
            clin_features=clin[i],
        )
        for i in range(spec.n_cases)
    ]
    return CaseSet(cases=tuple(cases))


def split(
    caseset: CaseSet, fractions: Sequence[float], seed: int
) -> tuple[CaseSet, CaseSet, CaseSet]:
    """Deterministic disjoint train/val/test partition.

    Train and val sizes are floored (with a 1e-9 guard so exact rational
    fractions land on the intended integer); the remainder goes to test.
    """
    try:
        fractions = check_fractions(fractions)
    except ContractError as exc:
        raise ConfigError(str(exc)) from None
    n = len(caseset)
    n_train = int(np.floor(n * fractions[0] + 1e-9))
    n_val = int(np.floor(n * fractions[1] + 1e-9))
    order = np.random.default_rng(seed).permutation(n)
    groups = (order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :])
    tags = ("train", "val", "test")
    return tuple(
        CaseSet(
            cases=tuple(caseset.cases[i] for i in sorted(idx)),
            feature_dim=caseset.feature_dim,
            split_tag=tag,
        )
        for idx, tag in zip(groups, tags)
    )
