import json

import numpy as np
import pytest

from sevenpoint.dataset import (
    CaseSet,
    SyntheticSpec,
    generate_synthetic,
    load_features,
    parse_metadata,
    split,
    synthetic_signatures,
    write_features,
    write_metadata,
)
from sevenpoint.errors import (
    ConfigError,
    DimensionError,
    DuplicateIdError,
    IncompleteDataError,
    MappingError,
    SchemaError,
)

HEADER = "case_id,pigment_network,streaks,pigmentation,regression,dots_globules,bwv,vascular,melanoma"


def write_csv(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _ordered_sum(signatures, labels):
    """Label-weighted signature sum accumulated in attribute order."""
    out = np.zeros(signatures.shape[1])
    for j, flag in enumerate(labels):
        out += flag * signatures[j]
    return out


class TestParseMetadata:
    def test_default_mapping_row(self, tmp_path):
        path = write_csv(tmp_path, "meta.csv", [
            HEADER,
            "L42,atypical,absent,irregular,absent,regular,present,absent,1",
        ])
        cases = parse_metadata(path)
        assert list(cases.cases[0].attr_labels) == [1, 0, 1, 0, 0, 1, 0]
        assert cases.cases[0].mel_label == 1
        assert cases.cases[0].id == "L42"

    def test_empty_file_with_header(self, tmp_path):
        path = write_csv(tmp_path, "meta.csv", [HEADER])
        assert len(parse_metadata(path)) == 0

    def test_all_negative_row(self, tmp_path):
        path = write_csv(tmp_path, "meta.csv", [
            HEADER,
            "L1,absent,absent,absent,absent,absent,absent,absent,0",
        ])
        cases = parse_metadata(path)
        assert list(cases.cases[0].attr_labels) == [0, 0, 0, 0, 0, 0, 0]

    def test_missing_column_names_it(self, tmp_path):
        path = write_csv(tmp_path, "meta.csv", [
            "case_id,streaks,pigmentation,regression,dots_globules,bwv,vascular,melanoma",
            "L1,absent,absent,absent,absent,absent,absent,0",
        ])
        with pytest.raises(SchemaError, match="pigment_network"):
            parse_metadata(path)

    def test_unmapped_category_reports_line(self, tmp_path):
        path = write_csv(tmp_path, "meta.csv", [
            HEADER,
            "L1,absent,absent,absent,absent,absent,absent,absent,0",
            "L2,weird,absent,absent,absent,absent,absent,absent,0",
        ])
        with pytest.raises(MappingError, match="line 3"):
            parse_metadata(path)

    def test_duplicate_case_id(self, tmp_path):
        path = write_csv(tmp_path, "meta.csv", [
            HEADER,
            "L1,absent,absent,absent,absent,absent,absent,absent,0",
            "L1,absent,absent,absent,absent,absent,absent,absent,1",
        ])
        with pytest.raises(DuplicateIdError):
            parse_metadata(path)

    def test_row_order_preserved(self, tmp_path):
        rows = [f"L{i},absent,absent,absent,absent,absent,absent,absent,0" for i in range(5)]
        path = write_csv(tmp_path, "meta.csv", [HEADER] + rows)
        assert parse_metadata(path).ids() == tuple(f"L{i}" for i in range(5))

    def test_round_trip(self, tmp_path, labeled_cases):
        path = tmp_path / "round.csv"
        write_metadata(labeled_cases, path)
        back = parse_metadata(path)
        assert back.ids() == labeled_cases.ids()
        for a, b in zip(back, labeled_cases):
            assert np.array_equal(a.attr_labels, b.attr_labels)
            assert a.mel_label == b.mel_label


class TestLoadFeatures:
    def test_direct_readback(self, tmp_path, labeled_cases):
        subset = CaseSet(cases=labeled_cases.cases[:1])
        path = write_csv(tmp_path, "features.csv", [
            "case_id,modality,f0,f1,f2,f3",
            "C0000,derm,0.1,0.2,0.3,0.4",
            "C0000,clin,0,0,0,0",
        ])
        out = load_features(path, subset)
        assert out.feature_dim == 4
        assert np.allclose(out.cases[0].derm_features, [0.1, 0.2, 0.3, 0.4])
        assert np.allclose(out.cases[0].clin_features, 0.0)

    def test_missing_modality_row(self, tmp_path, labeled_cases):
        subset = CaseSet(cases=labeled_cases.cases[:1])
        path = write_csv(tmp_path, "features.csv", [
            "case_id,modality,f0,f1,f2,f3",
            "C0000,derm,0.1,0.2,0.3,0.4",
        ])
        with pytest.raises(IncompleteDataError, match="clin"):
            load_features(path, subset)

    def test_dimension_conflict(self, tmp_path, labeled_cases):
        subset = CaseSet(cases=labeled_cases.cases[:1])
        p4 = write_csv(tmp_path, "f4.csv", [
            "case_id,modality,f0,f1,f2,f3",
            "C0000,derm,1,2,3,4",
            "C0000,clin,1,2,3,4",
        ])
        p5 = write_csv(tmp_path, "f5.csv", [
            "case_id,modality,f0,f1,f2,f3,f4",
            "C0000,derm,1,2,3,4,5",
            "C0000,clin,1,2,3,4,5",
        ])
        first = load_features(p4, subset)
        with pytest.raises(DimensionError):
            load_features(p5, first)

    def test_inconsistent_rows_within_file(self, tmp_path, labeled_cases):
        subset = CaseSet(cases=labeled_cases.cases[:1])
        path = write_csv(tmp_path, "features.csv", [
            "case_id,modality,f0,f1,f2,f3",
            "C0000,derm,1,2,3,4",
            "C0000,clin,1,2,3",
        ])
        with pytest.raises(DimensionError):
            load_features(path, subset)

    def test_feature_round_trip(self, tmp_path, small_synthetic):
        subset = CaseSet(cases=small_synthetic.cases[:10])
        meta = tmp_path / "meta.csv"
        feats = tmp_path / "feats.csv"
        write_metadata(subset, meta)
        write_features(subset, feats)
        back = load_features(feats, parse_metadata(meta))
        for a, b in zip(back, subset):
            assert np.array_equal(a.derm_features, b.derm_features)
            assert np.array_equal(a.clin_features, b.clin_features)


class TestGenerateSynthetic:
    def test_zero_noise_all_positive_is_signature_sum(self):
        spec = SyntheticSpec(
            n_cases=1,
            feature_dim=6,
            planted_weights=(1.0,) * 7,
            attr_base_rates=(0.999999,) * 7,
            noise_sigma=0.0,
            seed=4,
        )
        cases = generate_synthetic(spec)
        assert list(cases.cases[0].attr_labels) == [1] * 7
        sig_derm, sig_clin = synthetic_signatures(spec)
        assert np.array_equal(cases.cases[0].derm_features, _ordered_sum(sig_derm, [1] * 7))
        assert np.array_equal(cases.cases[0].clin_features, _ordered_sum(sig_clin, [1] * 7))

    def test_zero_noise_features_linear_in_labels(self):
        spec = SyntheticSpec(
            n_cases=50,
            feature_dim=5,
            planted_weights=(2.0,) * 7,
            attr_base_rates=(0.5,) * 7,
            noise_sigma=0.0,
            seed=8,
        )
        cases = generate_synthetic(spec)
        sig_derm, sig_clin = synthetic_signatures(spec)
        for case in cases:
            assert np.array_equal(case.derm_features, _ordered_sum(sig_derm, case.attr_labels))
            assert np.array_equal(case.clin_features, _ordered_sum(sig_clin, case.attr_labels))

    def test_determinism(self):
        spec = SyntheticSpec(
            n_cases=40,
            feature_dim=4,
            planted_weights=(1.0,) * 7,
            attr_base_rates=(0.3,) * 7,
            noise_sigma=0.5,
            seed=123,
        )
        a = generate_synthetic(spec)
        b = generate_synthetic(spec)
        assert a.ids() == b.ids()
        for ca, cb in zip(a, b):
            assert np.array_equal(ca.attr_labels, cb.attr_labels)
            assert ca.mel_label == cb.mel_label
            assert np.array_equal(ca.derm_features, cb.derm_features)
            assert np.array_equal(ca.clin_features, cb.clin_features)

    def test_base_rates_monte_carlo(self):
        spec = SyntheticSpec(
            n_cases=10_000,
            feature_dim=3,
            planted_weights=(1.0,) * 7,
            attr_base_rates=(0.5,) * 7,
            noise_sigma=0.1,
            seed=77,
        )
        cases = generate_synthetic(spec)
        rates = cases.label_matrix()[:, :7].mean(axis=0)
        assert np.all(np.abs(rates - 0.5) < 0.02)

    def test_spec_validation(self):
        with pytest.raises(ConfigError):
            SyntheticSpec(0, 4, (1.0,) * 7, (0.5,) * 7, 0.1, 1)
        with pytest.raises(ConfigError):
            SyntheticSpec(10, 4, (1.0,) * 6, (0.5,) * 7, 0.1, 1)
        with pytest.raises(ConfigError):
            SyntheticSpec(10, 4, (1.0,) * 7, (1.5,) * 7, 0.1, 1)
        with pytest.raises(ConfigError):
            SyntheticSpec(10, 4, (1.0,) * 7, (0.5,) * 7, -0.1, 1)
        with pytest.raises(ConfigError):
            SyntheticSpec(10, 4, (1.0,) * 7, (0.5,) * 7, 0.1, 1, signature_scales=(1.0,) * 6)


class TestSplit:
    def test_all_to_train(self, small_synthetic):
        tr, va, te = split(small_synthetic, (1.0, 0.0, 0.0), seed=1)
        assert len(tr) == len(small_synthetic)
        assert len(va) == 0 and len(te) == 0

    def test_reference_sized_split(self):
        from sevenpoint.dataset import Case

        cases = CaseSet(
            cases=tuple(
                Case(id=f"L{i}", attr_labels=np.zeros(7, dtype=np.int64), mel_label=0)
                for i in range(1011)
            )
        )
        tr, va, te = split(cases, (413 / 1011, 203 / 1011, 395 / 1011), seed=0)
        assert (len(tr), len(va), len(te)) == (413, 203, 395)

    def test_partition_property(self, small_synthetic):
        ids = set(small_synthetic.ids())
        for seed in range(5):
            tr, va, te = split(small_synthetic, (0.5, 0.25, 0.25), seed=seed)
            parts = [set(tr.ids()), set(va.ids()), set(te.ids())]
            assert parts[0] | parts[1] | parts[2] == ids
            assert not (parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2])

    def test_determinism(self, small_synthetic):
        a = split(small_synthetic, (0.6, 0.2, 0.2), seed=42)
        b = split(small_synthetic, (0.6, 0.2, 0.2), seed=42)
        for x, y in zip(a, b):
            assert x.ids() == y.ids()

    def test_bad_fractions(self, small_synthetic):
        with pytest.raises(ConfigError):
            split(small_synthetic, (0.5, 0.2, 0.2), seed=1)
