import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splitlab.data import (
    CSV_HEADER, N_FEATURES, CaptureSpec, ClassLabel, Component, Dataset, StandardizationParams,
    StandardScaler, SynthConfig, dataset_to_csv, default_synth_config, generate_synthetic,
    parse_dataset, standardize, unstandardize,
)
from splitlab.exceptions import ConfigError, IngestError

HEADER = ",".join(CSV_HEADER)


def _row(values, label, capture):
    return ",".join(str(v) for v in values) + f",{label},{capture}"


def test_two_row_file():
    text = "\n".join([HEADER, _row([0.1] * 10, "Botnet", "c1"), _row([0.2] * 10, "Normal", "c2")]) + "\n"
    ds = parse_dataset(text)
    assert len(ds) == 2
    assert ds.y.tolist() == [1, 0]
    assert ds.class_counts() == {"Botnet": 1, "Normal": 1}
    vec, label, capture = ds.row(1)
    assert vec.x_sp == 0.2 and label is ClassLabel.NORMAL and capture == "c2"


@pytest.mark.parametrize("bad_row, fragment", [
    (_row([0.1] * 10, "botnetX", "c"), "unknown label"),
    (_row([0.1] * 9, "Botnet", "c"), "expected 12 columns"),
    (_row(["abc"] + [0.1] * 9, "Botnet", "c"), "malformed number"),
    (_row(["nan"] + [0.1] * 9, "Botnet", "c"), "finite"),
    (_row([-1.0] + [0.1] * 9, "Botnet", "c"), ">= 0"),
])
def test_ingest_errors_name_the_line(bad_row, fragment):
    text = "\n".join([HEADER, _row([0.1] * 10, "Normal", "a"), _row([0.3] * 10, "Botnet", "a"), bad_row])
    with pytest.raises(IngestError, match=fragment) as err:
        parse_dataset(text)
    assert err.value.line == 4
    assert str(err.value).startswith("line 4:")


def test_header_is_checked():
    with pytest.raises(IngestError) as err:
        parse_dataset("a,b,c\n")
    assert err.value.line == 1
    with pytest.raises(IngestError):
        parse_dataset("")


def test_assume_normalized_rejects_values_above_one():
    text = "\n".join([HEADER, _row([0.5] * 10, "Normal", "a"), _row([1.5] + [0.5] * 9, "Botnet", "a")])
    assert parse_dataset(text).X.max() == 1.5
    with pytest.raises(IngestError, match="exceeds 1") as err:
        parse_dataset(text, assume_normalized=True)
    assert err.value.line == 3


def test_ctu19_shaped_counts(synthetic):
    ds = parse_dataset(io.StringIO(dataset_to_csv(synthetic)))
    assert len(ds) == 20866
    assert ds.class_counts() == {"Botnet": 19271, "Normal": 1595}


def test_round_trip_is_identical(synthetic):
    small = synthetic.subset(np.arange(0, len(synthetic), 97))
    again = parse_dataset(dataset_to_csv(small))
    assert again == small
    assert dataset_to_csv(again) == dataset_to_csv(small)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=10, max_size=10),
                min_size=2, max_size=20))
def test_round_trip_property(rows):
    ds = Dataset(np.array(rows), np.arange(len(rows)) % 2,
                 np.array([f"cap{i % 4}" for i in range(len(rows))], dtype=object))
    assert parse_dataset(dataset_to_csv(ds)) == ds


def _two_pass(col):
    n = len(col)
    mean = sum(col) / n
    var = sum((v - mean) ** 2 for v in col) / n
    return mean, math.sqrt(var)


def test_column_stats_match_two_pass_oracle(synthetic):
    stats = synthetic.column_stats
    for j in range(N_FEATURES):
        mean, std = _two_pass(synthetic.X[:, j].tolist())
        assert stats.mean[j] == pytest.approx(mean, rel=1e-9)
        assert stats.std[j] == pytest.approx(std, rel=1e-9)


def test_standardize_examples():
    X = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    Z = standardize(X, StandardizationParams.from_rows(X))
    np.testing.assert_allclose(Z[:, 0], [-1.2247, 0.0, 1.2247], atol=1e-4)
    assert Z[:, 1].tolist() == [0.0, 0.0, 0.0]

    already = np.array([[-1.0, 0.3], [0.5, 2.0]])
    np.testing.assert_array_equal(standardize(already, StandardizationParams.identity(2)), already)


def test_scaler_round_trip():
    X = np.random.default_rng(3).uniform(0, 4, size=(30, 4))
    scaler = StandardScaler().fit(X)
    Z = scaler.transform(X)
    np.testing.assert_allclose(Z.mean(0), 0.0, atol=1e-12)
    np.testing.assert_allclose(Z.std(0), 1.0, atol=1e-12)
    np.testing.assert_allclose(scaler.inverse_transform(Z), X, atol=1e-12)
    np.testing.assert_allclose(unstandardize(Z, scaler.params_), X, atol=1e-12)


def test_dataset_is_read_only(synthetic):
    with pytest.raises(ValueError):
        synthetic.X[0, 0] = 1.0


def test_dataset_validation():
    with pytest.raises(ValueError, match="shape"):
        Dataset(np.zeros((3, 4)), [0, 1, 0], ["a", "b", "c"])
    with pytest.raises(ValueError, match="labels"):
        Dataset(np.zeros((2, 10)), [0, 2], ["a", "b"])


def test_synthetic_is_deterministic():
    a = dataset_to_csv(generate_synthetic(seed=7))
    b = dataset_to_csv(generate_synthetic(seed=7))
    assert a == b
    assert a != dataset_to_csv(generate_synthetic(seed=8))


def test_synthetic_has_19_captures(synthetic):
    labels = {}
    for g, y in zip(synthetic.groups, synthetic.y):
        labels[g] = int(y)
    assert len(labels) == 19
    assert sum(labels.values()) == 14
    assert synthetic.has_groups
    assert synthetic.X.min() >= 0.0 and synthetic.X.max() <= 1.0


def test_single_component_rows_stay_within_four_sigma():
    mean = tuple(np.linspace(0.3, 0.7, N_FEATURES))
    sigma = 0.02
    caps = (
        CaptureSpec("b1", "Botnet", 3000, (Component(mean, sigma),)),
        CaptureSpec("b2", "Botnet", 10, (Component(mean, sigma),)),
        CaptureSpec("n1", "Normal", 10, (Component(mean, sigma),)),
        CaptureSpec("n2", "Normal", 10, (Component(mean, sigma),)),
    )
    ds = generate_synthetic(SynthConfig(caps), seed=1)
    rows = ds.X[ds.groups == "b1"]
    assert rows.shape == (3000, N_FEATURES)
    assert np.all(np.abs(rows - np.array(mean)) <= 4 * sigma + 1e-12)
    # a few rows should land beyond 3 sigma, so the bound is not vacuous
    assert np.any(np.abs(rows - np.array(mean)) > 3 * sigma)


def test_synth_config_validation_and_json():
    cfg = default_synth_config()
    assert SynthConfig.from_json(cfg.to_json()) == cfg
    empty = CaptureSpec("b1", "Botnet", 5, ())
    bad = SynthConfig((empty,) + cfg.captures[1:])
    with pytest.raises(ConfigError, match="at least 1 mixture component"):
        generate_synthetic(bad)
    only_botnet = SynthConfig(tuple(c for c in cfg.captures if c.label == "Botnet"))
    with pytest.raises(ConfigError, match="2 captures per class"):
        only_botnet.validate()
