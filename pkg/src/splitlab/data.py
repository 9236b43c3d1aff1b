"""Flow-predictor datasets: schema, CSV ingest, standardization, synthesis."""

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from enum import IntEnum
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_features
from .exceptions import ConfigError, IngestError

FEATURE_NAMES = (
    "x_sp", "x_wp", "x_wnp", "x_snp",  # periodicity
    "x_ds", "x_dm", "x_dl",  # duration
    "x_ss", "x_sm", "x_sl",  # size
)
CSV_HEADER = FEATURE_NAMES + ("label", "capture")
N_FEATURES = len(FEATURE_NAMES)


class ClassLabel(IntEnum):
    """Connection class. Botnet is the positive class."""

    NORMAL = 0
    BOTNET = 1

    @classmethod
    def parse(cls, text):
        try:
            return {"Botnet": cls.BOTNET, "Normal": cls.NORMAL}[text]
        except KeyError:
            raise ValueError(f"unknown label {text!r} (expected Botnet or Normal)") from None

    def __str__(self):
        return "Botnet" if self is ClassLabel.BOTNET else "Normal"


class FeatureVector(NamedTuple):
    """The ten cumulative-frequency flow predictors of one connection."""

    x_sp: float
    x_wp: float
    x_wnp: float
    x_snp: float
    x_ds: float
    x_dm: float
    x_dl: float
    x_ss: float
    x_sm: float
    x_sl: float


@dataclass(frozen=True)
class StandardizationParams:
    """Per-predictor population mean and standard deviation."""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def from_rows(cls, X):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[0] == 0:
            raise ValueError("standardization needs a non-empty reference set")
        return cls(mean=X.mean(axis=0), std=X.std(axis=0))

    @classmethod
    def identity(cls, n_features=N_FEATURES):
        return cls(mean=np.zeros(n_features), std=np.ones(n_features))


def standardize(X, params):
    """Z-score ``X`` column-wise; zero-stddev columns map to 0."""
    X = np.asarray(X, dtype=np.float64)
    scale = np.where(params.std > 0, params.std, 1.0)
    Z = (X - params.mean) / scale
    Z[:, params.std == 0] = 0.0
    return Z


def unstandardize(Z, params):
    return np.asarray(Z, dtype=np.float64) * params.std + params.mean


class StandardScaler(TransformerMixin, BaseEstimator):
    """Population z-scoring with the zero-variance-to-zero rule."""

    def fit(self, X, y=None):
        X = check_features(X)
        self.params_ = StandardizationParams.from_rows(X)
        self.mean_ = self.params_.mean
        self.scale_ = self.params_.std
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        return standardize(check_features(X, self.n_features_in_), self.params_)

    def inverse_transform(self, Z):
        check_is_fitted(self, "params_")
        return unstandardize(check_features(Z, self.n_features_in_), self.params_)


def _readonly(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable table of predictors, labels (1 = Botnet) and capture ids."""

    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray
    column_stats: StandardizationParams = field(init=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        groups = np.asarray(self.groups, dtype=object)
        if X.ndim != 2 or X.shape[1] != N_FEATURES:
            raise ValueError(f"X must have shape (n, {N_FEATURES}), got {X.shape}")
        if not (X.shape[0] == y.shape[0] == groups.shape[0]):
            raise ValueError("X, y and groups must have the same length")
        if X.shape[0] < 2:
            raise ValueError("a dataset needs at least 2 rows")
        if not np.all(np.isfinite(X)) or np.any(X < 0):
            raise ValueError("predictors must be finite and non-negative")
        if not np.all(np.isin(y, (0, 1))):
            raise ValueError("labels must be 0 (Normal) or 1 (Botnet)")
        object.__setattr__(self, "X", _readonly(X))
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "groups", _readonly(groups))
        object.__setattr__(self, "column_stats", StandardizationParams.from_rows(X))

    def __len__(self):
        return self.X.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (np.array_equal(self.X, other.X) and np.array_equal(self.y, other.y)
                and np.array_equal(self.groups, other.groups))

    def row(self, i):
        return FeatureVector(*map(float, self.X[i])), ClassLabel(int(self.y[i])), self.groups[i]

    def subset(self, indices):
        indices = np.asarray(indices)
        return Dataset(self.X[indices], self.y[indices], self.groups[indices])

    def class_counts(self):
        return {str(c): int(np.sum(self.y == c)) for c in (ClassLabel.BOTNET, ClassLabel.NORMAL)}

    @property
    def has_groups(self):
        return all(isinstance(g, str) and g != "" for g in self.groups)


def parse_dataset(source, assume_normalized=False):
    """Read a dataset from a text stream (or string) in the CSV schema.

    With ``assume_normalized`` every predictor must also lie in [0, 1].
    Errors name the 1-based file line.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None:
        raise IngestError("empty input, header row missing", line=1)
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise IngestError(f"header must be {','.join(CSV_HEADER)}", line=1)
    X, y, groups = [], [], []
    for lineno, fields in enumerate(reader, start=2):
        if not fields:
            continue
        if len(fields) != len(CSV_HEADER):
            raise IngestError(f"expected {len(CSV_HEADER)} columns, got {len(fields)}", line=lineno)
        values = []
        for name, cell in zip(FEATURE_NAMES, fields):
            try:
                v = float(cell)
            except ValueError:
                raise IngestError(f"malformed number {cell!r} in column {name}", line=lineno) from None
            if not math.isfinite(v) or v < 0:
                raise IngestError(f"{name} must be finite and >= 0, got {cell!r}", line=lineno)
            if assume_normalized and v > 1:
                raise IngestError(f"{name} exceeds 1 under --assume-normalized", line=lineno)
            values.append(v)
        try:
            label = ClassLabel.parse(fields[10])
        except ValueError as exc:
            raise IngestError(str(exc), line=lineno) from None
        X.append(values)
        y.append(int(label))
        groups.append(fields[11])
    if len(X) < 2:
        raise IngestError(f"a dataset needs at least 2 data rows, got {len(X)}")
    return Dataset(np.array(X, dtype=np.float64), np.array(y), np.array(groups, dtype=object))


def read_dataset(path, assume_normalized=False):
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_dataset(fh, assume_normalized=assume_normalized)


def write_dataset(dataset, sink):
    """Write ``dataset`` in the CSV schema; floats use shortest round-trip repr."""
    sink.write(",".join(CSV_HEADER) + "\n")
    for x, label, group in zip(dataset.X, dataset.y, dataset.groups):
        sink.write(",".join(repr(float(v)) for v in x))
        sink.write(f",{ClassLabel(int(label))},{group}\n")


def save_dataset(dataset, path):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        write_dataset(dataset, fh)


def dataset_to_csv(dataset):
    buf = io.StringIO()
    write_dataset(dataset, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Synthetic low-representativeness data


@dataclass(frozen=True)
class Component:
    """Spherical Gaussian truncated at 4 sigma per coordinate."""

    mean: tuple
    sigma: float
    weight: float = 1.0


@dataclass(frozen=True)
class CaptureSpec:
    name: str
    label: str
    n_rows: int
    components: tuple


@dataclass(frozen=True)
class SynthConfig:
    captures: tuple

    def to_json(self):
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_dict(cls, d):
        captures = []
        for c in d["captures"]:
            comps = tuple(
                Component(tuple(float(v) for v in comp["mean"]), float(comp["sigma"]),
                          float(comp.get("weight", 1.0)))
                for comp in c["components"]
            )
            captures.append(CaptureSpec(str(c["name"]), str(c["label"]), int(c["n_rows"]), comps))
        return cls(tuple(captures))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def validate(self):
        by_label = {"Botnet": 0, "Normal": 0}
        for cap in self.captures:
            if cap.label not in by_label:
                raise ConfigError(f"capture {cap.name}: unknown label {cap.label!r}")
            if not cap.components:
                raise ConfigError(f"capture {cap.name}: needs at least 1 mixture component")
            if cap.n_rows < 1:
                raise ConfigError(f"capture {cap.name}: n_rows must be >= 1")
            if "," in cap.name or not cap.name:
                raise ConfigError(f"capture name {cap.name!r} must be non-empty and comma-free")
            for comp in cap.components:
                if len(comp.mean) != N_FEATURES or comp.sigma < 0 or comp.weight <= 0:
                    raise ConfigError(f"capture {cap.name}: malformed component {comp}")
            by_label[cap.label] += 1
        if min(by_label.values()) < 2:
            raise ConfigError(f"need >= 2 captures per class, got {by_label}")


def _truncated_normal(rng, size, bound=4.0):
    z = rng.standard_normal(size)
    bad = np.abs(z) > bound
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(z) > bound
    return z


def generate_synthetic(config=None, seed=0):
    """Draw a dataset from ``config`` (default: :func:`default_synth_config`).

    Rows appear capture by capture in config order. Values are clipped to
    [0, 1]. The output is a pure function of ``(config, seed)``.
    """
    config = default_synth_config() if config is None else config
    config.validate()
    rng = np.random.default_rng(seed)
    X, y, groups = [], [], []
    for cap in config.captures:
        weights = np.array([c.weight for c in cap.components])
        counts = rng.multinomial(cap.n_rows, weights / weights.sum())
        for comp, k in zip(cap.components, counts):
            if k == 0:
                continue
            pts = np.asarray(comp.mean) + comp.sigma * _truncated_normal(rng, (k, N_FEATURES))
            X.append(np.clip(pts, 0.0, 1.0))
        y.extend([int(ClassLabel.parse(cap.label))] * cap.n_rows)
        groups.extend([cap.name] * cap.n_rows)
    return Dataset(np.vstack(X), np.array(y), np.array(groups, dtype=object))


# Capture sizes follow the CTU19 class totals: 19271 Botnet and 1595 Normal rows.
_BOTNET_SIZES = (5200, 3400, 2300, 1600, 1200, 900, 800, 750, 700, 650, 600, 500, 400, 271)
_NORMAL_SIZES = (420, 380, 330, 265, 200)


def default_synth_config():
    """Nineteen-capture layout mimicking CTU19's representativeness pattern.

    Botnet rows come from a pool of tight components. The first eight Botnet
    captures span several shared components plus one of their own; the last
    six each sit on a single component, and two of those components belong
    to no other capture. Normal captures all mix the same concentrated
    components, two of which overlap Botnet ones; the last two Normal
    captures also carry a component of their own next to peripheral Botnet
    traffic. A low-weight diffuse component per class supplies outlying rows.
    """
    rng = np.random.default_rng(20190101)
    n_shared, n_own = 10, 10
    bot_means = rng.uniform(0.1, 0.9, size=(n_shared + n_own, N_FEATURES))
    bot_sigma = rng.uniform(0.03, 0.05, size=n_shared + n_own)
    normal_means = rng.uniform(0.2, 0.8, size=(3, N_FEATURES))
    # Capture-specific components range from next to the Normal region to far from it.
    own = slice(n_shared, n_shared + n_own)
    reach = np.linspace(0.35, 1.0, n_own)[:, None]
    bot_means[own] = normal_means.mean(0) + reach * (bot_means[own] - normal_means.mean(0))
    # Two Botnet components overlap Normal ones to keep the task imperfect.
    bot_means[0] = normal_means[0] + rng.normal(0.0, 0.05, N_FEATURES)
    bot_means[3] = normal_means[2] + rng.normal(0.0, 0.05, N_FEATURES)
    # Rare Normal traffic, beside two peripheral Botnet components, seen in one capture each.
    offsets = rng.normal(0.0, 1.0, size=(2, N_FEATURES))
    offsets *= 0.25 / np.linalg.norm(offsets, axis=1, keepdims=True)
    rare_means = bot_means[[5, 8]] + offsets
    bot_wide = Component(tuple(np.full(N_FEATURES, 0.5)), 0.2, 0.02)
    norm_wide = Component(tuple(np.full(N_FEATURES, 0.5)), 0.2, 0.08)

    def comp(mean, sigma, weight=1.0):
        return Component(tuple(float(v) for v in np.clip(mean, 0.0, 1.0)), float(sigma), float(weight))

    multi = [(0, 2, 3), (1, 4, 5), (2, 6, 7), (3, 5, 8), (4, 7, 9), (0, 8, 9), (6, 9, 1), (3, 7, 4)]
    single = (2, 5, 8, 9, n_shared + 8, n_shared + 9)
    captures = []
    for i, size in enumerate(_BOTNET_SIZES):
        if i < len(multi):
            ks = multi[i] + (n_shared + i,)
            w = rng.uniform(0.5, 1.5, size=len(ks))
            parts = tuple(comp(bot_means[k], bot_sigma[k], wk) for k, wk in zip(ks, w))
            parts += (Component(bot_wide.mean, bot_wide.sigma, bot_wide.weight * w.sum()),)
        else:
            k = single[i - len(multi)]
            parts = (comp(bot_means[k], bot_sigma[k]),)
        captures.append(CaptureSpec(f"botnet-{i + 1:02d}", "Botnet", size, parts))
    for i, size in enumerate(_NORMAL_SIZES):
        w = rng.uniform(0.5, 1.5, size=normal_means.shape[0])
        parts = tuple(comp(m, 0.04, wk) for m, wk in zip(normal_means, w))
        if i >= len(_NORMAL_SIZES) - len(rare_means):
            rare = rare_means[i - len(_NORMAL_SIZES) + len(rare_means)]
            parts += (comp(rare, 0.04, 0.4 * w.sum()),)
        parts += (Component(norm_wide.mean, norm_wide.sigma, norm_wide.weight * w.sum()),)
        captures.append(CaptureSpec(f"normal-{i + 1:02d}", "Normal", size, parts))
    return SynthConfig(tuple(captures))
