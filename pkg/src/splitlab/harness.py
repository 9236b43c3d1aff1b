"""Repeated split / train / evaluate experiment and its report files."""

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import generate_synthetic, read_dataset, SynthConfig, standardize
from .diagnostics import SimilarityReport, pca_fit, similarity_diagnostic, write_pca_csv
from .exceptions import ConfigError, SplitlabError
from .learners import LEARNERS, downsample
from .metrics import METRIC_NAMES, compute_metrics, confusion
from .splitting import Aggregation, SplitConfig, Strategy, make_split

log = logging.getLogger(__name__)

REPORT_COLUMNS = ("strategy", "learner", "repeat", "seed", "sensitivity", "specificity",
                  "balanced_accuracy", "f1", "similarity_fraction", "status")
SUMMARY_METRICS = METRIC_NAMES + ("similarity_fraction",)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment run.

    Repeat ``i`` uses seed ``seed + i`` for its split, downsampling, learners
    and diagnostic.
    """

    input_path: str | None = None
    synth_config_path: str | None = None
    n_train: int = 2000
    n_test: int = 1000
    repeats: int = 25
    seed: int = 0
    strategies: tuple = tuple(Strategy)
    learners: tuple = tuple(LEARNERS)
    n_clusters: int = 10
    aggregation: Aggregation = Aggregation.MEAN
    out_dir: str | None = None
    threads: int | None = None
    assume_normalized: bool = False
    export_pca: bool = True

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(Strategy(s) for s in self.strategies))
        object.__setattr__(self, "aggregation", Aggregation(self.aggregation))
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")
        unknown = set(self.learners) - set(LEARNERS)
        if unknown:
            raise ConfigError(f"unknown learner(s) {sorted(unknown)}; choose from {sorted(LEARNERS)}")
        if not self.strategies or not self.learners:
            raise ConfigError("at least one strategy and one learner are required")

    def to_dict(self):
        d = asdict(self)
        d["strategies"] = [s.value for s in self.strategies]
        d["learners"] = list(self.learners)
        d["aggregation"] = self.aggregation.value
        for volatile in ("out_dir", "threads"):
            d.pop(volatile)
        return d

    def repeat_seed(self, repeat):
        return self.seed + repeat

    def split_config(self, strategy, repeat):
        return SplitConfig(n_train=self.n_train, n_test=self.n_test, seed=self.repeat_seed(repeat),
                           strategy=strategy, aggregation=self.aggregation,
                           n_clusters=self.n_clusters)


def resolve_threads(threads=None):
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("SPLITLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def load_dataset(config):
    if config.input_path:
        return read_dataset(config.input_path, assume_normalized=config.assume_normalized)
    synth = None
    if config.synth_config_path:
        with open(config.synth_config_path, encoding="utf-8") as fh:
            synth = SynthConfig.from_json(fh.read())
    return generate_synthetic(synth, seed=config.seed)


@dataclass
class _Cell:
    strategy: Strategy
    repeat: int
    seed: int
    rows: dict = field(default_factory=dict)
    fraction: float | None = None
    split: object = None


def _failed_row(reason):
    row = {m: None for m in METRIC_NAMES}
    row["status"] = f"failed: {reason}"
    return row


def _run_cell(dataset, config, strategy, repeat):
    seed = config.repeat_seed(repeat)
    cell = _Cell(strategy, repeat, seed)
    try:
        pair = make_split(dataset, config.split_config(strategy, repeat), repeat)
    except SplitlabError as exc:
        for name in config.learners:
            cell.rows[name] = _failed_row(f"split: {exc}")
        return cell
    cell.split = pair
    train, test = pair.train_indices, pair.test_indices

    diag_error = None
    try:
        cell.fraction = similarity_diagnostic(dataset.X[train], dataset.X[test], seed)
    except SplitlabError as exc:
        diag_error = f"diagnostic: {exc}"

    try:
        balanced = train[downsample(dataset.y[train], seed)]
    except SplitlabError as exc:
        for name in config.learners:
            cell.rows[name] = _failed_row(f"downsample: {exc}")
        return cell

    for name in config.learners:
        try:
            model = LEARNERS[name](random_state=seed).fit(dataset.X[balanced], dataset.y[balanced])
            pred = (model.predict_proba(dataset.X[test])[:, 1] >= 0.5).astype(np.int64)
        except SplitlabError as exc:
            cell.rows[name] = _failed_row(f"{name}: {exc}")
            continue
        row = compute_metrics(confusion(dataset.y[test], pred)).to_dict()
        row["status"] = f"failed: {diag_error}" if diag_error else "ok"
        cell.rows[name] = row
    return cell


def median_iqr(values):
    """Median and interquartile range (linear-interpolated quartiles)."""
    v = np.sort(np.asarray(values, dtype=np.float64))
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return float(med), float(q3 - q1)


def summarize(rows, metrics=SUMMARY_METRICS):
    """Per (strategy, learner, metric) median and IQR over defined values.

    Cells without any defined value are omitted with a warning.
    """
    cells = {}
    for row in rows:
        cells.setdefault((row["strategy"], row["learner"]), []).append(row)
    summary = {}
    for (strategy, learner), cell_rows in cells.items():
        out = {}
        for metric in metrics:
            values = [r[metric] for r in cell_rows if r.get(metric) is not None]
            if not values:
                log.warning("no defined %s values for %s/%s; omitted", metric, strategy, learner)
                continue
            med, iqr = median_iqr(values)
            out[metric] = {"median": med, "iqr": iqr, "n": len(values)}
        if out:
            summary.setdefault(strategy, {})[learner] = out
    return summary


@dataclass
class ExperimentReport:
    config: dict
    rows: list
    summary: dict
    similarity: dict
    splits: list = field(default_factory=list, repr=False)

    def to_csv(self):
        lines = [",".join(REPORT_COLUMNS)]
        for row in self.rows:
            cells = []
            for col in REPORT_COLUMNS:
                v = row[col]
                if v is None:
                    cells.append("")
                elif isinstance(v, float):
                    cells.append(repr(v))
                else:
                    cells.append(str(v).replace(",", ";"))
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_json(self):
        return json.dumps({"config": self.config, "rows": self.rows, "summary": self.summary,
                           "similarity": self.similarity}, indent=2) + "\n"

    def summary_json(self):
        return json.dumps(self.summary, indent=2) + "\n"

    def column(self, metric, strategy, learner=None):
        return [r[metric] for r in self.rows
                if r["strategy"] == strategy and (learner is None or r["learner"] == learner)]


def run_experiment(config, dataset=None):
    """Run every (strategy, repeat) cell and assemble the report.

    Cells may run on worker threads; the report is ordered by
    (strategy, learner, repeat) regardless.
    """
    if dataset is None:
        dataset = load_dataset(config)
    if Strategy.INFORMED in config.strategies and not dataset.has_groups:
        raise ConfigError("informed split precondition failed: every row needs a non-empty capture id")

    jobs = [(s, r) for s in config.strategies for r in range(config.repeats)]
    threads = resolve_threads(config.threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            cells = list(pool.map(lambda job: _run_cell(dataset, config, *job), jobs))
    else:
        cells = [_run_cell(dataset, config, *job) for job in jobs]

    rows = []
    for strategy in config.strategies:
        for learner in config.learners:
            for cell in cells:
                if cell.strategy is not strategy:
                    continue
                row = {"strategy": strategy.value, "learner": learner, "repeat": cell.repeat,
                       "seed": cell.seed}
                row.update(cell.rows[learner])
                row["similarity_fraction"] = cell.fraction
                rows.append({k: row[k] for k in REPORT_COLUMNS})

    similarity = {}
    for strategy in config.strategies:
        fractions = [c.fraction for c in cells if c.strategy is strategy and c.fraction is not None]
        if fractions:
            similarity[strategy.value] = SimilarityReport.from_fractions(fractions).to_dict()

    report = ExperimentReport(config.to_dict(), rows, summarize(rows), similarity,
                              [c.split for c in cells])
    return report


def write_report(report, out_dir, dataset=None, export_pca=True):
    """Write report.csv, report.json, summary.json and the PCA exports."""
    os.makedirs(out_dir, exist_ok=True)
    files = {
        "report.csv": report.to_csv(),
        "report.json": report.to_json(),
        "summary.json": report.summary_json(),
    }
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if export_pca and dataset is not None:
        write_pca_exports(dataset, [s for s in report.splits if s is not None], out_dir)
    return sorted(files)


def write_pca_exports(dataset, splits, out_dir):
    """``pca_dataset.csv`` for all rows and ``pca_<strategy>.csv`` per strategy.

    The projection is fitted once on the whole dataset standardized with its
    own statistics; strategy files stack every repeat's train and test rows.
    """
    Z = standardize(dataset.X, dataset.column_stats)
    model = pca_fit(Z)
    coords = model.transform(Z)
    with open(os.path.join(out_dir, "pca_dataset.csv"), "w", encoding="utf-8", newline="\n") as fh:
        write_pca_csv(fh, coords, dataset.y, dataset.groups, ["all"] * len(dataset))
    by_strategy = {}
    for pair in splits:
        by_strategy.setdefault(pair.strategy, []).append(pair)
    for strategy, pairs in by_strategy.items():
        idx = np.concatenate([np.concatenate([p.train_indices, p.test_indices]) for p in pairs])
        sides = np.concatenate([
            np.array(["train"] * p.train_indices.shape[0] + ["test"] * p.test_indices.shape[0])
            for p in pairs])
        path = os.path.join(out_dir, f"pca_{strategy.value}.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            write_pca_csv(fh, coords[idx], dataset.y[idx], dataset.groups[idx], sides)
