"""Train/test splitting strategies for low-representativeness datasets.

Four splitters (Monte Carlo, maximum dissimilarity, informed group and
clustering-based), a real-versus-permuted similarity diagnostic, tree
ensemble baselines and a repeated-experiment harness.
"""

__version__ = "0.1.0"

from .data import (
    ClassLabel,
    Dataset,
    FeatureVector,
    StandardizationParams,
    StandardScaler,
    SynthConfig,
    default_synth_config,
    generate_synthetic,
    parse_dataset,
    read_dataset,
    standardize,
)
from .diagnostics import PCA, PermutationSimilarity, SimilarityReport, similarity_diagnostic
from .splitting import SplitConfig, SplitPair, Strategy, StrategySplitter, make_split

__all__ = [
    "PCA",
    "ClassLabel",
    "Dataset",
    "FeatureVector",
    "PermutationSimilarity",
    "SimilarityReport",
    "SplitConfig",
    "SplitPair",
    "StandardScaler",
    "StandardizationParams",
    "Strategy",
    "StrategySplitter",
    "SynthConfig",
    "default_synth_config",
    "generate_synthetic",
    "make_split",
    "parse_dataset",
    "read_dataset",
    "similarity_diagnostic",
    "standardize",
]
