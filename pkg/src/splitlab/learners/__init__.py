"""Tree-ensemble baselines and class balancing."""

from .boosting import GradientBoostingClassifier, gbt_fit, gbt_predict_proba, logistic_loss
from .forest import RandomForestClassifier, forest_fit, forest_predict_proba
from .sampling import downsample
from .tree import DecisionTreeClassifier

LEARNERS = {
    "random_forest": RandomForestClassifier,
    "gradient_boosting": GradientBoostingClassifier,
}

__all__ = [
    "DecisionTreeClassifier",
    "GradientBoostingClassifier",
    "LEARNERS",
    "RandomForestClassifier",
    "downsample",
    "forest_fit",
    "forest_predict_proba",
    "gbt_fit",
    "gbt_predict_proba",
    "logistic_loss",
]
