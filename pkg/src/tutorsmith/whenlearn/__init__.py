from .backend import BACKEND_NAME
from .encode import SENTINEL, Encoder, FeatureTable, SchemaMismatch
from .features import ABSENT, extract_features, state_features
from .models import (
    LEARNERS,
    BaggedForestModel,
    ConstantModel,
    DecisionTreeModel,
    LabeledExample,
    StandModel,
    TrainingInconsistency,
    WhenModel,
    fit,
    fit_encoded,
    predict_certainty,
)

__all__ = [
    "ABSENT",
    "BACKEND_NAME",
    "BaggedForestModel",
    "ConstantModel",
    "DecisionTreeModel",
    "Encoder",
    "FeatureTable",
    "LEARNERS",
    "LabeledExample",
    "SENTINEL",
    "SchemaMismatch",
    "StandModel",
    "TrainingInconsistency",
    "WhenModel",
    "extract_features",
    "fit",
    "fit_encoded",
    "predict_certainty",
    "state_features",
]
