"""Heart-disease severity pipeline: ingest, feature selection, symptom
significance, naive Bayes, blackboard orchestration and evaluation."""
from .blackboard import AgentSpec, Blackboard, Controller, RunManifest
from .config import PipelineConfig
from .discretize import BinSpec, DiscretizedView, discretize
from .evaluation import ConfusionMatrix, Metrics, emit_tables, evaluate
from .folds import FoldPlan, stratified_kfold
from .ingest import (
    AttributeSchema,
    ClassLabel,
    Dataset,
    PatientRecord,
    class_distribution,
    default_schema,
    load,
    parse_processed,
    parse_raw,
)
from .nbc import (
    NbcModel,
    PriorTable,
    fit,
    load_prior_table,
    posterior,
    predict,
    seed_model_from_table,
)
from .pipeline import run_many, run_pipeline
from .preprocess import FeatureSubset, SelectionConfig, filter_select, wrapper_select
from .significance import SignificanceScore, mutual_information, rank_symptoms, significance

__version__ = "0.1.0"
