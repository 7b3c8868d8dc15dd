"""Local collaborative filtering from implicit feedback."""

__version__ = "0.1.0"

from .corpus import (
    DatasetStats,
    ExplicitExposure,
    FullExposure,
    IngestConfig,
    InteractionDataset,
    dataset_stats,
    exposure_set,
    ingest_interactions,
    ingest_text,
    liked_set,
    load_interactions,
)
from .correlate import (
    CorrelationIndex,
    asymmetry_ratio,
    build_correlation_index,
    correlation,
    global_ctr,
    item_item_topk,
    local_ctr,
)
from .evaluation import evaluate_hr, kfold_split, sweep_personalization
from .predict import PredictionConfig, effective_history, predict_ctp, recommend_topk
from .recprob import (
    PowerLaw,
    PowerLawFit,
    RecommendationPolicy,
    Uniform,
    draw_feed,
    fit_ctp_distribution,
    recommendation_probability,
)
from .stability import StabilityConfig, binary_mad, exact_ctr_mae, simulate_ctr_mae
