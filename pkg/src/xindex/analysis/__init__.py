from .clustering import (
    Enrichment,
    KMeansResult,
    best_k,
    cluster_profile,
    enrichment_ratio,
    kmeans_cluster,
    silhouette_samples,
    silhouette_score,
    silhouette_sweep,
    standardize,
)
from .cohorts import early_career, hyperprolific, read_author_file, read_tier_file, trajectory_cohort
from .nonparametric import TestResult, mann_whitney_u, wilcoxon_signed_rank
from .ranking import RankTable, rank_scholars, ranking_delta
from .trajectory import FEATURE_NAMES, TrajectoryFeatures, feature_matrix, metric_series, trajectory_features

__all__ = [
    "Enrichment", "KMeansResult", "best_k", "cluster_profile", "enrichment_ratio", "kmeans_cluster",
    "silhouette_samples", "silhouette_score", "silhouette_sweep", "standardize",
    "early_career", "hyperprolific", "read_author_file", "read_tier_file", "trajectory_cohort",
    "TestResult", "mann_whitney_u", "wilcoxon_signed_rank",
    "RankTable", "rank_scholars", "ranking_delta",
    "FEATURE_NAMES", "TrajectoryFeatures", "feature_matrix", "metric_series", "trajectory_features",
]
