"""Batch evaluation, subjective-score statistics and correlation reports."""
from .batch import METRICS, BatchResult, evaluate_entry, read_results, run_batch
from .report import CorrelationReport, MetricCorrelation, correlation_report
from .stats import LogisticFit, logistic, logistic_fit, pearson, spearman
from .subjective import (
    MosRecord,
    ScreeningResult,
    compute_mos,
    read_mos,
    screen_outliers,
    write_mos,
)

__all__ = [
    "METRICS",
    "BatchResult",
    "evaluate_entry",
    "read_results",
    "run_batch",
    "CorrelationReport",
    "MetricCorrelation",
    "correlation_report",
    "LogisticFit",
    "logistic",
    "logistic_fit",
    "pearson",
    "spearman",
    "MosRecord",
    "ScreeningResult",
    "compute_mos",
    "read_mos",
    "screen_outliers",
    "write_mos",
]
