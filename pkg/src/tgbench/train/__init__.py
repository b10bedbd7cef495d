"""Training loops, metrics, negative sampling, and run reports."""
from .event_loop import evaluate_event_model, evaluate_regression, train_event_run
from .metrics import accuracy, average_precision, mse, roc_auc
from .report import METRIC_FIELDS, RunReport
from .sampling import negative_sample
from .snapshot_loop import evaluate_snapshot_model, train_snapshot_run

__all__ = [
    "METRIC_FIELDS", "RunReport", "accuracy", "average_precision", "evaluate_event_model",
    "evaluate_regression", "evaluate_snapshot_model", "mse", "negative_sample", "roc_auc",
    "train_event_run", "train_snapshot_run",
]
