"""Run reports: a JSON document per run and one row of the results table."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

METRIC_FIELDS = ("mse", "ap_seen", "ap_unseen", "auc_seen", "auc_unseen", "accuracy")


@dataclass
class RunReport:
    config: dict[str, Any]
    seed: int
    train_loss: list[float] = field(default_factory=list)
    val_metric: list[float] = field(default_factory=list)
    metrics: dict[str, float] = field(default_factory=dict)
    mse_series: Optional[list[float]] = None
    epochs_run: int = 0
    wall_seconds: float = 0.0
    epoch_seconds: list[float] = field(default_factory=list)
    status: str = "ok"
    error: Optional[str] = None

    def metric(self, name: str) -> Optional[float]:
        return self.metrics.get(name)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))

    def metric_columns(self) -> dict[str, str]:
        """Metric cells as strings; absent metrics are blank. ``repr`` keeps every bit."""
        out = {}
        for name in METRIC_FIELDS:
            v = self.metrics.get(name)
            out[name] = "" if v is None else repr(float(v))
        return out
