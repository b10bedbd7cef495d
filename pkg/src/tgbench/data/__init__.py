"""Snapshot sequences, event streams, splits, and the snapshot-to-event converter."""
from .convert import dtdg_to_ctdg
from .events import (Event, EventStream, label_sidecar_path, load_event_csv, load_jodie_csv,
                     write_event_csv, write_jodie_csv)
from .snapshots import (Snapshot, SnapshotSequence, build_lag_windows, load_dtdg_json, parse_dtdg,
                        standardize_series, temporal_split, write_dtdg_json)
from .splits import HoldoutSplit, inductive_holdout

__all__ = [
    "Event", "EventStream", "HoldoutSplit", "Snapshot", "SnapshotSequence", "build_lag_windows",
    "dtdg_to_ctdg", "inductive_holdout", "label_sidecar_path", "load_dtdg_json", "load_event_csv",
    "load_jodie_csv", "parse_dtdg", "standardize_series", "temporal_split", "write_dtdg_json",
    "write_event_csv", "write_jodie_csv",
]
