"""Event-based temporal graph models: TGN and TGAT."""
from .layers import EdgeDecoder, NodeRegressor, TemporalNeighborhoodLayer, TemporalSumLayer, edge_decoder
from .memory import (Memory, MemoryWrite, RawMail, RawMessageStore, aggregate_batch, aggregate_messages, commit,
                     compose, compute_raw_messages, update_memory)
from .models import (TGAT, TGAT_CONFIGS, TGN, TGN_CONFIGS, EventState, TgatConfig, TgnConfig, build_event_model,
                     build_tree)
from .neighbors import NeighborSample, NeighborStore
from .time_encoding import RankEncoder, TimeEncoder, time_encode

__all__ = [
    "EdgeDecoder", "EventState", "Memory", "MemoryWrite", "NeighborSample", "NeighborStore", "NodeRegressor",
    "RankEncoder", "RawMail", "RawMessageStore", "TGAT", "TGAT_CONFIGS", "TGN", "TGN_CONFIGS",
    "TemporalNeighborhoodLayer", "TemporalSumLayer", "TgatConfig", "TgnConfig", "TimeEncoder",
    "aggregate_batch", "aggregate_messages", "build_event_model", "build_tree", "commit", "compose",
    "compute_raw_messages", "edge_decoder", "time_encode", "update_memory",
]
