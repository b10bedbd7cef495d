"""Synthetic datasets in the canonical on-disk shapes.

These exist so the pipelines can be exercised without the public files; none
of them reproduces the statistics of the real benchmarks.
"""
from __future__ import annotations

import numpy as np

from .events import EventStream


def covid_like_document(num_nodes: int = 129, days: int = 61, neighbors: int = 6, seed: int = 0) -> dict:
    """A DTDG JSON document: mobility-coupled case counts on a k-NN region graph."""
    rng = np.random.default_rng(seed)
    xy = rng.random((num_nodes, 2))
    dist = np.linalg.norm(xy[:, None] - xy[None], axis=-1)
    nn = np.argsort(dist, axis=1)[:, : neighbors + 1]      # includes the node itself
    base = rng.lognormal(mean=5.0, sigma=1.0, size=(num_nodes, neighbors + 1))
    pop = rng.lognormal(mean=0.0, sigma=0.5, size=num_nodes)

    cases = np.zeros((days, num_nodes))
    cases[0] = rng.poisson(20 * pop)
    edge_index, edge_weight = {}, {}
    for t in range(days):
        mobility = 1.0 / (1.0 + np.exp((t - days / 2) / 5.0))   # lockdown-style decline
        w = base * (0.3 + 0.7 * mobility) * rng.lognormal(0.0, 0.1, size=base.shape)
        pairs = np.stack([np.repeat(np.arange(num_nodes), neighbors + 1), nn.reshape(-1)], axis=1)
        edge_index[str(t)] = pairs.tolist()
        edge_weight[str(t)] = np.round(w.reshape(-1), 1).tolist()
        if t + 1 < days:
            M = np.zeros((num_nodes, num_nodes))
            np.add.at(M, (pairs[:, 1], pairs[:, 0]), w.reshape(-1))
            M /= M.sum(axis=1, keepdims=True)
            growth = 1.15 * (0.4 + 0.6 * mobility)
            expected = 0.5 * cases[t] + 0.5 * growth * (M @ cases[t])
            cases[t + 1] = rng.poisson(np.maximum(expected, 0.5))
    return {"edge_mapping": {"edge_index": edge_index, "edge_weight": edge_weight},
            "time_periods": days, "y": cases.tolist()}


def interaction_stream(num_users: int = 200, num_items: int = 50, num_events: int = 4000,
                       feature_dim: int = 8, seed: int = 0) -> EventStream:
    """Bipartite user-item stream with sticky per-user preferences.

    Users revisit a few favourite items (often the last one), and edge
    features are noisy item signatures, so both memory and temporal
    neighbourhoods carry signal.
    """
    rng = np.random.default_rng(seed)
    activity = rng.zipf(1.6, size=num_users).astype(float)
    activity /= activity.sum()
    favourites = [rng.choice(num_items, size=rng.integers(1, 4), replace=False) for _ in range(num_users)]
    signature = rng.normal(size=(num_items, feature_dim))
    last = -np.ones(num_users, dtype=np.int64)

    users = rng.choice(num_users, size=num_events, p=activity)
    items = np.empty(num_events, dtype=np.int64)
    for k, u in enumerate(users):
        r = rng.random()
        if last[u] >= 0 and r < 0.5:
            items[k] = last[u]
        elif r < 0.9:
            items[k] = rng.choice(favourites[u])
        else:
            items[k] = rng.integers(num_items)
        last[u] = items[k]
    t = np.cumsum(rng.exponential(10.0, size=num_events))
    feats = signature[items] + 0.3 * rng.normal(size=(num_events, feature_dim))
    return EventStream(users.astype(np.int64), items + num_users, t, feats,
                       num_users + num_items, num_sources=num_users)


def planted_successor_stream(num_nodes: int = 20, num_events: int = 200, feature_dim: int = 4,
                             seed: int = 0) -> EventStream:
    """Unipartite stream where node ``i`` only ever interacts with ``i + 1``.

    Sources cycle through ``0 .. num_nodes - 2`` at unit time steps, so the
    true destination always last interacted a fixed time ago while a random
    node generally did not. Edge features are small noise.
    """
    rng = np.random.default_rng(seed)
    src = np.arange(num_events) % (num_nodes - 1)
    t = np.arange(num_events, dtype=np.float64)
    feats = rng.normal(size=(num_events, feature_dim)) * 0.1
    return EventStream(src.astype(np.int64), (src + 1).astype(np.int64), t, feats, num_nodes)
