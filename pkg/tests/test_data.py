"""Snapshot loading, lag windows, splits, event streams, conversion, and the inductive holdout."""
from __future__ import annotations

import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tgbench.data import (EventStream, build_lag_windows, dtdg_to_ctdg, inductive_holdout, load_dtdg_json,
                          load_event_csv, load_jodie_csv, parse_dtdg, temporal_split, write_dtdg_json,
                          write_event_csv, write_jodie_csv)
from tgbench.data.synthetic import covid_like_document
from tgbench.errors import ContractError, FormatError


def _doc(T=6, N=3, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.poisson(10, size=(T, N)).astype(float)
    edges = {str(t): [[0, 1], [1, 2]] for t in range(T)}
    weights = {str(t): [float(t + 1), 2.0] for t in range(T)}
    return {"time_periods": T, "y": y.tolist(), "edge_mapping": {"edge_index": edges, "edge_weight": weights}}


# ---------------------------------------------------------------- DTDG JSON

def test_synthetic_covid_shape_matches_benchmark_dimensions(tmp_path):
    path = tmp_path / "covid.json"
    path.write_text(json.dumps(covid_like_document()))
    seq = load_dtdg_json(path, lag=8)
    assert seq.num_nodes == 129
    assert len(seq) == 61 - 8


def test_lag_boundary_gives_one_snapshot(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(covid_like_document(num_nodes=5, days=61, neighbors=2)))
    assert len(load_dtdg_json(path, lag=60)) == 1


def test_constant_series_is_degenerate():
    doc = _doc()
    doc["y"] = [[3.0] * 3 for _ in range(6)]
    with pytest.raises(FormatError, match="degenerate"):
        parse_dtdg(doc, lag=2)


def test_snapshot_alignment_and_global_zscore():
    doc = _doc(T=6, N=3)
    seq = parse_dtdg(doc, lag=2)
    y = np.array(doc["y"])
    y_hat = (y - y.mean()) / y.std()
    assert seq.standardization == pytest.approx((y.mean(), y.std()))
    for i, snap in enumerate(seq):
        np.testing.assert_allclose(snap.features, y_hat[i:i + 2].T, rtol=1e-14)
        np.testing.assert_allclose(snap.target, y_hat[i + 2], rtol=1e-14)
        # edges come from the last observed feature day
        assert snap.weights[0] == float(i + 2 - 1 + 1)
        assert snap.features.shape[1] == seq.lag


def test_per_node_standardization_option():
    seq = parse_dtdg(_doc(T=8, N=3), lag=2, standardize="per_node")
    mu, sigma = seq.standardization
    assert len(mu) == len(sigma) == 3


@pytest.mark.parametrize("mutate,match", [
    (lambda d: d.pop("y"), "'y'"),
    (lambda d: d["edge_mapping"].pop("edge_weight"), "'edge_weight'"),
    (lambda d: d["y"][2].append(1.0), "ragged"),
    (lambda d: d["edge_mapping"]["edge_index"].__setitem__("3", [[0, 7], [1, 2]]), "edge_index/3"),
    (lambda d: d["edge_mapping"]["edge_weight"].__setitem__("3", [-1.0, 2.0]), "negative"),
])
def test_format_errors_name_the_key(tmp_path, mutate, match):
    doc = _doc()
    mutate(doc)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(FormatError, match=match) as info:
        load_dtdg_json(path, lag=2)
    assert str(path) in str(info.value)


def test_invalid_json_is_format_error(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(FormatError):
        load_dtdg_json(path)


def test_dtdg_write_then_load_roundtrip(tmp_path):
    doc = _doc(T=7, N=3, seed=4)
    path = tmp_path / "rt.json"
    write_dtdg_json(path, np.array(doc["y"]),
                    [doc["edge_mapping"]["edge_index"][str(t)] for t in range(7)],
                    [doc["edge_mapping"]["edge_weight"][str(t)] for t in range(7)])
    a, b = load_dtdg_json(path, lag=3), parse_dtdg(doc, lag=3)
    for s, r in zip(a, b):
        np.testing.assert_array_equal(s.features, r.features)
        np.testing.assert_array_equal(s.edges, r.edges)


# ---------------------------------------------------------------- lag windows

def test_lag_window_hand_trace():
    feats, targets = build_lag_windows(np.array([[0.0], [1.0], [2.0], [3.0]]), 2)
    assert [f.ravel().tolist() for f in feats] == [[0.0, 1.0], [1.0, 2.0]]
    assert [t.tolist() for t in targets] == [[2.0], [3.0]]


def test_lag_window_single_pair_at_boundary():
    y = np.arange(10.0).reshape(5, 2)
    feats, targets = build_lag_windows(y, 4)
    assert len(feats) == 1
    np.testing.assert_array_equal(feats[0], y[:4].T)


def test_lag_window_zero_width():
    feats, targets = build_lag_windows(np.zeros((5, 0)), 2)
    assert len(feats) == 3
    assert feats[0].shape == (0, 2) and targets[0].shape == (0,)


def test_lag_window_needs_long_series():
    with pytest.raises(ContractError):
        build_lag_windows(np.zeros((3, 2)), 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 4), st.data())
def test_lag_window_round_trip(T, N, data):
    lag = data.draw(st.integers(1, T - 1))
    y = np.random.default_rng(T * 31 + N).normal(size=(T, N))
    feats, targets = build_lag_windows(y, lag)
    assert len(feats) == T - lag
    np.testing.assert_array_equal(np.stack(targets).reshape(T - lag, N), y[lag:])
    for i, f in enumerate(feats):
        for k in range(lag):
            np.testing.assert_array_equal(f[:, k], y[i + k])


# ---------------------------------------------------------------- temporal split

def _seq_of(n):
    return parse_dtdg(_doc(T=n + 1, N=3), lag=1)


@pytest.mark.parametrize("S,ratio,sizes", [(53, 0.8, (42, 11)), (10, 0.5, (5, 5)), (2, 0.9, (1, 1))])
def test_temporal_split_examples(S, ratio, sizes):
    train, test = temporal_split(_seq_of(S), ratio)
    assert (len(train), len(test)) == sizes


def test_temporal_split_errors():
    with pytest.raises(ContractError):
        temporal_split(_seq_of(5), 1.0)
    with pytest.raises(ContractError):
        temporal_split(_seq_of(2), 0.2)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 30), st.floats(0.05, 0.95))
def test_temporal_split_concatenation_reproduces_input(S, ratio):
    seq = _seq_of(S)
    try:
        train, test = temporal_split(seq, ratio)
    except ContractError:
        return
    assert train.snapshots + test.snapshots == seq.snapshots


# ---------------------------------------------------------------- JODIE CSV

def _jodie(path, rows, width=2):
    header = "user_id,item_id,timestamp,state_label," + ",".join(f"f{k}" for k in range(width))
    path.write_text(header + "\n" + "\n".join(rows) + "\n")


def test_jodie_toy_offsets_items(tmp_path):
    path = tmp_path / "toy.csv"
    _jodie(path, ["0,0,1.0,0,0.1,0.2", "1,0,2.0,0,0.3,0.4", "0,0,3.0,0,0.5,0.6"])
    s = load_jodie_csv(path)
    assert s.num_nodes == 3 and s.num_sources == 2
    assert set(s.dst.tolist()) == {2}
    assert s.feature_dim == 2


def test_jodie_sorts_stably_by_time(tmp_path):
    path = tmp_path / "toy.csv"
    _jodie(path, ["0,0,5.0,0,1,1", "1,1,2.0,0,2,2", "1,0,2.0,0,3,3"])
    s = load_jodie_csv(path)
    assert s.t.tolist() == [2.0, 2.0, 5.0]
    assert s.features[:, 0].tolist() == [2.0, 3.0, 1.0]


def test_jodie_ragged_row_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    _jodie(path, ["0,0,1.0,0,0.1,0.2", "1,0,2.0,0,0.3"])
    with pytest.raises(FormatError, match=":3:"):
        load_jodie_csv(path)


def test_jodie_reserialize_roundtrip(tmp_path, bipartite):
    path = tmp_path / "w.csv"
    write_jodie_csv(bipartite, path)
    again = load_jodie_csv(path)
    for name in ("src", "dst", "t", "features"):
        np.testing.assert_array_equal(getattr(again, name), getattr(bipartite, name))
    assert np.all(np.diff(again.t) >= 0)
    assert max(again.src.max(), again.dst.max()) < again.num_nodes


def test_event_stream_invariants_enforced():
    with pytest.raises((ContractError, FormatError)):
        EventStream(np.array([0, 1]), np.array([1, 0]), np.array([2.0, 1.0]), np.zeros((2, 1)), 2)
    with pytest.raises((ContractError, FormatError)):
        EventStream(np.array([0]), np.array([5]), np.array([0.0]), np.zeros((1, 1)), 2)


# ---------------------------------------------------------------- conversion

def _two_snapshot_seq():
    y = np.array([[1.0, 2.0, 3.0], [2.0, 3.0, 5.0], [4.0, 1.0, 2.0]])
    doc = {"time_periods": 3, "y": y.tolist(),
           "edge_mapping": {"edge_index": {"0": [[0, 1]], "1": [[0, 1], [1, 2]], "2": []},
                            "edge_weight": {"0": [5.0], "1": [3.0, 2.0], "2": []}}}
    return parse_dtdg(doc, lag=1)


def test_conversion_hand_trace():
    seq = _two_snapshot_seq()
    s = dtdg_to_ctdg(seq)
    assert len(s) == 3
    assert s.t.tolist() == [0.0, 1.0, 1.0]
    assert s.feature_dim == 1 + 2 * seq.lag
    np.testing.assert_array_equal(s.features[0], [5.0, seq[0].features[0, 0], seq[0].features[1, 0]])
    np.testing.assert_array_equal(s.features[2], [2.0, seq[1].features[1, 0], seq[1].features[2, 0]])
    np.testing.assert_array_equal(s.node_labels[1], seq[1].target)


def test_conversion_empty_snapshot_contributes_nothing():
    y = np.array([[1.0, 2.0], [2.0, 3.0], [4.0, 1.0]])
    doc = {"time_periods": 3, "y": y.tolist(),
           "edge_mapping": {"edge_index": {"0": [], "1": [[1, 0]]}, "edge_weight": {"0": [], "1": [1.0]}}}
    s = dtdg_to_ctdg(parse_dtdg(doc, lag=1))
    assert s.t.tolist() == [1.0]


def test_conversion_lag_eight_has_width_seventeen(small_doc):
    assert dtdg_to_ctdg(parse_dtdg(small_doc, lag=8)).feature_dim == 17


def test_conversion_event_cap_keeps_first_edges(small_seq):
    capped = dtdg_to_ctdg(small_seq, event_cap=2)
    assert Counter(capped.t.tolist()) == {float(i): 2 for i in range(len(small_seq))}
    np.testing.assert_array_equal(capped.src[:2], small_seq[0].edges[:2, 0])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 6))
def test_conversion_preserves_counts_and_order(seed, lag):
    seq = parse_dtdg(covid_like_document(num_nodes=6, days=12, neighbors=2, seed=seed), lag=lag)
    s = dtdg_to_ctdg(seq)
    assert len(s) == sum(snap.num_edges for snap in seq)
    assert np.all(np.diff(s.t) >= 0)


def test_event_csv_roundtrip_with_labels(tmp_path, small_seq):
    s = dtdg_to_ctdg(small_seq)
    path = tmp_path / "ev.csv"
    write_event_csv(s, path)
    assert (tmp_path / "ev_labels.csv").read_text().splitlines()[0] == "t,node,target"
    again = load_event_csv(path)
    for name in ("src", "dst", "t", "features", "node_labels"):
        np.testing.assert_array_equal(getattr(again, name), getattr(s, name))


# ---------------------------------------------------------------- inductive holdout

def _toy_stream(n=10, nodes=6, seed=0):
    rng = np.random.default_rng(seed)
    src = rng.integers(0, nodes, size=n)
    dst = (src + rng.integers(1, nodes, size=n)) % nodes
    return EventStream(src, dst, np.arange(n, dtype=float), rng.normal(size=(n, 2)), nodes)


def test_holdout_without_mask():
    s = _toy_stream(20)
    split = inductive_holdout(s, 0.0)
    assert split.test_unseen.size == 0 and split.dropped.size == 0
    np.testing.assert_array_equal(split.train, np.arange(split.train.size))


def test_holdout_single_node_is_degenerate():
    s = EventStream(np.zeros(5, dtype=np.int64), np.zeros(5, dtype=np.int64), np.arange(5.0),
                    np.zeros((5, 1)), 1)
    with pytest.raises(ContractError, match="degenerate"):
        inductive_holdout(s, 0.5)


def test_holdout_toy_is_deterministic_and_partitions():
    s = _toy_stream(10, seed=7)
    a, b = inductive_holdout(s, 0.2, seed=5), inductive_holdout(s, 0.2, seed=5)
    parts = [a.train, a.val, a.test_seen, a.test_unseen, a.dropped]
    for x, y in zip(parts, [b.train, b.val, b.test_seen, b.test_unseen, b.dropped]):
        np.testing.assert_array_equal(x, y)
    joined = np.concatenate(parts)
    assert sorted(joined.tolist()) == list(range(10))


@settings(max_examples=40, deadline=None)
@given(st.integers(8, 80), st.integers(3, 15), st.floats(0.0, 0.5), st.integers(0, 10 ** 6))
def test_holdout_invariants(n, nodes, frac, seed):
    s = _toy_stream(n, nodes, seed)
    try:
        split = inductive_holdout(s, frac, seed=seed)
    except ContractError:
        return
    joined = np.concatenate([split.train, split.val, split.test_seen, split.test_unseen, split.dropped])
    assert Counter(joined.tolist()) == Counter(range(n))
    masked = np.array(sorted(split.masked_nodes), dtype=np.int64)
    assert not np.any(np.isin(s.src[split.train], masked) | np.isin(s.dst[split.train], masked))
    assert not np.any(np.isin(s.src[split.test_seen], masked) | np.isin(s.dst[split.test_seen], masked))
    unseen = split.test_unseen
    assert np.all(np.isin(s.src[unseen], masked) | np.isin(s.dst[unseen], masked))
    assert s.t[split.train].max(initial=-np.inf) <= s.t[split.val].min(initial=np.inf)
