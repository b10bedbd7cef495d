"""Metrics, negative sampling, snapshot and event training loops, and run reports."""
from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from tgbench.autodiff import parameter_checksum
from tgbench.bench.check import brute_force_ap, brute_force_auc, random_ranking_instance
from tgbench.data import EventStream, temporal_split
from tgbench.data.snapshots import Snapshot, SnapshotSequence
from tgbench.errors import ConfigError, ContractError
from tgbench.event import TGN, TGN_CONFIGS
from tgbench.snapshot import SnapshotRegressor
from tgbench.train import (RunReport, accuracy, average_precision, evaluate_event_model,
                           evaluate_snapshot_model, mse, negative_sample, roc_auc, train_event_run,
                           train_snapshot_run)
from tgbench.train.event_loop import _replay


# ---------------------------------------------------------------- metrics

def test_mse_examples():
    assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mse([0, 0], [1, 3]) == 5.0
    with pytest.raises(ContractError):
        mse([], [])
    with pytest.raises(ContractError):
        mse([1.0], [1.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=30), st.randoms())
def test_mse_is_permutation_invariant(pairs, r):
    shuffled = list(pairs)
    r.shuffle(shuffled)
    p, y = zip(*pairs)
    ps, ys = zip(*shuffled)
    assert mse(p, y) == pytest.approx(mse(ps, ys), rel=1e-12, abs=1e-12)


def test_average_precision_examples():
    assert average_precision([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0
    assert average_precision([0.9, 0.8, 0.7], [1, 0, 1]) == pytest.approx((1 + 2 / 3) / 2, abs=1e-15)
    assert average_precision([0.1, 0.5, 0.3], [1, 1, 1]) == 1.0
    with pytest.raises(ContractError):
        average_precision([0.3, 0.2], [0, 0])


def test_average_precision_breaks_ties_by_input_order():
    assert average_precision([0.5, 0.5], [0, 1]) == 0.5
    assert average_precision([0.5, 0.5], [1, 0]) == 1.0


def test_roc_auc_examples():
    assert roc_auc([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0
    assert roc_auc([0.9, 0.8, 0.7], [1, 0, 1]) == 0.5
    assert roc_auc([0.4] * 6, [1, 0, 1, 0, 0, 1]) == 0.5
    with pytest.raises(ContractError):
        roc_auc([0.2, 0.3], [1, 1])


def test_accuracy_threshold():
    assert accuracy([0.5, 0.49, 0.9, 0.1], [1, 0, 1, 0]) == 1.0
    assert accuracy([0.2, 0.8], [1, 0]) == 0.0


def test_ranking_metrics_match_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(100):
        scores, labels = random_ranking_instance(rng)
        assert abs(average_precision(scores, labels) - brute_force_ap(list(scores), list(labels))) <= 1e-12
        assert abs(roc_auc(scores, labels) - brute_force_auc(list(scores), list(labels))) <= 1e-12


# ---------------------------------------------------------------- negative sampling

def test_two_destinations_force_the_complement(rng):
    neg = negative_sample(np.full(100, 4), [4, 9], rng)
    assert np.all(neg == 9)


def test_single_destination_equal_to_truth_is_rejected(rng):
    with pytest.raises(ContractError):
        negative_sample([3], [3], rng)
    with pytest.raises(ContractError):
        negative_sample([3], [], rng)


def test_negative_sampling_is_seeded():
    a = negative_sample(np.arange(50) % 7, np.arange(10), np.random.default_rng(5))
    b = negative_sample(np.arange(50) % 7, np.arange(10), np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)


def test_negative_sampling_is_uniform_over_the_rest():
    draws = negative_sample(np.full(100_000, 3), np.arange(10), np.random.default_rng(0))
    assert not np.any(draws == 3)
    counts = np.bincount(draws, minlength=10)[[i for i in range(10) if i != 3]]
    assert chisquare(counts).pvalue > 1e-3


# ---------------------------------------------------------------- snapshot training

def _constant_sequence(n=5, snapshots=10, lag=3):
    """A series that is identically zero once standardized: zero lag features, zero targets."""
    edges = np.array([[0, 1], [1, 0], [1, 2], [2, 1]], dtype=np.int64)
    snaps = tuple(Snapshot(edges, np.ones(4), np.zeros((n, lag)), np.zeros(n)) for _ in range(snapshots))
    return SnapshotSequence(n, lag, snaps)


@pytest.mark.parametrize("kind", ["gconv_gru", "gconv_lstm", "evolvegcn_o", "evolvegcn_h"])
def test_constant_target_is_learned(kind):
    report = train_snapshot_run(_constant_sequence(), kind, lr=0.01, epochs=50, seed=0, hidden=8)
    assert report.metrics["mse"] < 1e-3
    assert len(report.mse_series) == 2 and report.epochs_run == 50


def test_zero_epoch_run_is_the_untrained_model(small_seq):
    report = train_snapshot_run(small_seq, "gconv_gru", epochs=0, seed=7, hidden=8)
    model = SnapshotRegressor("gconv_gru", small_seq.lag, hidden=8, K=2, activation="relu",
                              rng=np.random.default_rng(7))
    train, test = temporal_split(small_seq, 0.8)
    overall, series = evaluate_snapshot_model(model, train, test)
    assert report.metrics["mse"] == overall and report.mse_series == series
    assert report.train_loss == [] and report.epochs_run == 0


def test_snapshot_run_is_deterministic(small_seq):
    a = train_snapshot_run(small_seq, "evolvegcn_h", epochs=5, seed=2, hidden=8)
    b = train_snapshot_run(small_seq, "evolvegcn_h", epochs=5, seed=2, hidden=8)
    assert a.metrics == b.metrics and a.train_loss == b.train_loss and a.mse_series == b.mse_series


def test_per_snapshot_stepping_runs(small_seq):
    r = train_snapshot_run(small_seq, "gconv_lstm", epochs=2, seed=0, hidden=4, step_mode="snapshot")
    assert np.isfinite(r.metrics["mse"]) and len(r.train_loss) == 2


def test_snapshot_run_rejects_unknown_names(small_seq):
    with pytest.raises(ConfigError):
        train_snapshot_run(small_seq, "gcn", epochs=1)
    with pytest.raises(ConfigError):
        train_snapshot_run(small_seq, "gconv_gru", epochs=1, optimizer="adagrad")


# ---------------------------------------------------------------- event training

def _small(name="TGN-attn"):
    return replace(TGN_CONFIGS[name], d_mem=16, d_emb=16, d_time=8, dropout=0.0)


def test_planted_rule_is_learned(planted):
    report = train_event_run(planted, "tgn", _small(), lr=1e-3, epochs=30, batch_size=20, patience=100, seed=0)
    assert report.metrics["ap_seen"] > 0.95


@pytest.mark.parametrize("name", list(TGN_CONFIGS))
def test_train_loss_decreases_over_first_five_epochs(planted, name):
    report = train_event_run(planted, "tgn", _small(name), lr=1e-3, epochs=5, batch_size=20, patience=100,
                             seed=0, resample_negatives=False)
    loss = report.train_loss
    assert all(b < a for a, b in zip(loss, loss[1:])), loss


def test_patience_stops_after_the_best_epoch(planted):
    report = train_event_run(planted, "tgn", _small(), lr=1e-9, epochs=40, batch_size=20, patience=3, seed=0)
    best, since = None, 0
    for v in report.val_metric:
        if best is None or v > best:
            best, since = v, 0
        else:
            since += 1
    assert report.epochs_run < 40
    assert since == 3


def test_event_run_is_deterministic(bipartite, tiny_tgn):
    kw = dict(lr=1e-3, epochs=2, batch_size=50, seed=4)
    a = train_event_run(bipartite, "tgn", tiny_tgn(), **kw)
    b = train_event_run(bipartite, "tgn", tiny_tgn(), **kw)
    assert a.metrics == b.metrics and a.train_loss == b.train_loss and a.val_metric == b.val_metric


def test_event_run_rejects_mismatches(bipartite, tiny_tgn, tiny_tgat):
    with pytest.raises(ConfigError):
        train_event_run(bipartite, "tgat", tiny_tgn(), epochs=1)
    with pytest.raises(ConfigError):
        train_event_run(bipartite, "tgn", tiny_tgn(), task="node_regression", epochs=1)
    with pytest.raises(ConfigError):
        train_event_run(bipartite, "tgn", tiny_tgn(), task="ranking", epochs=1)


def test_node_regression_on_converted_stream(small_seq, tiny_tgn):
    from tgbench.data import dtdg_to_ctdg
    stream = dtdg_to_ctdg(small_seq)
    report = train_event_run(stream, "tgn", tiny_tgn(), task="node_regression", lr=1e-3, epochs=2,
                             batch_size=20, seed=0)
    assert set(report.metrics) == {"mse"} and np.isfinite(report.metrics["mse"])


def test_evaluation_leaves_parameters_alone_and_replays_identically(bipartite, tiny_tgn):
    model = TGN(tiny_tgn(), bipartite.num_nodes, bipartite.features, np.random.default_rng(0))
    history, test = np.arange(200), np.arange(200, 300)
    before = parameter_checksum(model)
    runs = []
    for _ in range(2):
        state = _replay(model, bipartite, history, 50)
        runs.append(evaluate_event_model(model, state, bipartite, test, test % 4 == 0,
                                         np.random.default_rng(9), batch_size=50))
    assert parameter_checksum(model) == before
    assert runs[0] == runs[1]
    assert set(runs[0]) == {"ap_seen", "ap_unseen", "auc_seen", "auc_unseen", "accuracy"}


class _Oracle:
    """Scores true edges +10 and negatives -10; holds no state."""

    def eval(self):
        pass

    def link_logits(self, state, src, dst, neg, t, rng=None):
        class _V:
            def __init__(self, v):
                self.data = v
        return _V(np.full(len(src), 10.0)), _V(np.full(len(src), -10.0)), None

    def commit(self, state, write):
        pass

    def observe(self, *args):
        pass


def test_perfect_decoder_scores_one(bipartite):
    idx = np.arange(100)
    m = evaluate_event_model(_Oracle(), None, bipartite, idx, idx % 3 == 0, np.random.default_rng(0), 32)
    assert m == {"ap_seen": 1.0, "auc_seen": 1.0, "ap_unseen": 1.0, "auc_unseen": 1.0, "accuracy": 1.0}


def test_empty_partition_metrics_are_absent(bipartite):
    idx = np.arange(50)
    m = evaluate_event_model(_Oracle(), None, bipartite, idx, None, np.random.default_rng(0), 32)
    assert "ap_unseen" not in m and "auc_unseen" not in m and m["ap_seen"] == 1.0


def test_untrained_decoder_is_a_null_model(tiny_tgn):
    rng = np.random.default_rng(0)
    n, m = 60, 2000
    src, dst = rng.integers(0, n, size=m), rng.integers(0, n, size=m)
    dst = np.where(dst == src, (dst + 1) % n, dst)
    stream = EventStream(src, dst, np.arange(m, dtype=float), rng.normal(size=(m, 3)), n)
    model = TGN(tiny_tgn(), n, stream.features, np.random.default_rng(1))
    out = evaluate_event_model(model, model.new_state(), stream, np.arange(m), None, np.random.default_rng(2))
    assert abs(out["auc_seen"] - 0.5) <= 0.05


# ---------------------------------------------------------------- reports

def test_run_report_json_round_trip():
    r = RunReport(config={"model": "tgn", "lr": 1e-4}, seed=3, train_loss=[0.7, 0.5], val_metric=[0.6],
                  metrics={"ap_seen": 0.9, "auc_seen": 0.91}, epochs_run=2, wall_seconds=1.5)
    back = RunReport.from_json(r.to_json())
    assert back == r
    cols = back.metric_columns()
    assert cols["mse"] == "" and float(cols["ap_seen"]) == 0.9
