"""Self-check suite: finite-difference gradients of every model part and independent oracles."""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from typing import Callable, Optional, TextIO

import numpy as np

from ..autodiff import Parameter, Tensor, gradient_check, ops
from ..data.synthetic import planted_successor_stream
from ..event.layers import EdgeDecoder
from ..event.models import TGAT, TGAT_CONFIGS, TGN, TGN_CONFIGS, TgatConfig, TgnConfig
from ..event.time_encoding import TimeEncoder
from ..snapshot.cells import ChebConv, GConvGRU, GConvLSTM
from ..snapshot.evolve import EvolveGCNH, EvolveGCNO
from ..snapshot.graph_ops import scaled_laplacian, sym_norm_adjacency
from ..train.metrics import average_precision, roc_auc

GRAD_TOL = 1e-4
EVOLVE_H_TOL = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tol)

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.3e} (tol {self.tol:.0e})"


def _random_graph(rng: np.random.Generator, n: int):
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j and rng.random() < 0.5]
    if not pairs:
        pairs = [(0, min(1, n - 1))]
    edges = np.array(pairs, dtype=np.int64)
    weights = rng.uniform(0.5, 2.0, size=len(pairs))
    return edges, weights


def _sq(t: Tensor) -> Tensor:
    """A scalar loss with nonzero gradient everywhere: sum of w ⊙ t with fixed random w."""
    w = np.random.default_rng(123).normal(size=t.shape)
    return ops.sum_(t * Tensor(w))


def primitive_cases(rng: np.random.Generator) -> list[tuple[str, Callable[[], Tensor], list[Parameter]]]:
    """One gradient case per differentiable primitive on small random shapes."""
    def p(*shape, positive=False):
        v = rng.normal(size=shape)
        return Parameter(np.abs(v) + 0.5 if positive else v)

    a, b = p(3, 4), p(3, 4)
    m1, m2 = p(3, 4), p(4, 2)
    bm1, bm2 = p(2, 3, 4), p(2, 4, 3)
    bias = p(4)
    pos = p(3, 4, positive=True)
    x = p(3, 4)
    idx = np.array([2, 0, 2, 1])
    cases = [
        ("add", lambda: _sq(ops.add(a, b)), [a, b]),
        ("sub", lambda: _sq(ops.sub(a, b)), [a, b]),
        ("mul", lambda: _sq(ops.mul(a, b)), [a, b]),
        ("div", lambda: _sq(ops.div(a, pos)), [a, pos]),
        ("matmul", lambda: _sq(ops.matmul(m1, m2)), [m1, m2]),
        ("matmul_batched", lambda: _sq(ops.matmul(bm1, bm2)), [bm1, bm2]),
        ("broadcast_add_bias", lambda: _sq(ops.broadcast_add_bias(x, bias)), [x, bias]),
        ("expand", lambda: _sq(ops.expand(bias, (3, 4))), [bias]),
        ("transpose", lambda: _sq(ops.transpose(x)), [x]),
        ("reshape", lambda: _sq(ops.reshape(x, (2, 6))), [x]),
        ("concat", lambda: _sq(ops.concat([a, b], axis=1)), [a, b]),
        ("slice", lambda: _sq(x[1:, ::2]), [x]),
        ("index_select", lambda: _sq(ops.index_select(x, idx)), [x]),
        ("scatter_add", lambda: _sq(ops.scatter_add(m1, np.array([0, 2, 0]), 4)), [m1]),
        ("sum", lambda: _sq(ops.sum_(x, axis=0)), [x]),
        ("mean", lambda: _sq(ops.mean(x, axis=1)), [x]),
        ("sigmoid", lambda: _sq(ops.sigmoid(x)), [x]),
        ("tanh", lambda: _sq(ops.tanh(x)), [x]),
        ("relu", lambda: _sq(ops.relu(x)), [x]),
        ("exp", lambda: _sq(ops.exp(x)), [x]),
        ("log", lambda: _sq(ops.log(pos)), [pos]),
        ("sqrt", lambda: _sq(ops.sqrt(pos)), [pos]),
        ("cos", lambda: _sq(ops.cos(x)), [x]),
        ("softplus", lambda: _sq(ops.softplus(x)), [x]),
        ("softmax", lambda: _sq(ops.softmax(x, axis=1)), [x]),
    ]
    return cases


def _snapshot_cases(rng: np.random.Generator):
    n, f, h = 4, 3, 3
    edges, weights = _random_graph(rng, n)
    L = scaled_laplacian(edges, weights, n)
    A = sym_norm_adjacency(edges, weights, n)
    X = [Tensor(rng.normal(size=(n, f))) for _ in range(2)]

    conv = ChebConv(f, h, 2, rng)
    conv.bias.data[:] = rng.normal(size=h)
    yield "cheb_conv (K=2)", lambda: _sq(conv(X[0], L)), conv.parameters(), GRAD_TOL

    conv3 = ChebConv(f, h, 3, rng)
    yield "cheb_conv (K=3)", lambda: _sq(conv3(X[0], L)), conv3.parameters(), GRAD_TOL

    gru = GConvGRU(f, h, 2, rng)

    def gru_loss():
        s = gru.init_state(n)
        for x in X:
            s = gru(x, s, L)
        return _sq(s.H)
    yield "gconv_gru (2 steps)", gru_loss, gru.parameters(), GRAD_TOL

    lstm = GConvLSTM(f, h, 2, rng)

    def lstm_loss():
        s = lstm.init_state(n)
        for x in X:
            s = lstm(x, s, L)
        return _sq(s.H) + _sq(s.C)
    yield "gconv_lstm (2 steps)", lstm_loss, lstm.parameters(), GRAD_TOL

    evo = EvolveGCNO(f, h, rng)

    def evo_loss():
        s = evo.init_state()
        total = None
        for x in X:
            out, s = evo(x, s, A, ops.tanh)
            total = _sq(out) if total is None else total + _sq(out)
        return total
    yield "evolvegcn_o (2 steps)", evo_loss, evo.parameters(), GRAD_TOL

    evh = EvolveGCNH(f, h, rng)

    def evh_loss():
        s = evh.init_state()
        total = None
        for x in X:
            out, s = evh(x, s, A, ops.tanh)
            total = _sq(out) if total is None else total + _sq(out)
        return total
    yield "evolvegcn_h (2 steps)", evh_loss, evh.parameters(), EVOLVE_H_TOL


def small_tgn_config(cfg: TgnConfig) -> TgnConfig:
    return TgnConfig(embedding=cfg.embedding, aggregator=cfg.aggregator, use_memory=cfg.use_memory,
                     num_layers=cfg.num_layers, heads=2, d_mem=4, d_emb=4, d_time=4, neighbors=3, dropout=0.0)


def small_tgat_config(cfg: TgatConfig) -> TgatConfig:
    return TgatConfig(agg_method=cfg.agg_method, attn_mode=cfg.attn_mode, time_mode=cfg.time_mode,
                      num_layers=cfg.num_layers, hidden=4, dropout=0.0, heads=2, d_time=4, neighbors=3)


def event_loss_builder(model, stream, warmup: int = 12, scored: int = 4):
    """Warm the model state on the first events, then return a BCE-style loss over the next few."""
    state = model.new_state()
    n = stream.num_nodes
    for a in range(0, warmup, 6):
        b = np.arange(a, min(a + 6, warmup))
        neg = (stream.dst[b] + 2) % n
        _, _, write = model.link_logits(state, stream.src[b], stream.dst[b], neg, stream.t[b])
        model.commit(state, write)
        model.observe(state, stream.src[b], stream.dst[b], stream.t[b], b)
    b = np.arange(warmup, warmup + scored)
    neg = (stream.dst[b] + 2) % n

    def loss():
        pl, nl, _ = model.link_logits(state, stream.src[b], stream.dst[b], neg, stream.t[b])
        return ops.sum_(ops.softplus(-pl)) + ops.sum_(ops.softplus(nl))
    return loss


def _event_cases(seed: int):
    stream = planted_successor_stream(num_nodes=6, num_events=20, feature_dim=3, seed=seed)
    feats = np.random.default_rng(seed + 5).normal(size=(stream.num_nodes, 3))
    for name, cfg in TGN_CONFIGS.items():
        rng = np.random.default_rng(seed)
        small = small_tgn_config(cfg)
        nf = None if small.use_memory else np.random.default_rng(seed + 5).normal(size=(6, 4))
        model = TGN(small, stream.num_nodes, stream.features, rng, node_features=nf)
        yield f"tgn {name}", event_loss_builder(model, stream), model.parameters(), GRAD_TOL
    for name, (cfg, _) in TGAT_CONFIGS.items():
        if name.startswith("TGAT-0."):
            continue  # learning-rate rows share the TGAT-attn architecture
        rng = np.random.default_rng(seed)
        model = TGAT(small_tgat_config(cfg), stream.num_nodes, stream.features, rng, node_features=feats)
        yield f"tgat {name}", event_loss_builder(model, stream), model.parameters(), GRAD_TOL

    rng = np.random.default_rng(seed)
    dec = EdgeDecoder(4, rng)
    za, zb = Tensor(rng.normal(size=(5, 4))), Tensor(rng.normal(size=(5, 4)))
    yield "edge_decoder", lambda: _sq(dec(za, zb)), dec.parameters(), GRAD_TOL

    model = TGN(small_tgn_config(TGN_CONFIGS["TGN-attn"]), stream.num_nodes, stream.features, rng)
    state = model.new_state()
    b = np.arange(0, 12)
    model.advance(state, stream.src[b], stream.dst[b], stream.t[b], b)
    nodes, times = np.array([1, 2, 3]), np.array([12.0, 12.0, 12.0])

    def reg_loss():
        pred, _ = model.regress(state, nodes, times)
        diff = pred - Tensor(np.array([0.5, -1.0, 2.0]))
        return ops.sum_(diff * diff)
    yield "node_regressor + attention embedding", reg_loss, model.parameters(), GRAD_TOL

    te = TimeEncoder(5)
    dts = np.array([0.0, 0.5, 3.0, 10.0])
    yield "time_encoder", lambda: _sq(te(dts)), te.parameters(), GRAD_TOL


def gradient_suite(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    for name, builder, params in primitive_cases(rng):
        out.append(CheckResult(f"primitive {name}", gradient_check(builder, params), 1e-5))
    for name, builder, params, tol in _snapshot_cases(rng):
        out.append(CheckResult(name, gradient_check(builder, params), tol))
    for name, builder, params, tol in _event_cases(seed):
        out.append(CheckResult(name, gradient_check(builder, params), tol))
    return out


# dense oracles -------------------------------------------------------------

def _sig(x):
    return 1.0 / (1.0 + np.exp(-x))


def dense_gru_rollout(cell: GConvGRU, xs: list[np.ndarray]) -> np.ndarray:
    """Plain-numpy GRU with the weights of a K=1 graph GRU (graph mixing vanishes)."""
    def lin(conv, v):
        return v @ conv.theta[0].data + conv.bias.data
    h = np.zeros((xs[0].shape[0], cell.hidden))
    for x in xs:
        z = _sig(lin(cell.conv_xz, x) + lin(cell.conv_hz, h))
        r = _sig(lin(cell.conv_xr, x) + lin(cell.conv_hr, h))
        n = np.tanh(lin(cell.conv_xh, x) + lin(cell.conv_hh, r * h))
        h = z * h + (1 - z) * n
    return h


def dense_lstm_rollout(cell: GConvLSTM, xs: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Plain-numpy peephole LSTM with the weights of a K=1 graph LSTM."""
    def gate(g, x, h):
        cx, ch = cell.conv_x[g], cell.conv_h[g]
        return x @ cx.theta[0].data + cx.bias.data + h @ ch.theta[0].data + ch.bias.data
    h = np.zeros((xs[0].shape[0], cell.hidden))
    c = np.zeros_like(h)
    for x in xs:
        i = _sig(gate("i", x, h) + cell.w_ci.data * c)
        f = _sig(gate("f", x, h) + cell.w_cf.data * c)
        c = f * c + i * np.tanh(gate("c", x, h))
        o = _sig(gate("o", x, h) + cell.w_co.data * c)
        h = o * np.tanh(c)
    return h, c


def brute_force_ap(scores, labels) -> float:
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    hits, precisions = 0, []
    for rank, i in enumerate(order, start=1):
        if labels[i] == 1:
            hits += 1
            precisions.append(hits / rank)
    return sum(precisions) / len(precisions)


def brute_force_auc(scores, labels) -> float:
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            total += 1.0 if p > q else 0.5 if p == q else 0.0
    return total / (len(pos) * len(neg))


def random_ranking_instance(rng: np.random.Generator):
    n = int(rng.integers(2, 65))
    labels = rng.integers(0, 2, size=n)
    i, j = rng.choice(n, size=2, replace=False)
    labels[i], labels[j] = 1, 0
    scores = np.round(rng.random(n), int(rng.integers(1, 4)))  # rounding makes ties common
    return scores, labels


def oracle_suite(seed: int = 0, steps: int = 10, instances: int = 100) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []
    xs = [rng.normal(size=(1, 3)) for _ in range(steps)]
    L = scaled_laplacian(np.zeros((0, 2), dtype=np.int64), np.zeros(0), 1)

    gru = GConvGRU(3, 4, 1, rng)
    for conv in (gru.conv_xz, gru.conv_hz, gru.conv_xr, gru.conv_hr, gru.conv_xh, gru.conv_hh):
        conv.bias.data[:] = rng.normal(size=4) * 0.5
    s = gru.init_state(1)
    for x in xs:
        s = gru(Tensor(x), s, L)
    out.append(CheckResult("gconv_gru vs dense GRU (10 steps)",
                           float(np.max(np.abs(s.H.data - dense_gru_rollout(gru, xs)))), 1e-10))

    lstm = GConvLSTM(3, 4, 1, rng)
    for g in "ifco":
        lstm.conv_x[g].bias.data[:] = rng.normal(size=4) * 0.5
    s = lstm.init_state(1)
    for x in xs:
        s = lstm(Tensor(x), s, L)
    h_ref, c_ref = dense_lstm_rollout(lstm, xs)
    err = max(np.max(np.abs(s.H.data - h_ref)), np.max(np.abs(s.C.data - c_ref)))
    out.append(CheckResult("gconv_lstm vs dense peephole LSTM (10 steps)", float(err), 1e-10))

    ap_err = auc_err = 0.0
    for _ in range(instances):
        scores, labels = random_ranking_instance(rng)
        ap_err = max(ap_err, abs(average_precision(scores, labels) - brute_force_ap(list(scores), list(labels))))
        auc_err = max(auc_err, abs(roc_auc(scores, labels) - brute_force_auc(list(scores), list(labels))))
    out.append(CheckResult(f"average_precision vs brute force ({instances} instances)", ap_err, 1e-12))
    out.append(CheckResult(f"roc_auc vs pairwise enumeration ({instances} instances)", auc_err, 1e-12))
    return out


def run_checks(stream: Optional[TextIO] = None, seed: int = 0) -> int:
    """Print one PASS/FAIL line per check; returns 0 iff every check passed."""
    stream = stream or sys.stdout
    start = time.perf_counter()
    results: list[CheckResult] = []
    for suite in (gradient_suite, oracle_suite):
        for r in suite(seed):
            print(r.line(), file=stream, flush=True)
            results.append(r)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed in {time.perf_counter() - start:.1f}s",
          file=stream)
    return 0 if failed == 0 else 1
