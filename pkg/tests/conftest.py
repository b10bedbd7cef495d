"""Shared fixtures: small synthetic datasets and reduced model configs."""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from tgbench.data import parse_dtdg
from tgbench.data.synthetic import covid_like_document, interaction_stream, planted_successor_stream
from tgbench.event import TgatConfig, TgnConfig

DATA_DIR = Path(os.environ.get("TGBENCH_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def small_doc():
    return covid_like_document(num_nodes=8, days=24, neighbors=2, seed=3)


@pytest.fixture(scope="session")
def small_seq(small_doc):
    return parse_dtdg(small_doc, lag=4)


@pytest.fixture(scope="session")
def planted():
    return planted_successor_stream(num_nodes=20, num_events=200, feature_dim=4, seed=0)


@pytest.fixture(scope="session")
def bipartite():
    return interaction_stream(num_users=30, num_items=10, num_events=300, feature_dim=4, seed=1)


@pytest.fixture
def tiny_tgn():
    def make(**kw):
        base = dict(d_mem=6, d_emb=6, d_time=4, neighbors=3, heads=2, dropout=0.0)
        base.update(kw)
        return TgnConfig(**base)
    return make


@pytest.fixture
def tiny_tgat():
    def make(**kw):
        base = dict(hidden=6, d_time=4, neighbors=3, heads=2, dropout=0.0)
        base.update(kw)
        return TgatConfig(**base)
    return make


# ---------------------------------------------------------------- acceptance reporting

def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): an acceptance criterion")
    config._acceptance = {}


@pytest.fixture
def detail(request):
    """Mutable dict whose items are shown next to the criterion's PASS/FAIL line."""
    d: dict = {}
    request.node._criterion_detail = d
    return d


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.failed):
        return
    number, title = marker.args
    info = ", ".join(f"{k}={v}" for k, v in getattr(item, "_criterion_detail", {}).items())
    if rep.failed and call.excinfo is not None:
        reason = call.excinfo.exconly().splitlines()[0][:200]
        info = f"{info}; {reason}" if info else reason
    item.config._acceptance[number] = (title, rep.passed, info)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_acceptance", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, passed, info = results[number]
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{info}]" if info else ""))
