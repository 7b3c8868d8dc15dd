import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcf import (
    ExplicitExposure,
    FullExposure,
    asymmetry_ratio,
    build_correlation_index,
    correlation,
    global_ctr,
    ingest_text,
    item_item_topk,
    local_ctr,
)
from lcf.correlate import CooccurrenceTable
from lcf.errors import UndefinedCTRError, UndefinedRatioError, UnsupportedExposureError

from conftest import random_dataset
from oracles import naive_index

A, B, C = 0, 1, 2
FULL = FullExposure()


def test_global_ctr(toy4):
    assert global_ctr(toy4, FULL, A) == 0.75
    assert global_ctr(toy4, FULL, B) == 0.5
    assert global_ctr(toy4, None, C) == 0.25


def test_global_ctr_all_exposed_users_clicked(toy4):
    exp = ExplicitExposure(toy4, {C: [3]})
    assert global_ctr(toy4, exp, C) == 1.0


def test_global_ctr_no_exposure(toy4):
    ds = ingest_text("u1,a,purchase,1,0\nu2,b,purchase,1,0\n")
    exp = ExplicitExposure(ds, {0: [0], 1: [1]})
    assert global_ctr(ds, exp, 0) == 1.0
    empty = ExplicitExposure.__new__(ExplicitExposure)
    empty.sets, empty.n_users = {0: np.empty(0, np.int64)}, 2
    with pytest.raises(UndefinedCTRError):
        global_ctr(ds, empty, 0)


def test_local_ctr(toy4):
    assert local_ctr(toy4, FULL, A, B) == 2 / 3
    assert local_ctr(toy4, FULL, C, A) == 0.0
    for i in (A, B, C):
        assert local_ctr(toy4, FULL, i, i) == 1.0


def test_local_ctr_empty_support(toy4):
    exp = ExplicitExposure(toy4, {A: [0, 1, 2], B: [0, 1], C: [3]})
    with pytest.raises(UndefinedCTRError):
        local_ctr(toy4, exp, A, C)


def test_correlation_toy4(toy4):
    e = correlation(toy4, FULL, A, B, theta1=0)
    assert e.r == 2 / 3 - 1 / 2
    assert e.r == pytest.approx(1 / 6, abs=1e-15)
    assert e.local_ctr == 2 / 3 and e.support == 3


def test_self_correlation(toy4):
    for i in (A, B, C):
        assert correlation(toy4, FULL, i, i, theta1=0).r == 1 - global_ctr(toy4, FULL, i)


def test_threshold_is_strict(toy4):
    assert correlation(toy4, FULL, A, B, theta1=3) is None
    assert correlation(toy4, FULL, A, B, theta1=2) is not None


def test_correlation_range_check(toy4):
    with pytest.raises(IndexError):
        correlation(toy4, FULL, A, 3)


def test_asymmetry_toy4(toy4):
    ratio, ctr_ratio = asymmetry_ratio(toy4, A, B)
    assert ratio == pytest.approx(2 / 3, abs=1e-12)
    assert ctr_ratio == pytest.approx(2 / 3, abs=1e-12)
    assert asymmetry_ratio(toy4, A, A) == (1.0, 1.0)


def test_asymmetry_zero_denominator():
    # L(x) = {1,2}, L(y) = {1,3} over four users: r_x(y) = 1/2 - 1/2 = 0
    ds = ingest_text("1,x,purchase,1,0\n2,x,purchase,1,0\n1,y,purchase,1,0\n3,y,purchase,1,0\n4,z,purchase,1,0\n")
    with pytest.raises(UndefinedRatioError):
        asymmetry_ratio(ds, 0, 1)


def test_asymmetry_rejects_explicit(toy4):
    exp = ExplicitExposure(toy4, {A: range(4), B: range(4), C: range(4)})
    with pytest.raises(UnsupportedExposureError):
        asymmetry_ratio(toy4, A, B, exp)


def test_index_toy4(toy4):
    index = build_correlation_index(toy4, FULL, theta1=0)
    got = {(e.source, e.target): e.r for e in index}
    assert set(got) == {(A, B), (A, C), (B, A), (B, C), (C, A), (C, B)}
    assert [t for t, _ in item_item_topk(index, A, 5)] == [B, C]
    assert [t for t, _ in item_item_topk(index, C, 5)] == [B, A]
    assert got[(B, A)] == 1.0 - 0.75
    assert got[(C, A)] == -0.75


def test_index_empty_cases(toy4):
    assert build_correlation_index(toy4, FULL, theta1=3).n_entries == 0
    empty = build_correlation_index(toy4, FULL, theta1=0, sources=[])
    assert len(empty) == 0 and empty.n_entries == 0


def test_topk(toy4):
    index = build_correlation_index(toy4, FULL, theta1=0)
    top = item_item_topk(index, A, 2)
    assert top[0] == (B, 2 / 3 - 1 / 2)
    assert top[1] == (C, 0 / 3 - 1 / 4)
    assert item_item_topk(index, A, 0) == []
    partial = build_correlation_index(toy4, FULL, theta1=0, sources=[B])
    with pytest.raises(KeyError):
        item_item_topk(partial, A, 2)


def test_tie_break_support_then_ordinal():
    # r ties are broken by larger support, then lower target ordinal
    rows = ["1,s,purchase,1,0", "2,s,purchase,1,0", "1,t1,purchase,1,0", "1,t2,purchase,1,0",
            "3,t1,purchase,1,0", "3,t2,purchase,1,0"]
    ds = ingest_text("\n".join(rows) + "\n")
    index = build_correlation_index(ds, FULL, theta1=0, sources=[0])
    assert [e.target for e in index.entries(0)] == [1, 2]


def test_explicit_exposure_uses_intersections(toy4):
    exposure = {A: [0, 1, 2, 3], B: [0, 1, 2], C: [2, 3]}
    exp = ExplicitExposure(toy4, exposure)
    e = correlation(toy4, exp, A, B, theta1=0)
    assert e.support == 3 and e.local_ctr == 2 / 3
    assert e.r == 2 / 3 - 2 / 3
    e = correlation(toy4, exp, A, C, theta1=0)
    assert e.support == 1 and e.local_ctr == 0.0 and e.r == 0.0 - 0.5
    index = build_correlation_index(toy4, exp, theta1=0)
    assert index == _oracle_index(toy4, 0, exposure)


def _oracle_index(ds, theta1, exposure=None):
    from lcf.correlate import CorrelationIndex, _SourceEntries

    entries = {}
    for s, rows in naive_index(ds, theta1, exposure).items():
        cols = list(zip(*rows)) if rows else [[], [], [], []]
        entries[s] = _SourceEntries(np.array(cols[0], dtype=np.int64), np.array(cols[1], dtype=float),
                                    np.array(cols[2], dtype=float), np.array(cols[3], dtype=np.int64))
    return CorrelationIndex(ds.items, theta1, entries)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 4), st.booleans())
def test_index_matches_brute_force(seed, theta1, explicit):
    rng = np.random.default_rng(seed)
    ds = random_dataset(rng)
    exposure = None
    exp = FULL
    if explicit:
        exposure = {j: sorted(set(ds.liked[j].tolist()) | set(np.flatnonzero(rng.random(ds.n_users) < 0.5).tolist()))
                    for j in range(ds.n_items)}
        exp = ExplicitExposure(ds, exposure)
    index = build_correlation_index(ds, exp, theta1=theta1)
    assert index == _oracle_index(ds, theta1, exposure)
    for e in index:
        g = len(ds.liked[e.target]) / len(exp.exposed(ds, e.target))
        assert e.local_ctr - g == e.r
        assert e.r + g == pytest.approx(e.local_ctr, abs=1e-15)
        assert -1 <= e.r <= 1 and 0 <= e.local_ctr <= 1
        assert e.support > theta1 and e.source != e.target
        scalar = correlation(ds, exp, e.source, e.target, theta1)
        assert (scalar.r, scalar.local_ctr, scalar.support) == (e.r, e.local_ctr, e.support)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_asymmetry_identity_random(seed):
    ds = random_dataset(np.random.default_rng(seed))
    for i in range(ds.n_items):
        for j in range(ds.n_items):
            try:
                ratio, ctr_ratio = asymmetry_ratio(ds, i, j)
            except UndefinedRatioError:
                continue
            assert abs(ratio - ctr_ratio) < 1e-12


def test_workers_do_not_change_index():
    ds = random_dataset(np.random.default_rng(3), max_users=60, max_items=40)
    one = build_correlation_index(ds, theta1=1, workers=1)
    four = build_correlation_index(ds, theta1=1, workers=4)
    assert one == four
    assert one.to_csv() == four.to_csv()


def test_table_rows_agree_with_scalar_path(toy4):
    table = CooccurrenceTable(toy4)
    numer, support = table.row(A)
    assert numer.tolist() == [3, 2, 0] and support.tolist() == [3, 3, 3]


def test_csv_and_json(toy4):
    index = build_correlation_index(toy4, FULL, theta1=0)
    rows = list(csv.reader(io.StringIO(index.to_csv())))
    assert rows[0] == ["source", "target", "r", "local_ctr", "support"]
    assert rows[1] == ["a", "b", "0.166667", "0.666667", "3"]
    assert [r[0] for r in rows[1:]] == ["a", "a", "b", "b", "c", "c"]
    doc = json.loads(index.to_json())
    assert doc["theta1"] == 0
    assert doc["entries"][0] == {"source": "a", "target": "b", "r": "0.166667",
                                 "local_ctr": "0.666667", "support": 3}
    assert [len(index.head(1).entries(s)) for s in range(3)] == [1, 1, 1]
