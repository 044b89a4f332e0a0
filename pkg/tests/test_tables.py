import math

import numpy as np
import pytest

from invshift.domain import DISK, INTERVAL, SQUARE, build_grid
from invshift.quadrature import norm_l2
from invshift.tables import (
    BUCKETS,
    TableId,
    _bucket,
    named_start,
    observed_order,
    run_sweep,
    run_table,
)


def test_table_id_parse():
    assert TableId.parse("1") is TableId.T1
    assert TableId.parse("t7") is TableId.T7
    with pytest.raises(ValueError):
        TableId.parse("8")


def test_buckets():
    assert _bucket(5e-2) == ">=1e-2"
    assert _bucket(5e-4) == "1e-4"
    assert _bucket(1e-3) == "1e-3"
    assert _bucket(3e-9) == "<=1e-8"
    assert _bucket(0.0) == "<=1e-8"


def test_interval_table_layout():
    rep = run_table("T1")
    assert len(rep.rows) == 8
    assert rep.columns[:7] == ["k", "exact", "shift", "mu", "gamma", "rq_phi", "rq_v"]
    assert rep.rows[0][3] == pytest.approx(9.8688, abs=1e-4)


def test_statistical_table_scaled():
    rep = run_table("T3", scale=0.1)
    assert rep.notes["runs"] == 10
    assert [r[0] for r in rep.rows] == list(BUCKETS)
    assert sum(r[2] for r in rep.rows) == 10
    assert len(rep.details) == 10
    rep4 = run_table("T4", scale=0.05, seed=11)
    assert rep4.notes["seed"] == 11
    assert all(0 < d["shift"] < 2500 * math.pi**2 for d in rep4.details)


def test_interval_sweep_order():
    rep = run_sweep(INTERVAL, [101, 201, 401], sigma=math.pi**2 - 0.1, exact=math.pi**2)
    assert 1.8 <= rep.notes["observed_order"] <= 2.2
    rep2 = run_sweep(INTERVAL, [101, 201], sigma=math.pi**2 - 0.1)
    assert rep2.rows[0][3] == pytest.approx(math.pi**2)


def test_square_sweep_ratio():
    exact = 18 * math.pi**2
    rep = run_sweep(SQUARE, [101, 201], sigma=exact - 0.1, exact=exact)
    assert rep.rows[1][5] == pytest.approx(4.0, rel=0.05)


def test_sweep_needs_two_grids():
    with pytest.raises(ValueError):
        run_sweep(INTERVAL, [101], sigma=9.0)
    with pytest.raises(ValueError):
        observed_order([0.1], [1e-3])


def test_observed_order_fit():
    h = np.array([0.1, 0.05, 0.025])
    assert observed_order(h, 3 * h**2) == pytest.approx(2.0)


def test_named_starts():
    g = build_grid(INTERVAL, 21)
    assert np.all(named_start(g).values == 1.0)
    assert named_start(g, "sin3").values[7] == pytest.approx(math.sin(3 * math.pi * 7 / 20))
    assert named_start(g, "poly").values[-1] == 0.0
    sq = build_grid(SQUARE, 11)
    assert named_start(sq, "sin1x2").values[5, 2] == pytest.approx(math.sin(math.pi / 2) * math.sin(2 * math.pi * 0.2))
    d = build_grid(DISK, 41)
    assert abs(named_start(d, "sin2").values[-1]) < 1e-12
    assert norm_l2(named_start(d, "poly")) > 0
    with pytest.raises(ValueError):
        named_start(g, "cosine")
