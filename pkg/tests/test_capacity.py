"""Oracle tests for the code-capacity Monte-Carlo harness."""

import math

import numpy as np
import pytest

from tileqec.capacity import (
    fifty_percent_monotone,
    logical_rate_curve,
    run_trials,
    threshold_estimate,
    thresholds_csv_header,
    thresholds_csv_row,
    trials_csv_header,
    trials_csv_row,
    wilson_ci,
)
from tileqec.channel import BiasedChannel
from tileqec.deform import ti_linear
from tileqec.tilecode import build_open


def test_wilson_ci_edges():
    lo, hi = wilson_ci(0, 100)
    z = 1.96
    assert lo == 0.0
    assert math.isclose(hi, (z * z / 100) / (1 + z * z / 100), rel_tol=1e-9)
    lo, hi = wilson_ci(100, 100)
    assert math.isclose(hi, 1.0)
    assert math.isclose(lo, 1 / (1 + z * z / 100), rel_tol=1e-9)


def test_wilson_ci_contains_point_estimate():
    for k, n in [(3, 10), (17, 40), (250, 1000)]:
        lo, hi = wilson_ci(k, n)
        assert lo <= k / n <= hi


def test_zero_rate_zero_failures():
    code = build_open(6)
    r = run_trials(code, None, BiasedChannel(0.0, 1.0), 200, seed=1)
    assert r.failures == 0
    assert r.trials == 200


def test_high_rate_fails_often():
    code = build_open(6)
    r = run_trials(code, None, BiasedChannel(0.75, math.inf), 400, seed=2)
    assert r.rate > 0.3


def test_seed_reproducibility():
    code = build_open(6)
    dmap = ti_linear(code)
    ch = BiasedChannel(0.2, 10.0)
    a = run_trials(code, dmap, ch, 300, seed=5)
    b = run_trials(code, dmap, ch, 300, seed=5)
    assert a.failures == b.failures
    c = run_trials(code, dmap, ch, 300, seed=6)
    assert (a.failures, a.seed) != (c.failures, c.seed)


def test_threshold_estimate_synthetic_crossing():
    # log p_L lines crossing exactly at p = 0.1
    ps = [0.06, 0.08, 0.10, 0.12, 0.14]
    small = {p: math.exp(-2 + 10 * (p - 0.1)) for p in ps}
    large = {p: math.exp(-2 + 30 * (p - 0.1)) for p in ps}
    data = {
        6: [(p, small[p]) for p in ps],
        10: [(p, large[p]) for p in ps],
    }
    p_th, spread = threshold_estimate(data, method="crossing")
    assert abs(p_th - 0.1) < 1e-9
    assert spread == 0.0


def test_threshold_estimate_requires_two_sizes():
    with pytest.raises(ValueError):
        threshold_estimate({6: [(0.1, 0.2)]}, method="crossing")


def test_threshold_estimate_mismatched_grids():
    with pytest.raises(ValueError):
        threshold_estimate(
            {6: [(0.1, 0.2)], 8: [(0.2, 0.1)]}, method="crossing"
        )


def test_threshold_estimate_no_crossing():
    ps = [0.06, 0.08, 0.10]
    data = {
        6: [(p, 0.5) for p in ps],
        8: [(p, 0.1) for p in ps],
    }
    assert threshold_estimate(data, method="crossing") is None


def test_fss_on_synthetic_scaling_data():
    # generate data from the fss ansatz itself and recover p_th
    p_th, nu = 0.1, 1.3
    sizes = (6, 8, 10)
    ps = np.linspace(0.08, 0.12, 7)
    data = {}
    for L in sizes:
        rows = []
        for p in ps:
            x = (p - p_th) * L ** (1 / nu)
            rows.append((float(p), 0.3 + 1.2 * x + 0.4 * x * x + 0.05 / L))
        data[L] = rows
    est, spread = threshold_estimate(data, method="fss")
    assert abs(est - p_th) < 0.005


def test_fifty_percent_monotone():
    assert fifty_percent_monotone({6: 0.9, 8: 0.8, 10: 0.7})
    assert not fifty_percent_monotone({6: 0.7, 8: 0.8, 10: 0.7})


def test_csv_emitters():
    code = build_open(6)
    r = run_trials(code, None, BiasedChannel(0.1, 1.0), 50, seed=3, code_id="open6")
    header = trials_csv_header()
    row = trials_csv_row(r, 6)
    assert len(header.split(",")) == len(row.split(","))
    assert thresholds_csv_header().startswith("variant,")
    assert len(thresholds_csv_row("css", 1.0, 0.1, 0.01).split(",")) == 5


def test_logical_rate_curve_shapes():
    code = build_open(6)
    out = logical_rate_curve(code, None, [0.05, 0.1], 1.0, 100, seed=4)
    assert len(out) == 2
    for (p, r) in out:
        assert 0.0 <= r.rate <= 1.0
