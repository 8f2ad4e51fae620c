"""Oracle tests for biased Pauli channels and the hashing bound."""

import math

import numpy as np
import pytest

from tileqec.channel import (
    BiasedChannel,
    decoder_priors,
    hashing_bound,
    sample_error,
    sample_error_batch,
)


def test_rate_split_finite_bias():
    ch = BiasedChannel(0.3, 1.0)
    assert math.isclose(ch.p_x, 0.1) and math.isclose(ch.p_y, 0.1)
    assert math.isclose(ch.p_z, 0.1)
    ch = BiasedChannel(0.3, 4.0)
    assert math.isclose(ch.p_x, 0.05)
    assert math.isclose(ch.p_z, 0.2)
    assert math.isclose(ch.p_x + ch.p_y + ch.p_z, 0.3)


def test_infinite_bias_is_pure_z():
    ch = BiasedChannel(0.1, math.inf)
    assert ch.infinite_bias
    assert ch.p_x == 0 and ch.p_y == 0 and ch.p_z == 0.1


def test_invalid_parameters():
    with pytest.raises(ValueError):
        BiasedChannel(-0.1, 1.0)
    with pytest.raises(ValueError):
        BiasedChannel(1.2, 1.0)
    with pytest.raises(ValueError):
        BiasedChannel(0.1, 0.0)


def test_sample_zero_rate():
    rng = np.random.default_rng(0)
    e = sample_error(50, BiasedChannel(0.0, 1.0), rng)
    assert not e.xbits.any() and not e.zbits.any()


def test_sample_infinite_bias_marginals():
    rng = np.random.default_rng(1)
    n = 1_000_000
    e = sample_error(n, BiasedChannel(0.1, math.inf), rng)
    assert not e.xbits.any()
    rate = e.zbits.mean()
    assert abs(rate - 0.1) < 3 * math.sqrt(0.1 * 0.9 / n)


def test_sample_depolarizing_marginals():
    rng = np.random.default_rng(2)
    n = 1_000_000
    e = sample_error(n, BiasedChannel(0.3, 1.0), rng)
    x_only = ((e.xbits == 1) & (e.zbits == 0)).mean()
    y = ((e.xbits == 1) & (e.zbits == 1)).mean()
    z_only = ((e.xbits == 0) & (e.zbits == 1)).mean()
    tol = 3 * math.sqrt(0.1 * 0.9 / n)
    assert abs(x_only - 0.1) < tol
    assert abs(y - 0.1) < tol
    assert abs(z_only - 0.1) < tol


def test_decoder_priors():
    assert decoder_priors(BiasedChannel(0.1, math.inf)) == (0.0, 0.1)
    px, pz = decoder_priors(BiasedChannel(0.3, 1.0))
    assert math.isclose(px, 0.2) and math.isclose(pz, 0.2)


def test_priors_match_sampled_marginals():
    ch = BiasedChannel(0.2, 10.0)
    rng = np.random.default_rng(3)
    e = sample_error(1_000_000, ch, rng)
    px, pz = decoder_priors(ch)
    assert abs(e.xbits.mean() - px) < 3 * math.sqrt(px * (1 - px) / 1e6)
    assert abs(e.zbits.mean() - pz) < 3 * math.sqrt(pz * (1 - pz) / 1e6)


def test_batch_reproducible_from_seed():
    ch = BiasedChannel(0.2, 3.0)
    a = sample_error_batch(40, ch, np.random.default_rng(9), 100)
    b = sample_error_batch(40, ch, np.random.default_rng(9), 100)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_hashing_bound_limits():
    assert hashing_bound(math.inf) == 0.5
    assert abs(hashing_bound(1.0) - 0.1893) < 1e-3


def test_hashing_bound_monotone():
    # the depolarizing point η=1 is the minimum; the bound rises with bias
    etas = [1, 3, 10, 30, 100, 1000]
    vals = [hashing_bound(e) for e in etas]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 0.5
