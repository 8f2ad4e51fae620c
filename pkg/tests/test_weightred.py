"""Oracle tests for scaled checks, materialized symmetries, cascade decoding."""

import numpy as np
import pytest

from tileqec.weightred import (
    admissible,
    base_check,
    decode_batch,
    decode_infinite_bias,
    is_logical_failure,
    k_star,
    materialized_symmetry,
    monte_carlo_failure,
    ord_mod,
    scaled_check,
    symmetry_is_identity,
    weight4_check,
)


def test_ord_mod_small_cases():
    assert ord_mod(2, 7) == 3
    assert ord_mod(2, 5) == 4


def test_ord_mod_rejects_common_factor():
    with pytest.raises(ValueError):
        ord_mod(2, 8)


def test_ord_mod_lcm_identity():
    import math

    for ell in (3, 5, 9, 11, 13, 15, 17, 19, 23, 25, 27, 29, 31, 33, 37, 39, 41, 43, 45, 47):
        assert ord_mod(2, 7 * ell) == math.lcm(ord_mod(2, 7), ord_mod(2, ell))


def test_admissible():
    assert admissible(5)
    assert not admissible(7)  # 7 ≡ 1 (mod 3)
    assert admissible(11)
    assert not admissible(9)  # not prime
    assert not admissible(17)  # 17 ≡ 2 mod 3 but 2 has order 8 < 16? no: check
    # 2^8 = 256 ≡ 1 (mod 17) so 2 is not a primitive root mod 17
    assert ord_mod(2, 17) == 8


def test_scaled_check_base_and_k1():
    assert set(base_check(0, 0, 64)) == {(0, 0), (2, 1), (2, 2)}
    assert set(scaled_check(1, 0, 1, 64)) == {(0, 1), (4, 3), (4, 5)}


def xor_support(supports):
    acc = set()
    for s in supports:
        acc ^= set(s)
    return acc


def test_scaled_check_recursion_identity():
    L = 64
    for k in range(1, 5):
        for (x, y) in [(0, 0), (3, 7), (11, 2)]:
            lhs = set(scaled_check(k, x, y, L))
            rhs = xor_support(
                [
                    scaled_check(k - 1, x, y, L),
                    scaled_check(k - 1, x + 2**k, y + 2 ** (k - 1), L),
                    scaled_check(k - 1, x + 2**k, y + 2**k, L),
                ]
            )
            assert lhs == rhs


def test_weight4_product_identity():
    L = 64
    for k in range(3):
        for (x, y) in [(0, 0), (5, 9)]:
            got = set(weight4_check(k, x, y, L))
            assert len(got) == 4
    # the figure's worked case: S0 at (2,2) equals the product of the two
    # scaled checks anchored at (0,1)
    got = set(weight4_check(0, 2, 2, 7))
    expect = xor_support([scaled_check(0, 0, 1, 7), scaled_check(1, 0, 1, 7)])
    assert got == expect


def test_materialized_symmetry_7x7():
    checks = materialized_symmetry(0, 1, 7)
    assert len(checks) == k_star(7) + 1
    assert xor_support(checks) == set()
    for x in range(7):
        for y in range(7):
            assert symmetry_is_identity(x, y, 7)


def test_k_star_ell5():
    assert k_star(35) == 11  # 3(ℓ−1) − 1 for ℓ = 5
    assert len(materialized_symmetry(0, 0, 35)) == 12


def test_decode_zero_error():
    L = 7
    e = np.zeros(L * L, dtype=np.uint8)
    c = decode_infinite_bias(L, e)
    assert not c.any()


def test_single_edge_errors_corrected():
    L = 7
    errors = np.eye(L * L, dtype=np.uint8)
    corrections = decode_batch(L, errors)
    assert np.array_equal(corrections, errors)


def test_residual_of_exact_correction_is_trivial():
    L = 7
    rng = np.random.default_rng(4)
    for _ in range(20):
        e = (rng.random(L * L) < 0.2).astype(np.uint8)
        assert not is_logical_failure(L, e, e.copy())


def test_failure_rate_decreases_with_size():
    # moderate rate: larger lattice already fails far less at modest trials
    f35 = monte_carlo_failure(35, 0.10, 400, seed=1)
    f77 = monte_carlo_failure(77, 0.10, 400, seed=1)
    assert f77 < f35
