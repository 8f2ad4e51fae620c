"""Oracle tests for GF(2) linear algebra and Pauli arithmetic."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tileqec.algebra import (
    PauliVec,
    kernel_basis,
    pauli_mul,
    pauli_weight,
    rank,
    restrict,
    rref,
    row_span_contains,
    solve,
    symplectic_product,
)

rng = np.random.default_rng(7)


def brute_rank(M):
    """Rank = size of the largest independent row subset, by enumeration."""
    M = np.asarray(M, dtype=np.uint8)
    rows = M.shape[0]
    best = 0
    for size in range(rows, 0, -1):
        for sub in itertools.combinations(range(rows), size):
            # independent iff no nonempty subset XORs to zero
            sel = M[list(sub)]
            ok = True
            for mask in range(1, 1 << size):
                acc = np.zeros(M.shape[1], dtype=np.uint8)
                for i in range(size):
                    if mask >> i & 1:
                        acc ^= sel[i]
                if not acc.any():
                    ok = False
                    break
            if ok:
                return size
    return best


def test_rref_identity():
    R, piv, r = rref(np.eye(4, dtype=np.uint8))
    assert r == 4 and piv == [0, 1, 2, 3]
    assert np.array_equal(R, np.eye(4, dtype=np.uint8))


def test_rref_duplicate_rows():
    assert rank([[1, 1], [1, 1]]) == 1


def test_rank_against_subset_oracle():
    for _ in range(50):
        M = rng.integers(0, 2, size=(5, 7), dtype=np.uint8)
        assert rank(M) == brute_rank(M)


def test_rref_preserves_row_space():
    for _ in range(30):
        M = rng.integers(0, 2, size=(6, 9), dtype=np.uint8)
        R, _, r = rref(M)
        for row in R[:r]:
            assert row_span_contains(M, row)
        for row in M:
            assert row_span_contains(R[:r], row)


def test_kernel_zero_matrix():
    assert kernel_basis(np.zeros((3, 5), dtype=np.uint8)).shape == (5, 5)


def test_kernel_invertible():
    M = np.array([[1, 1], [0, 1]], dtype=np.uint8)
    assert kernel_basis(M).shape[0] == 0


def test_kernel_rank_nullity_and_membership():
    for _ in range(50):
        M = rng.integers(0, 2, size=(6, 10), dtype=np.uint8)
        K = kernel_basis(M)
        assert K.shape[0] == 10 - rank(M)
        assert not (M @ K.T % 2).any()
        assert rank(K) == K.shape[0]


def test_solve_identity():
    s = np.array([1, 0, 1], dtype=np.uint8)
    assert np.array_equal(solve(np.eye(3, dtype=np.uint8), s), s)


def test_solve_underdetermined():
    x = solve(np.array([[1, 1]], dtype=np.uint8), [1])
    assert x is not None and (x[0] ^ x[1]) == 1


def test_solve_against_bruteforce():
    for _ in range(40):
        cols = int(rng.integers(3, 9))
        M = rng.integers(0, 2, size=(5, cols), dtype=np.uint8)
        s = rng.integers(0, 2, size=5, dtype=np.uint8)
        x = solve(M, s)
        feasible = any(
            np.array_equal(
                M @ np.array(v, dtype=np.uint8) % 2, s
            )
            for v in itertools.product([0, 1], repeat=cols)
        )
        if feasible:
            assert x is not None and np.array_equal(M @ x % 2, s)
        else:
            assert x is None


def test_symplectic_basics():
    X0 = PauliVec.from_string("X")
    Z0 = PauliVec.from_string("Z")
    Y0 = PauliVec.from_string("Y")
    assert symplectic_product(X0, Z0) == 1
    assert symplectic_product(X0, X0) == 0
    assert symplectic_product(Y0, Z0) == 1


@given(st.integers(1, 12), st.integers(0, 2**36 - 1), st.integers(0, 2**36 - 1))
@settings(max_examples=60, deadline=None)
def test_symplectic_symmetric(n, a, b):
    bits = lambda v: np.array([(v >> i) & 1 for i in range(2 * n)], dtype=np.uint8)
    av, bv = bits(a), bits(b)
    pa = PauliVec(av[:n], av[n : 2 * n])
    pb = PauliVec(bv[:n], bv[n : 2 * n])
    assert symplectic_product(pa, pb) == symplectic_product(pb, pa)


def test_pauli_mul_involution_and_weight():
    p = PauliVec.from_string("XZYI")
    assert pauli_mul(p, p).to_string() == "IIII"
    assert pauli_weight(PauliVec.from_string("ZZII")) == 2
    a = PauliVec.from_string("XIZY")
    b = PauliVec.from_string("ZZXY")
    c = PauliVec.from_string("YIII")
    left = pauli_mul(pauli_mul(a, b), c)
    right = pauli_mul(a, pauli_mul(b, c))
    assert left.to_string() == right.to_string()


def test_restrict_overlap_weight_oracle():
    for _ in range(100):
        n = 12
        e = PauliVec(
            rng.integers(0, 2, n, dtype=np.uint8), rng.integers(0, 2, n, dtype=np.uint8)
        )
        l = PauliVec(
            np.zeros(n, dtype=np.uint8), rng.integers(0, 2, n, dtype=np.uint8)
        )
        overlap = restrict(e, l.support)
        loop_count = sum(
            1
            for i in range(n)
            if (e.xbits[i] or e.zbits[i]) and (l.xbits[i] or l.zbits[i])
        )
        assert pauli_weight(overlap) == loop_count


def test_pauli_string_roundtrip():
    s = "IXZYXZIY"
    assert PauliVec.from_string(s).to_string() == s
    with pytest.raises(ValueError):
        PauliVec.from_string("Q")
