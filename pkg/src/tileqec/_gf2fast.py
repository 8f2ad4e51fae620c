"""Bit-packed GF(2) kernels used by the OSD post-processor.

Rows are packed into uint64 words, 64 columns per word.  The numba-compiled
row-echelon and back-substitution routines keep ordered-statistics decoding
fast enough for Monte-Carlo use; a pure-numpy fallback is used when numba is
unavailable.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except Exception:  # pragma: no cover - numba is an optional accelerator
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


def pack_rows(M: np.ndarray) -> np.ndarray:
    """Pack an (m, n) 0/1 matrix into (m, ceil(n/64)) uint64 words."""
    m, n = M.shape
    W = (n + 63) // 64
    out = np.zeros((m, W), dtype=np.uint64)
    bits = np.asarray(M, dtype=np.uint64)
    for w in range(W):
        seg = bits[:, 64 * w : 64 * (w + 1)]
        shifts = np.arange(seg.shape[1], dtype=np.uint64)
        out[:, w] = (seg << shifts).sum(axis=1, dtype=np.uint64)
    return out


def unpack_rows(P: np.ndarray, n: int) -> np.ndarray:
    m, W = P.shape
    out = np.zeros((m, W * 64), dtype=np.uint8)
    for w in range(W):
        word = P[:, w]
        for b in range(64):
            out[:, 64 * w + b] = (word >> np.uint64(b)) & np.uint64(1)
    return out[:, :n]


@njit(cache=True)
def _ref_inplace(R, ncols):
    """Row-echelon form in place; returns (pivot column array, rank)."""
    m = R.shape[0]
    pivots = np.empty(min(m, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r >= m:
            break
        w = c >> 6
        b = np.uint64(c & 63)
        piv = -1
        for i in range(r, m):
            if (R[i, w] >> b) & np.uint64(1):
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(R.shape[1]):
                tmp = R[r, j]
                R[r, j] = R[piv, j]
                R[piv, j] = tmp
        for i in range(r + 1, m):
            if (R[i, w] >> b) & np.uint64(1):
                for j in range(R.shape[1]):
                    R[i, j] ^= R[r, j]
        pivots[r] = c
        r += 1
    return pivots[:r], r


@njit(cache=True)
def _get_bit(R, i, c):
    return (R[i, c >> 6] >> np.uint64(c & 63)) & np.uint64(1)


@njit(cache=True)
def _backsub(R, pivots, y, ncols):
    """Solve the REF system R e = y with nonpivot bits fixed to 0.

    Returns e (length ncols, uint8).  R excludes the syndrome column; y is the
    REF-transformed right-hand side (length m).
    """
    r = pivots.shape[0]
    e = np.zeros(ncols, dtype=np.uint8)
    for i in range(r - 1, -1, -1):
        acc = np.uint64(y[i])
        # dot row i against known bits right of the pivot
        for c in range(pivots[i] + 1, ncols):
            if e[c] and _get_bit(R, i, c):
                acc ^= np.uint64(1)
        e[pivots[i]] = np.uint8(acc & np.uint64(1))
    return e


def ref(Hp: np.ndarray, s: np.ndarray):
    """REF of [Hp | s]; returns (R_packed, pivots, rank, y) with y = reduced s."""
    m, n = Hp.shape
    aug = np.concatenate([Hp, s.reshape(-1, 1)], axis=1).astype(np.uint8)
    R = pack_rows(aug)
    pivots, r = _ref_inplace(R, n)
    y = np.array([int(_get_bit(R, i, n)) for i in range(m)], dtype=np.uint8)
    return R, np.asarray(pivots, dtype=np.int64), r, y


def reduced_column(R: np.ndarray, c: int, m: int) -> np.ndarray:
    """Column c of the REF-reduced matrix as a length-m uint8 vector."""
    w, b = c >> 6, np.uint64(c & 63)
    return ((R[:, w] >> b) & np.uint64(1)).astype(np.uint8)


def backsub(R: np.ndarray, pivots: np.ndarray, y: np.ndarray, ncols: int) -> np.ndarray:
    return _backsub(R, pivots, y.astype(np.uint8), ncols)
