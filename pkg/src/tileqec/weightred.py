"""Weight-reduction analysis and decoder for periodic lattices at infinite bias.

Works on the horizontal-edge subproblem of the linear-deformed periodic code:
L² binary error variables, one per horizontal edge (x, y) of an L×L torus,
checked by the weight-3 stabilizer restrictions
S̃₀^{(x,y)} = {(x,y), (x+2,y+1), (x+2,y+2)}.  Products of these build scaled
weight-3 checks S̃_k, weight-4 checks S_k, and — when 2^{k+1} ≡ 1 (mod L) —
cyclic materialized symmetries whose checks form repetition codes.  Decoding
cascades through those repetition codes, so every stage has a 50% threshold.

The vertical-edge subproblem is the same code up to the coordinate reflection
(x, y) ↦ (y, −x − 2); `mirror_vertical_to_horizontal` exposes that map.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd

import numpy as np

from . import _gf2fast as gf2

try:
    from numba import njit

    _HAVE_NUMBA = True
except Exception:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------------------
# Number theory


def ord_mod(a: int, m: int) -> int:
    """Multiplicative order of a modulo m."""
    if m < 2 or gcd(a, m) != 1:
        raise ValueError("ord_mod requires m ≥ 2 and gcd(a, m) = 1")
    t, x = 1, a % m
    while x != 1:
        x = (x * a) % m
        t += 1
    return t


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(n**0.5) + 1):
        if n % d == 0:
            return False
    return True


def admissible(ell: int) -> bool:
    """True iff ℓ is an odd prime with ℓ ≡ 2 (mod 3) and 2 a primitive root.

    For such ℓ the lattice L = 7ℓ carries materialized symmetries of length
    3(ℓ−1) and the cascade decoder applies.
    """
    if ell % 2 == 0:
        raise ValueError("ell must be odd")
    if not _is_prime(ell) or ell % 3 != 2:
        return False
    return ord_mod(2, ell) == ell - 1


def k_star(L: int) -> int:
    """Largest scale index: k* = ord_L(2) − 1, so 2^{k*+1} ≡ 1 (mod L)."""
    return ord_mod(2, L) - 1


# ---------------------------------------------------------------------------
# Check supports (edges as (x, y) pairs mod L)


def base_check(x: int, y: int, L: int):
    """S̃₀ support: {(x,y), (x+2,y+1), (x+2,y+2)}."""
    return scaled_check(0, x, y, L)


def scaled_check(k: int, x: int, y: int, L: int):
    """S̃_k support: {(x,y), (x+2^{k+1},y+2^k), (x+2^{k+1},y+2^{k+1})}."""
    s = 1 << k
    return frozenset(
        {
            (x % L, y % L),
            ((x + 2 * s) % L, (y + s) % L),
            ((x + 2 * s) % L, (y + 2 * s) % L),
        }
    )


def weight4_check(k: int, x: int, y: int, L: int):
    """S_k support: {(x,y), (x,y+2^k), (x+2^{k+1},y+2^k), (x+2^{k+1},y+3·2^k)}."""
    s = 1 << k
    return (
        (x % L, y % L),
        (x % L, (y + s) % L),
        ((x + 2 * s) % L, (y + s) % L),
        ((x + 2 * s) % L, (y + 3 * s) % L),
    )


def materialized_symmetry(x: int, y: int, L: int):
    """The checks S_j^{(x+2^{j+1}−2, y+2^j−1)}, j = 0..k*, whose product is I.

    Returns a list of weight-4 supports; successive checks overlap on a
    column pair, so they form a cyclic repetition code of length k*+1.
    """
    ks = k_star(L)
    out = []
    for j in range(ks + 1):
        s = 1 << j
        out.append(weight4_check(j, x + 2 * s - 2, y + s - 1, L))
    return out


def symmetry_is_identity(x: int, y: int, L: int) -> bool:
    acc = set()
    for supp in materialized_symmetry(x, y, L):
        acc ^= set(supp)
    return not acc


# ---------------------------------------------------------------------------
# Cascade decoder


@lru_cache(maxsize=None)
def _symmetry_indices(L: int) -> np.ndarray:
    """(L², k*+1, 4) flat edge indices of every anchor's symmetry checks."""
    ks = k_star(L)
    idx = np.empty((L * L, ks + 1, 4), dtype=np.int64)
    for x in range(L):
        for y in range(L):
            for j, supp in enumerate(materialized_symmetry(x, y, L)):
                idx[x * L + y, j] = [a * L + b for a, b in supp]
    return idx


def decode_batch(L: int, errors: np.ndarray) -> np.ndarray:
    """Two-stage cascade decode of a batch of horizontal-edge errors.

    errors: (B, L²) uint8 (flat index x·L + y).  Stage 1 decodes, per anchor,
    the cyclic repetition code over column-pair variables and infers the
    parity of edges (x,y),(x,y+1); stage 2 decodes one cyclic repetition code
    per column.  Ties go to the coset containing the all-zero assignment.
    Returns corrections of the same shape.
    """
    E = np.asarray(errors, dtype=np.uint8)
    idx = _symmetry_indices(L)
    N = idx.shape[1]
    # stage 1: check values d_j, then the X_0 = 0 coset via prefix XOR
    d = (
        E[:, idx[:, :, 0]]
        ^ E[:, idx[:, :, 1]]
        ^ E[:, idx[:, :, 2]]
        ^ E[:, idx[:, :, 3]]
    )  # (B, L², N)
    acc = np.bitwise_xor.accumulate(d, axis=2)
    w0 = acc[:, :, : N - 1].sum(axis=2, dtype=np.int64)  # weight of X_0=0 coset
    pair = (2 * w0 > N).astype(np.uint8)  # inferred e(x,y) ^ e(x,y+1)
    # stage 2: per column x, cyclic repetition over y with links pair[x, y]
    b = pair.reshape(-1, L, L)  # [batch, x, y]
    accy = np.bitwise_xor.accumulate(b, axis=2)
    est = np.concatenate([np.zeros_like(accy[:, :, :1]), accy[:, :, : L - 1]], axis=2)
    w = est.sum(axis=2, dtype=np.int64)  # (B, L) per-column coset weight
    flip = (2 * w > L).astype(np.uint8)
    est ^= flip[:, :, None]
    return est.reshape(E.shape)


def decode_infinite_bias(L: int, error: np.ndarray) -> np.ndarray:
    """Single-instance cascade decode; error flat (L²,) or square (L, L)."""
    e = np.asarray(error, dtype=np.uint8)
    flat = e.reshape(1, -1)
    if flat.shape[1] != L * L:
        raise ValueError("error length must be L²")
    return decode_batch(L, flat)[0].reshape(e.shape)


def mirror_vertical_to_horizontal(x: int, y: int, L: int):
    """Coordinate map sending the vertical-edge subproblem onto this one."""
    return (y % L, (-x - 2) % L)


# ---------------------------------------------------------------------------
# Failure classification: residual modulo the check group


@njit(cache=True)
def _reduce_vec(R, pivots, v):
    for i in range(pivots.shape[0]):
        c = pivots[i]
        if (v[c >> 6] >> np.uint64(c & 63)) & np.uint64(1):
            v ^= R[i]
    return v


@lru_cache(maxsize=None)
def _check_span_ref(L: int):
    n = L * L
    H = np.zeros((n, n), dtype=np.uint8)
    for x in range(L):
        for y in range(L):
            for a, b in base_check(x, y, L):
                H[x * L + y, a * L + b] = 1
    R, pivots, r, _ = gf2.ref(H, np.zeros(n, dtype=np.uint8))
    return R[:r], pivots


def is_logical_failure(L: int, error: np.ndarray, correction: np.ndarray) -> bool:
    """True iff error ⊕ correction lies outside the span of the S̃₀ checks."""
    res = (
        np.asarray(error, dtype=np.uint8).ravel()
        ^ np.asarray(correction, dtype=np.uint8).ravel()
    )
    if not res.any():
        return False
    R, pivots = _check_span_ref(L)
    v = gf2.pack_rows(res.reshape(1, -1))[0]
    v = np.concatenate([v, np.zeros(R.shape[1] - v.shape[0], dtype=np.uint64)])
    return bool(_reduce_vec(R, pivots, v).any())


def monte_carlo_failure(
    L: int, p: float, trials: int, seed: int, block: int = 256
) -> float:
    """Failure rate of the cascade decoder under i.i.d. edge flips at rate p."""
    failures = 0
    for b0 in range(0, trials, block):
        bs = min(block, trials - b0)
        rng = np.random.default_rng(np.random.Philox(key=[seed, b0]))
        E = (rng.random((bs, L * L)) < p).astype(np.uint8)
        C = decode_batch(L, E)
        for i in range(bs):
            if is_logical_failure(L, E[i], C[i]):
                failures += 1
    return failures / trials
