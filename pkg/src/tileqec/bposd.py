"""Belief propagation with ordered-statistics post-processing over GF(2).

Decoding works on the binary image of the symplectic syndrome map: the decode
matrix has 2n columns ordered [x-bits | z-bits] and row r equal to
[z-part of check r | x-part of check r], so that H·e reproduces the
commutation syndrome of the Pauli error e.  At infinite Z-bias only the
z-bit columns are active and the matrix collapses to the x-parts.

BP is batched over trials (vectorized tanh-domain product-sum or scaled
min-sum); instances whose BP hard decision misses the syndrome fall back to
OSD: an information set is chosen in most-likely-flipped-first order, solved
exactly (OSD-0), and a combination sweep over low-weight patterns on the
most suspect non-pivot bits keeps the most probable valid correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _gf2fast as gf2
from .algebra import PauliVec, kernel_basis, rank
from .channel import BiasedChannel, decoder_priors
from .tilecode import TileCode

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


@dataclass(frozen=True)
class DecoderConfig:
    bp_variant: str = "product-sum"  # or "min-sum"
    min_sum_scale: float = 0.75
    max_iter: int = 30
    osd_mode: str = "combo"  # "osd0" | "combo"
    osd_order1: int = 60  # single-flip sweep width
    osd_order2: int = 20  # exhaustive pair sweep width
    # OSD works on the columns sorted by posterior; columns beyond the pivot
    # range plus the sweep window are never selected, so large instances are
    # truncated to the first (rank budget + osd_truncate) columns, with a
    # full-width retry if the truncated set cannot reproduce the syndrome.
    osd_truncate: int = 512


@dataclass(frozen=True)
class DecodingProblem:
    """Binary decoding instance set: matrix, per-bit priors, syndromes."""

    H: np.ndarray  # (m, nbits) uint8
    priors: np.ndarray  # (nbits,) flip probabilities

    def __post_init__(self):
        if self.H.shape[1] != self.priors.shape[0]:
            raise ValueError("prior length mismatch")


def decode_matrix(code: TileCode, channel: BiasedChannel) -> DecodingProblem:
    """Decode matrix and priors for a code under a biased channel.

    Finite bias: 2n columns [x-bits | z-bits], row = [z-part | x-part].
    Infinite bias: n z-bit columns only; rows with empty x-part are dropped.
    """
    px, pz = decoder_priors(channel)
    if channel.infinite_bias:
        keep = code.xpart.any(axis=1)
        H = code.xpart[keep].astype(np.uint8)
        priors = np.full(code.n, pz)
        return DecodingProblem(H, priors)
    H = np.concatenate([code.zpart, code.xpart], axis=1).astype(np.uint8)
    priors = np.concatenate([np.full(code.n, px), np.full(code.n, pz)])
    return DecodingProblem(H, priors)


def active_rows(code: TileCode, channel: BiasedChannel) -> np.ndarray:
    """Row indices of the code's checks used by decode_matrix."""
    if channel.infinite_bias:
        return np.nonzero(code.xpart.any(axis=1))[0]
    return np.arange(code.num_checks)


def syndrome(code: TileCode, error: PauliVec) -> np.ndarray:
    """Commutation syndrome: bit r = ⟨check r, error⟩."""
    return ((code.xpart @ error.zbits + code.zpart @ error.xbits) % 2).astype(np.uint8)


def syndrome_batch(code: TileCode, ex: np.ndarray, ez: np.ndarray) -> np.ndarray:
    return ((ez @ code.xpart.T + ex @ code.zpart.T) % 2).astype(np.uint8)


# ---------------------------------------------------------------------------
# Belief propagation (batched)


class _Tanner:
    def __init__(self, H: np.ndarray):
        m, n = H.shape
        cidx, bidx = np.nonzero(H)
        order = np.lexsort((bidx, cidx))  # edges grouped by check
        self.c = cidx[order]
        self.b = bidx[order]
        self.E = len(self.c)
        self.m, self.n = m, n
        self.check_starts = np.searchsorted(self.c, np.arange(m))
        # per-check edge counts must be ≥ 1 for reduceat
        if np.any(np.diff(np.append(self.check_starts, self.E)) == 0):
            raise ValueError("decode matrix has an empty row")
        # second edge ordering grouped by bit, for gather/scatter-free
        # bit-side accumulation via reduceat
        border = np.lexsort((self.c, self.b))
        self.by_bit = border  # check-order edge index -> position sorted by bit
        self.bit_of = self.b[border]
        bits_present = np.unique(self.bit_of)
        if len(bits_present) != n:
            raise ValueError("decode matrix has an empty column")
        self.bit_starts = np.searchsorted(self.bit_of, np.arange(n))


def bp_decode_batch(
    problem: DecodingProblem, syndromes: np.ndarray, config: DecoderConfig
):
    """Batched BP.  syndromes: (B, m).  Returns (posterior flip probs (B, nbits),
    hard decisions (B, nbits), converged (B,))."""
    H, priors = problem.H, problem.priors
    tan = _Tanner(H)
    B = syndromes.shape[0]
    priors = np.clip(priors, 1e-12, 1 - 1e-12)
    lam = np.log((1 - priors) / priors).astype(np.float32)  # >0 means "probably 0"
    nu = np.broadcast_to(lam[tan.b], (B, tan.E)).copy()
    sgn_syn = (1.0 - 2.0 * syndromes[:, tan.c]).astype(np.float32)  # (B, E)
    hard = np.zeros((B, H.shape[1]), dtype=np.uint8)
    converged = np.zeros(B, dtype=bool)
    post = np.broadcast_to(lam, (B, H.shape[1])).copy()
    active = np.arange(B)
    for _ in range(config.max_iter):
        if len(active) == 0:
            break
        nu_a = nu[active]
        if config.bp_variant == "product-sum":
            t = np.tanh(np.clip(nu_a / 2.0, -30, 30))
            sgn = np.where(t < 0, np.float32(-1.0), np.float32(1.0))
            # floor |t| away from 0 so the log stays finite for zero messages
            logt = np.log(np.clip(np.abs(t), 1e-15, 1 - 1e-7))
            sum_log = np.add.reduceat(logt, tan.check_starts, axis=1)
            prod_sgn = np.multiply.reduceat(sgn, tan.check_starts, axis=1)
            ext_log = sum_log[:, tan.c] - logt
            ext_sgn = prod_sgn[:, tan.c] * sgn
            mu = sgn_syn[active] * ext_sgn * 2.0 * np.arctanh(
                np.clip(np.exp(ext_log), 0, 1 - 1e-7)
            )
            mu = mu.astype(np.float32, copy=False)
        else:  # min-sum with scaling
            sgn = np.sign(nu_a)
            sgn[sgn == 0] = 1.0
            absn = np.abs(nu_a)
            prod_sgn = np.multiply.reduceat(sgn, tan.check_starts, axis=1)
            # extrinsic min: need two smallest per check
            big = 1e30
            min1 = np.minimum.reduceat(absn, tan.check_starts, axis=1)
            is_min = absn == min1[:, tan.c]
            masked = absn.copy()
            masked[is_min] = big
            min2 = np.minimum.reduceat(masked, tan.check_starts, axis=1)
            ext_abs = np.where(
                absn == min1[:, tan.c], min2[:, tan.c], min1[:, tan.c]
            )
            ext_sgn = prod_sgn[:, tan.c] * sgn
            mu = (config.min_sum_scale * sgn_syn[active] * ext_sgn * ext_abs).astype(
                np.float32, copy=False
            )
        tot = np.add.reduceat(mu[:, tan.by_bit], tan.bit_starts, axis=1)
        tot += lam
        post[active] = tot
        nu[active] = tot[:, tan.b] - mu
        h = (tot < 0).astype(np.uint8)
        hard[active] = h
        # syndrome parity per check via edge-wise reduction
        par = np.add.reduceat(h[:, tan.b].astype(np.int32), tan.check_starts, axis=1) & 1
        ok = (par == syndromes[active]).all(axis=1)
        converged[active[ok]] = True
        active = active[~ok]
    flip_prob = 1.0 / (1.0 + np.exp(np.clip(post.astype(np.float64), -60, 60)))
    return flip_prob, hard, converged


# ---------------------------------------------------------------------------
# OSD


@njit(cache=True)
def _parity64(x):
    x ^= x >> np.uint64(32)
    x ^= x >> np.uint64(16)
    x ^= x >> np.uint64(8)
    x ^= x >> np.uint64(4)
    x ^= x >> np.uint64(2)
    x ^= x >> np.uint64(1)
    return np.uint64(x & np.uint64(1))


@njit(cache=True)
def _sweep_kernel(R, pivots, W, y0, red_cols, cand, cand_cost, cperm):
    """Evaluate candidate flip patterns; return packed best solution.

    R: packed REF rows (m, Wtot); pivots: (r,); y0: (m,) reduced syndrome;
    red_cols: (ncols_swept, m) reduced columns for swept non-pivot positions;
    cand: (ncand, 2) indices into red_cols (−1 = unused); cand_cost: base cost
    of each pattern; cperm: per-permuted-column cost.
    """
    r = pivots.shape[0]
    ncand = cand.shape[0]
    best_cost = 1e300
    best_e = np.zeros(W, dtype=np.uint64)
    best_t = -1
    for t in range(ncand):
        y = y0.copy()
        for s in range(2):
            j = cand[t, s]
            if j >= 0:
                for i in range(y.shape[0]):
                    y[i] ^= red_cols[j, i]
        e = np.zeros(W, dtype=np.uint64)
        cost = cand_cost[t]
        for i in range(r - 1, -1, -1):
            acc = np.uint64(y[i])
            x = np.uint64(0)
            for w in range(W):
                x ^= R[i, w] & e[w]
            acc ^= _parity64(x)
            if acc & np.uint64(1):
                c = pivots[i]
                e[c >> 6] |= np.uint64(1) << np.uint64(c & 63)
                cost += cperm[c]
            if cost >= best_cost:
                # cannot improve; costs only grow
                pass
        if cost < best_cost:
            best_cost = cost
            best_e = e
            best_t = t
    return best_e, best_cost, best_t


def osd_decode(
    problem: DecodingProblem,
    flip_probs: np.ndarray,
    synd: np.ndarray,
    config: DecoderConfig,
) -> np.ndarray:
    """Ordered-statistics decode of a single instance.

    flip_probs: per-bit posterior flip probabilities from BP.  Returns a
    correction reproducing the syndrome exactly.
    """
    H = problem.H
    m, nfull = H.shape
    flip_probs = np.nan_to_num(flip_probs, nan=0.5)
    # most-likely-flipped first; ties by bit index ascending (stable sort)
    perm_full = np.argsort(-flip_probs, kind="stable")
    widths = [nfull]
    if config.osd_truncate and nfull > m + config.osd_truncate:
        widths.insert(0, m + config.osd_truncate)
    for n in widths:
        perm = perm_full[:n]
        Hp = H[:, perm]
        R, pivots, r, y0 = gf2.ref(Hp, synd)
        if not y0[r:].any():  # truncated columns span the syndrome
            break
    else:
        raise AssertionError("syndrome outside the column span")
    W = R.shape[1]
    p = np.clip(flip_probs[perm], 1e-12, 1 - 1e-12)
    cperm = np.log((1 - p) / p)  # cost of flipping each permuted bit
    cperm = np.maximum(cperm, -50.0)
    pivset = set(pivots.tolist())
    nonpiv = np.array([c for c in range(n) if c not in pivset], dtype=np.int64)
    # candidate patterns: empty (OSD-0), singles on the first osd_order1
    # non-pivot bits, pairs on the first osd_order2
    cands = [(-1, -1)]
    if config.osd_mode == "combo":
        lam1 = min(config.osd_order1, len(nonpiv))
        lam2 = min(config.osd_order2, len(nonpiv))
        for i in range(lam1):
            cands.append((i, -1))
        for i in range(lam2):
            for j in range(i + 1, lam2):
                cands.append((i, j))
    cand = np.array(cands, dtype=np.int64)
    swept = sorted({i for pair in cands for i in pair if i >= 0})
    red_cols = np.zeros((len(swept) or 1, m), dtype=np.uint8)
    sweep_pos = {}
    for a, i in enumerate(swept):
        red_cols[a] = gf2.reduced_column(R, int(nonpiv[i]), m)
        sweep_pos[i] = a
    cand_idx = np.array(
        [
            [sweep_pos.get(i, -1) if i >= 0 else -1 for i in pair]
            for pair in cands
        ],
        dtype=np.int64,
    )
    cand_cost = np.array(
        [
            sum(cperm[nonpiv[i]] for i in pair if i >= 0)
            for pair in cands
        ],
        dtype=np.float64,
    )
    best_e, _, best_t = _sweep_kernel(
        R, pivots.astype(np.int64), W, y0, red_cols, cand_idx, cand_cost, cperm
    )
    if best_t < 0:
        raise AssertionError("OSD sweep selected no candidate")
    e_perm = np.zeros(n, dtype=np.uint8)
    for c in range(n):
        if (best_e[c >> 6] >> np.uint64(c & 63)) & np.uint64(1):
            e_perm[c] = 1
    for i in cands[best_t]:
        if i >= 0:
            e_perm[nonpiv[i]] = 1
    out = np.zeros(nfull, dtype=np.uint8)
    out[perm] = e_perm
    if ((H @ out) % 2 != synd).any():
        raise AssertionError("OSD produced a syndrome-inconsistent correction")
    return out


def decode_batch(
    problem: DecodingProblem, syndromes: np.ndarray, config: DecoderConfig | None = None
):
    """Full pipeline: batched BP, OSD fallback per unconverged instance.

    Returns corrections (B, nbits), each reproducing its syndrome.
    """
    config = config or DecoderConfig()
    flip, hard, conv = bp_decode_batch(problem, syndromes, config)
    out = hard.copy()
    for i in np.nonzero(~conv)[0]:
        out[i] = osd_decode(problem, flip[i], syndromes[i], config)
    return out


# ---------------------------------------------------------------------------
# Logical failure classification


def logical_basis(code: TileCode) -> np.ndarray:
    """2k independent symplectic logical rows (spanning the centralizer mod checks)."""
    n = code.n
    swapped = np.concatenate([code.zpart, code.xpart], axis=1).astype(np.uint8)
    K = kernel_basis(swapped)  # all Paulis commuting with every check
    from .algebra import rref

    base = code.checks
    picked = []
    stack = base
    r0 = rank(base)
    for v in K:
        cand = np.vstack([stack, v])
        r1 = rank(cand)
        if r1 > r0:
            picked.append(v)
            stack = cand
            r0 = r1
        if len(picked) == 2 * code.k:
            break
    if len(picked) != 2 * code.k:
        raise AssertionError("logical extraction failed")
    return np.array(picked, dtype=np.uint8)


def is_failure(
    code: TileCode, logicals: np.ndarray, ex, ez, cx, cz
) -> bool:
    """True iff the residual (error ⊕ correction) acts on the logical algebra."""
    rx = (np.asarray(ex) ^ np.asarray(cx)).astype(np.uint8)
    rz = (np.asarray(ez) ^ np.asarray(cz)).astype(np.uint8)
    syn = (code.xpart @ rz + code.zpart @ rx) % 2
    if syn.any():
        raise AssertionError("residual has nonzero syndrome: decoder bug")
    n = code.n
    lx, lz = logicals[:, :n], logicals[:, n:]
    return bool(((lx @ rz + lz @ rx) % 2).any())


def failure_batch(code: TileCode, logicals: np.ndarray, ex, ez, cx, cz) -> np.ndarray:
    rx = (ex ^ cx).astype(np.uint8)
    rz = (ez ^ cz).astype(np.uint8)
    syn = (rz @ code.xpart.T + rx @ code.zpart.T) % 2
    if syn.any():
        raise AssertionError("residual has nonzero syndrome: decoder bug")
    n = code.n
    lx, lz = logicals[:, :n], logicals[:, n:]
    return (((rz @ lx.T + rx @ lz.T) % 2) != 0).any(axis=1)
