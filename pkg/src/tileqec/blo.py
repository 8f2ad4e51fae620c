"""Basis of pure-Z logical operators (BLO) and its scaling diagnostics.

A pure-Z Pauli commutes with a check row (x|z) iff its z-vector is orthogonal
to the row's x-part, so the pure-Z commutant is ker(X-part matrix).  The BLO
is built as coset representatives L₁..L_{k_z} plus L₁·S_j over the pure-Z
stabilizer generators S_j; it has n − rank(X-part) elements and generates all
2^|B| − 2^{n_z} nontrivial pure-Z logicals.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .algebra import PauliVec, kernel_basis, rank, rref, solve
from .tilecode import TileCode


@dataclass(frozen=True)
class BloBasis:
    elements: tuple  # PauliVec, pure-Z, each a nontrivial logical
    n_z: int  # dimension of the pure-Z stabilizer subgroup
    k_z: int  # independent pure-Z logical cosets
    reduced: bool = True  # False if minimize_weights hit its budget


def pure_z_stab_rows(code: TileCode) -> np.ndarray:
    """Basis (z-parts) of the pure-Z subgroup of the check row space."""
    n = code.n
    # rref with x-columns leading: rows whose x-part vanishes span the subgroup
    R, _, r = rref(code.checks)
    zrows = R[:r][~R[:r, :n].any(axis=1)]
    return zrows[:, n:].astype(np.uint8)


def pure_z_stab_dim(code: TileCode) -> int:
    return pure_z_stab_rows(code).shape[0]


def _reduce_mod(v: np.ndarray, R: np.ndarray, pivots) -> np.ndarray:
    out = v.copy()
    for i, p in enumerate(pivots):
        if out[p]:
            out ^= R[i]
    return out


def blo_basis(code: TileCode) -> BloBasis:
    """Construct the BLO; raises ValueError when no pure-Z logicals exist."""
    n = code.n
    hx = code.xpart  # x-parts of all checks
    K = kernel_basis(hx)  # all pure-Z commutant vectors (z-parts)
    Sz = pure_z_stab_rows(code)
    n_z = Sz.shape[0]
    k_z = K.shape[0] - n_z
    if k_z < 1:
        raise ValueError("no pure-Z logicals")
    Rz, pivz, rz = rref(Sz) if n_z else (Sz, [], 0)
    # coset representatives: kernel vectors reduced mod the stabilizer space
    reps = []
    for v in K:
        reps.append(_reduce_mod(v, Rz[:rz], pivz))
    reps = np.array(reps, dtype=np.uint8)
    Rr, pivr, rr = rref(reps)
    assert rr == k_z
    cosets = sorted((tuple(int(b) for b in row) for row in Rr[:rr]))
    logicals = [np.array(c, dtype=np.uint8) for c in cosets]
    L1 = logicals[0]
    elements = [PauliVec(np.zeros(n, np.uint8), v) for v in logicals]
    for j in range(n_z):
        elements.append(PauliVec(np.zeros(n, np.uint8), L1 ^ Sz[j]))
    assert len(elements) == n - rank(hx)
    return BloBasis(tuple(elements), n_z=n_z, k_z=k_z)


def count_logicals(basis: BloBasis) -> int:
    """|L_Z| = 2^|B| − 2^{n_z} (exact big integer)."""
    return (1 << len(basis.elements)) - (1 << basis.n_z)


def _qubit_xy(code: TileCode):
    return [(x, y) for _, x, y in code.qubit_coords]


def minimize_weights(
    basis: BloBasis,
    code: TileCode,
    neighborhood_radius: int = 3,
    budget: int = 1 << 20,
) -> BloBasis:
    """Replace each element by the lightest representative found.

    Stage (a): exhaust combinations of pure-Z stabilizers whose support lies
    within Chebyshev distance `neighborhood_radius` of the element (capped at
    `budget` combinations).  Stage (b): greedy single-stabilizer pass to a
    fixpoint.  The logical class is preserved exactly.
    """
    Sz = pure_z_stab_rows(code)
    xy = _qubit_xy(code)
    out = []
    within_budget = True
    for el in basis.elements:
        v = el.zbits.copy()
        sup = np.nonzero(v)[0]
        pts = [xy[q] for q in sup]
        nearby = []
        for srow in Sz:
            ssup = np.nonzero(srow)[0]
            if all(
                any(
                    max(abs(xy[q][0] - px), abs(xy[q][1] - py)) <= neighborhood_radius
                    for px, py in pts
                )
                for q in ssup
            ):
                nearby.append(srow)
        m = len(nearby)
        if m and (1 << m) <= budget:
            best = v
            bw = int(v.sum())
            for r in range(1, m + 1):
                # prune: still within total budget by construction
                for combo in itertools.combinations(range(m), r):
                    cand = v.copy()
                    for i in combo:
                        cand = cand ^ nearby[i]
                    w = int(cand.sum())
                    if w < bw:
                        bw, best = w, cand
            v = best
        elif m:
            within_budget = False
        # greedy pass over the full stabilizer set
        improved = True
        while improved and Sz.shape[0]:
            improved = False
            w = int(v.sum())
            for srow in Sz:
                cand = v ^ srow
                if cand.sum() < w:
                    v = cand
                    improved = True
                    break
        out.append(PauliVec(np.zeros(code.n, np.uint8), v))
    for old, new in zip(basis.elements, out):
        diff = old.zbits ^ new.zbits
        # class preservation: the difference must be a pure-Z stabilizer
        if diff.any() and Sz.size:
            assert solve(Sz.T.astype(np.uint8), diff) is not None
        else:
            assert not diff.any()
    return BloBasis(tuple(out), n_z=basis.n_z, k_z=basis.k_z, reduced=within_budget)


def overlap_matrix(basis: BloBasis) -> np.ndarray:
    sup = [set(np.nonzero(e.zbits)[0]) for e in basis.elements]
    m = len(sup)
    M = np.zeros((m, m), dtype=int)
    for i in range(m):
        for j in range(m):
            if i != j:
                M[i, j] = len(sup[i] & sup[j])
    return M


def diagnostics(family: dict):
    """Scaling diagnostics for {n: BloBasis}.

    Returns {slope, intercept, per_size}: per_size maps n to
    (|B_Z|, n_z, z-distance upper bound, max pairwise overlap, total overlap).
    """
    if len(family) < 2:
        raise ValueError("need at least two sizes")
    ns = sorted(family)
    sizes = np.array(ns, dtype=float)
    counts = np.array([len(family[n].elements) for n in ns], dtype=float)
    s, c = np.polyfit(sizes, counts, 1)
    per_size = {}
    for n in ns:
        b = family[n]
        M = overlap_matrix(b)
        per_size[n] = {
            "blo_size": len(b.elements),
            "n_z": b.n_z,
            "z_dist_ub": min(int(e.zbits.sum()) for e in b.elements),
            "max_pair_overlap": int(M.max()) if M.size else 0,
            "total_overlap": int(M.sum()) // 2,
        }
    return {"slope": float(s), "intercept": float(c), "per_size": per_size}


def diagnostics_csv(diag) -> str:
    lines = ["n,|B_Z|,n_z,z_dist_ub,max_pair_overlap,total_overlap"]
    for n, d in sorted(diag["per_size"].items()):
        lines.append(
            f"{n},{d['blo_size']},{d['n_z']},{d['z_dist_ub']},"
            f"{d['max_pair_overlap']},{d['total_overlap']}"
        )
    return "\n".join(lines) + "\n"
