"""Analytic failure-probability certificates for pure-Z logical error events.

The basic ingredient is the Chernoff–Hoeffding tail exp(−2w(½−p)²) bounding
the probability that at least half the support of a weight-w logical is hit
by i.i.d. Z errors of rate p < ½.  Certificates: a union bound over all
nontrivial pure-Z logicals, a tighter per-basis-element bound when supports
are disjoint, the overlap-load refinement (each shared qubit is charged to
one owning element, shifting that element's majority threshold), and a
hybrid split.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .blo import BloBasis


def chernoff_term(weight: int, p: float) -> float:
    """exp(−2·weight·(½−p)²); requires 0 ≤ p < ½ and weight ≥ 1."""
    if not 0 <= p < 0.5:
        raise ValueError("p must lie in [0, 1/2)")
    if weight < 1:
        raise ValueError("weight must be ≥ 1")
    return math.exp(-2.0 * weight * (0.5 - p) ** 2)


def enumerate_logical_weights(basis: BloBasis, budget: int = 1 << 20):
    """Weights of all nontrivial pure-Z logicals generated by the basis.

    Enumerates all 2^|B| combinations minus the 2^{n_z} stabilizer
    combinations; feasible only for small bases.
    """
    m = len(basis.elements)
    if 1 << m > budget:
        raise ValueError("enumeration budget exceeded")
    Z = np.array([e.zbits for e in basis.elements], dtype=np.uint8)
    # stabilizer combinations are spanned by the last n_z elements times L1 — a
    # combination is a stabilizer iff it lies in the span of {L1+Sj} + ... ;
    # simplest correct rule: a combination is a nontrivial logical iff its
    # vector is nonzero and not in the pure-Z stabilizer space.
    weights = []
    from .algebra import rank, rref

    # pure-Z stabilizer space basis: pairwise differences of elements sharing
    # a class are stabilizers; recover from the basis structure: elements
    # [k_z coset reps] + [L1*S_j] so S_j = L1 ^ element_{k_z+j}.
    L1 = basis.elements[0].zbits
    Sz = np.array(
        [L1 ^ basis.elements[basis.k_z + j].zbits for j in range(basis.n_z)],
        dtype=np.uint8,
    )
    Rz, pivz, rz = rref(Sz) if basis.n_z else (Sz, [], 0)

    def in_stab(v):
        w = v.copy()
        for i, pcol in enumerate(pivz):
            if w[pcol]:
                w ^= Rz[i]
        return not w.any()

    for bits in itertools.product((0, 1), repeat=m):
        if not any(bits):
            continue
        v = np.zeros(Z.shape[1], dtype=np.uint8)
        for i, b in enumerate(bits):
            if b:
                v ^= Z[i]
        if not v.any() or in_stab(v):
            continue
        weights.append(int(v.sum()))
    return weights


def union_bound_all(logical_weights, p: float) -> float:
    """Σ over logicals of chernoff_term(|L|, p)."""
    return float(sum(chernoff_term(w, p) for w in logical_weights))


def nonoverlap_bound(basis: BloBasis, p: float):
    """Σ over basis elements if supports are pairwise disjoint, else "overlapping"."""
    sup = [set(np.nonzero(e.zbits)[0]) for e in basis.elements]
    for a, b in itertools.combinations(sup, 2):
        if a & b:
            return "overlapping"
    return float(sum(chernoff_term(len(s), p) for s in sup))


@dataclass(frozen=True)
class LoadAssignment:
    loads: tuple  # o_i per basis element
    owner: dict  # overlap qubit -> owning element index

    def shifted_thresholds(self, basis: BloBasis):
        return tuple(
            len(np.nonzero(e.zbits)[0]) / 2.0 - o
            for e, o in zip(basis.elements, self.loads)
        )


def assign_loads(basis: BloBasis) -> LoadAssignment:
    """Greedy max–min assignment of each overlap qubit to one containing element.

    Each qubit in ≥2 supports is given to the containing element whose current
    shifted threshold t_i = |L_i|/2 − o_i is largest; deterministic given
    basis order (ties to the lower index).
    """
    sup = [set(np.nonzero(e.zbits)[0]) for e in basis.elements]
    counts = {}
    for s in sup:
        for q in s:
            counts[q] = counts.get(q, 0) + 1
    overlap_qubits = sorted(q for q, c in counts.items() if c >= 2)
    loads = [0] * len(sup)
    owner = {}
    for q in overlap_qubits:
        containing = [i for i, s in enumerate(sup) if q in s]
        t = [len(sup[i]) / 2.0 - loads[i] for i in containing]
        pick = containing[int(np.argmax(t))]
        loads[pick] += 1
        owner[q] = pick
    return LoadAssignment(tuple(loads), owner)


def _decompose(basis: BloBasis, v: np.ndarray):
    """Indices of basis elements whose product equals v (unique by independence)."""
    from .algebra import solve

    B = np.array([e.zbits for e in basis.elements], dtype=np.uint8)
    x = solve(B.T, v)
    if x is None:
        raise ValueError("vector not generated by basis")
    return [i for i in range(len(basis.elements)) if x[i]]


def covering_check(basis: BloBasis, assignment: LoadAssignment, logicals):
    """Verify Σ_{i∈decomp(L)}(|L_i|/2 − o_i) ≤ |L|/2 for every supplied L.

    `logicals` is an iterable of pure-Z z-bit vectors.  Returns (True, None)
    or (False, violating vector).
    """
    t = assignment.shifted_thresholds(basis)
    for v in logicals:
        v = np.asarray(v, dtype=np.uint8)
        idx = _decompose(basis, v)
        lhs = sum(t[i] for i in idx)
        if lhs > v.sum() / 2.0 + 1e-12:
            return False, v
    return True, None


def load_bound(basis: BloBasis, assignment: LoadAssignment, p: float) -> float:
    """Σ_i exp(−2(t_i − p|L_i|)²/|L_i|), valid when t_i > p|L_i| for all i."""
    total = 0.0
    for e, o in zip(basis.elements, assignment.loads):
        w = int(e.zbits.sum())
        t = w / 2.0 - o
        if t <= p * w:
            raise ValueError("shifted threshold t_i ≤ p·|L_i|: bound invalid")
        total += math.exp(-2.0 * (t - p * w) ** 2 / w)
    return float(total)


def hybrid_bound(disjoint_basis: BloBasis, overlap_weights, p: float) -> float:
    """nonoverlap_bound on the disjoint sector + union bound over the rest."""
    nb = nonoverlap_bound(disjoint_basis, p)
    if nb == "overlapping":
        raise ValueError("disjoint sector overlaps")
    return nb + union_bound_all(overlap_weights, p)


def binomial_tail_at_least_half(w: int, p: float) -> float:
    """Exact Pr[Bin(w, p) ≥ w/2] (oracle for the Chernoff inequality)."""
    k0 = math.ceil(w / 2.0)
    return float(
        sum(math.comb(w, k) * p**k * (1 - p) ** (w - k) for k in range(k0, w + 1))
    )
