"""GF(2) linear algebra and symplectic Pauli arithmetic.

Matrices are dense numpy uint8 arrays with entries in {0, 1}; all arithmetic
is mod 2.  Pauli operators are stored phase-free as an (xbits, zbits) pair of
length-n bit vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _as_gf2(M) -> np.ndarray:
    A = np.asarray(M, dtype=np.uint8) % 2
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    return A


def rref(M):
    """Reduced row-echelon form over GF(2).

    Returns (reduced, pivot_cols, rank).  The row space of `reduced` equals
    the row space of `M`; rows beyond `rank` are zero.
    """
    A = _as_gf2(M).copy()
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hot = np.nonzero(A[r:, c])[0]
        if hot.size == 0:
            continue
        p = hot[0] + r
        if p != r:
            A[[r, p]] = A[[p, r]]
        others = np.nonzero(A[:, c])[0]
        others = others[others != r]
        if others.size:
            A[others] ^= A[r]
        pivots.append(c)
        r += 1
    return A, pivots, r


def rank(M) -> int:
    """GF(2) rank of M."""
    return rref(M)[2]


def kernel_basis(M) -> np.ndarray:
    """Basis of the right null space of M over GF(2).

    Returns an array of shape (cols - rank, cols); each row v satisfies
    M v = 0 (mod 2).
    """
    A, pivots, r = rref(M)
    cols = A.shape[1]
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        # pivot row j has its pivot at pivots[j]; back-substitute column f
        for j, p in enumerate(pivots):
            basis[i, p] = A[j, f]
    return basis


def solve(M, s):
    """Solve M x = s over GF(2).

    Returns one solution as a uint8 vector, or None if the system is
    inconsistent.
    """
    A = _as_gf2(M)
    b = np.asarray(s, dtype=np.uint8) % 2
    if b.shape != (A.shape[0],):
        raise ValueError("right-hand side length mismatch")
    aug = np.concatenate([A, b[:, None]], axis=1)
    R, pivots, r = rref(aug)
    if A.shape[1] in pivots:
        return None  # pivot in the augmented column: inconsistent
    x = np.zeros(A.shape[1], dtype=np.uint8)
    for j, p in enumerate(pivots):
        x[p] = R[j, -1]
    return x


def row_span_contains(M, v) -> bool:
    """True if v lies in the GF(2) row space of M."""
    A = _as_gf2(M)
    w = np.asarray(v, dtype=np.uint8) % 2
    return rank(np.vstack([A, w])) == rank(A)


@dataclass(frozen=True)
class PauliVec:
    """An n-qubit Pauli operator, phase discarded.

    xbits[i]/zbits[i] give the X/Z component on qubit i; Y has both set.
    """

    xbits: np.ndarray
    zbits: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.xbits, dtype=np.uint8) % 2
        z = np.asarray(self.zbits, dtype=np.uint8) % 2
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError("xbits and zbits must be equal-length vectors")
        object.__setattr__(self, "xbits", x)
        object.__setattr__(self, "zbits", z)

    @property
    def n(self) -> int:
        return self.xbits.shape[0]

    @classmethod
    def identity(cls, n: int) -> "PauliVec":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_string(cls, s: str) -> "PauliVec":
        """Build from a string like 'XIZY'."""
        x = np.zeros(len(s), dtype=np.uint8)
        z = np.zeros(len(s), dtype=np.uint8)
        for i, ch in enumerate(s.upper()):
            if ch == "X":
                x[i] = 1
            elif ch == "Z":
                z[i] = 1
            elif ch == "Y":
                x[i] = 1
                z[i] = 1
            elif ch != "I":
                raise ValueError(f"bad Pauli letter {ch!r}")
        return cls(x, z)

    def to_string(self) -> str:
        letters = np.array(["I", "X", "Z", "Y"])
        return "".join(letters[self.xbits + 2 * self.zbits])

    @property
    def support(self) -> np.ndarray:
        return np.nonzero(self.xbits | self.zbits)[0]

    def is_pure_z(self) -> bool:
        return not self.xbits.any()


def symplectic_product(a: PauliVec, b: PauliVec) -> int:
    """0 iff a and b commute: a.x·b.z + a.z·b.x mod 2."""
    if a.n != b.n:
        raise ValueError("length mismatch")
    return int((int(a.xbits @ b.zbits) + int(a.zbits @ b.xbits)) % 2)


def pauli_mul(a: PauliVec, b: PauliVec) -> PauliVec:
    """Phase-free product: bitwise XOR of the symplectic vectors."""
    if a.n != b.n:
        raise ValueError("length mismatch")
    return PauliVec(a.xbits ^ b.xbits, a.zbits ^ b.zbits)


def pauli_weight(p: PauliVec) -> int:
    """Number of qubits on which p acts non-trivially."""
    return int((p.xbits | p.zbits).sum())


def restrict(p: PauliVec, support) -> PauliVec:
    """Zero out all bits outside `support` (an index iterable or bool mask)."""
    mask = np.zeros(p.n, dtype=np.uint8)
    idx = np.asarray(list(support) if not isinstance(support, np.ndarray) else support)
    if idx.dtype == bool:
        mask[idx] = 1
    elif idx.size:
        mask[idx.astype(int)] = 1
    return PauliVec(p.xbits & mask, p.zbits & mask)
