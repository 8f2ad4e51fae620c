"""Tile-code construction on open and periodic square lattices.

Qubits live on the horizontal and vertical edges of an Lx×Ly grid (one of
each per vertex, n = 2·Lx·Ly).  Bulk X checks act on three horizontal and
three vertical edges; Z checks use the point-reflected supports, which makes
X–Z commutation automatic in the bulk.  Open-boundary codes keep all interior
checks plus those boundary truncations clipped only by the sides assigned to
their type (X: left/right, Z: bottom/top), yielding reduced-weight boundary
checks and eight logical qubits at every size.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import PauliVec, rank, rref

# Bulk template, in (dx, dy) displacements from the check anchor.
X_HORIZONTAL = ((0, 0), (2, 1), (2, 2))
X_VERTICAL = ((0, 2), (1, 2), (2, 0))
# Z check supports are the point reflections (antipodes) with the roles of
# horizontal and vertical swapped.
Z_HORIZONTAL = tuple((-dx, -dy) for dx, dy in X_VERTICAL)
Z_VERTICAL = tuple((-dx, -dy) for dx, dy in X_HORIZONTAL)

# Which lattice sides may clip a boundary check of each type.
X_SIDES = frozenset("LR")
Z_SIDES = frozenset("BT")

OPEN_SIZES = (6, 8, 10, 12, 13, 14)


@dataclass(frozen=True)
class TileCode:
    """A stabilizer code with lattice geometry.

    `checks` is an (m, 2n) symplectic matrix; row r is [x-part | z-part] of
    check r.  Undeformed codes are CSS: each row is pure X-type or Z-type.
    """

    checks: np.ndarray
    boundary: str  # "open" | "periodic"
    Lx: int
    Ly: int
    qubit_coords: tuple  # (axis, x, y) per qubit; axis 0=horizontal, 1=vertical
    check_types: tuple  # "X" or "Z" per row (type before any deformation)
    check_anchors: tuple  # (x, y) anchor per row
    k: int = field(init=False)

    def __post_init__(self):
        m, twon = self.checks.shape
        n = twon // 2
        r = rank(self.checks)
        if r != m:
            raise ValueError("dependent check set")
        object.__setattr__(self, "k", n - r)

    @property
    def n(self) -> int:
        return self.checks.shape[1] // 2

    @property
    def num_checks(self) -> int:
        return self.checks.shape[0]

    @property
    def xpart(self) -> np.ndarray:
        return self.checks[:, : self.n]

    @property
    def zpart(self) -> np.ndarray:
        return self.checks[:, self.n :]

    def is_css(self) -> bool:
        return all(
            not (self.xpart[r].any() and self.zpart[r].any())
            for r in range(self.num_checks)
        )

    @property
    def hx(self) -> np.ndarray:
        """X-type check rows as an n-column binary matrix (CSS codes)."""
        rows = [i for i, t in enumerate(self.check_types) if t == "X"]
        return self.xpart[rows] | self.zpart[rows]

    @property
    def hz(self) -> np.ndarray:
        rows = [i for i, t in enumerate(self.check_types) if t == "Z"]
        return self.xpart[rows] | self.zpart[rows]

    def vertical_qubits(self) -> np.ndarray:
        return np.array([i for i, (a, _, _) in enumerate(self.qubit_coords) if a == 1])

    def horizontal_qubits(self) -> np.ndarray:
        return np.array([i for i, (a, _, _) in enumerate(self.qubit_coords) if a == 0])

    def qubit_index(self, axis: int, x: int, y: int) -> int:
        return axis * self.Lx * self.Ly + x * self.Ly + y

    def assert_commuting(self):
        n = self.n
        sym = (self.xpart @ self.zpart.T + self.zpart @ self.xpart.T) % 2
        if sym.any():
            raise ValueError("check set does not commute")


def _template_points(anchor, horiz, vert):
    x, y = anchor
    return [(0, x + dx, y + dy) for dx, dy in horiz] + [
        (1, x + dx, y + dy) for dx, dy in vert
    ]


def _clip_sides(u, v, Lx, Ly):
    s = set()
    if u < 0:
        s.add("L")
    if u >= Lx:
        s.add("R")
    if v < 0:
        s.add("B")
    if v >= Ly:
        s.add("T")
    return s


def build_open(L: int) -> TileCode:
    """Open-boundary tile code on an L×L lattice: n = 2L², k = 8."""
    if L < 4:
        raise ValueError("L too small for the bulk template")
    n = 2 * L * L
    rows, types, anchors = [], [], []
    seen = set()
    for ctype, horiz, vert, sides in (
        ("X", X_HORIZONTAL, X_VERTICAL, X_SIDES),
        ("Z", Z_HORIZONTAL, Z_VERTICAL, Z_SIDES),
    ):
        xs = [d[0] for d in horiz + vert]
        ys = [d[1] for d in horiz + vert]
        for ax in range(-max(xs) - 1, L - min(xs) + 1):
            for ay in range(-max(ys) - 1, L - min(ys) + 1):
                sup = []
                clip = set()
                for axis, u, v in _template_points((ax, ay), horiz, vert):
                    if 0 <= u < L and 0 <= v < L:
                        sup.append(axis * L * L + u * L + v)
                    else:
                        clip |= _clip_sides(u, v, L, L)
                if len(sup) < 2:
                    continue
                if clip and not clip <= sides:
                    continue
                key = (ctype, frozenset(sup))
                if key in seen:
                    continue
                seen.add(key)
                row = np.zeros(2 * n, dtype=np.uint8)
                row[[q if ctype == "X" else n + q for q in sup]] = 1
                rows.append(row)
                types.append(ctype)
                anchors.append((ax, ay))
    coords = tuple(
        (axis, x, y) for axis in (0, 1) for x in range(L) for y in range(L)
    )
    code = TileCode(
        checks=np.array(rows, dtype=np.uint8),
        boundary="open",
        Lx=L,
        Ly=L,
        qubit_coords=coords,
        check_types=tuple(types),
        check_anchors=tuple(anchors),
    )
    code.assert_commuting()
    if code.k != 8:
        raise ValueError(f"open construction validation failed: k={code.k}")
    return code


def build_periodic(Lx: int, Ly: int) -> TileCode:
    """Periodic tile code on an Lx×Ly torus: n = 2·Lx·Ly, k = 6.

    Extents must be multiples of 7.
    """
    if Lx % 7 or Ly % 7:
        raise ValueError("periodic extents must be multiples of 7")
    n = 2 * Lx * Ly
    rows, types, anchors = [], [], []
    # Periodic check sets are overcomplete (one dependency per type); drop the
    # last anchor of each type to keep rows independent.
    for ctype, horiz, vert in (
        ("X", X_HORIZONTAL, X_VERTICAL),
        ("Z", Z_HORIZONTAL, Z_VERTICAL),
    ):
        all_anchors = list(itertools.product(range(Lx), range(Ly)))
        for ax, ay in all_anchors:
            row = np.zeros(2 * n, dtype=np.uint8)
            for axis, u, v in _template_points((ax, ay), horiz, vert):
                q = axis * Lx * Ly + (u % Lx) * Ly + (v % Ly)
                row[q if ctype == "X" else n + q] ^= 1
            rows.append(row)
            types.append(ctype)
            anchors.append((ax, ay))
    M = np.array(rows, dtype=np.uint8)
    # keep an independent subset (ranks: Lx*Ly - 3 per type for 7|L extents)
    _, pivots, _ = rref(M.T)
    keep = pivots
    coords = tuple(
        (axis, x, y) for axis in (0, 1) for x in range(Lx) for y in range(Ly)
    )
    code = TileCode(
        checks=M[keep],
        boundary="periodic",
        Lx=Lx,
        Ly=Ly,
        qubit_coords=coords,
        check_types=tuple(types[i] for i in keep),
        check_anchors=tuple(anchors[i] for i in keep),
    )
    code.assert_commuting()
    if code.k != 6:
        raise ValueError(f"periodic construction validation failed: k={code.k}")
    return code


# ---------------------------------------------------------------------------
# Distance


def _min_weight_css_logical(H_stab_other, H_quot, wmax, budget=10**9):
    """Min weight w ≤ wmax of v with H_stab_other·v = 0 and v ∉ rowspace(H_quot),
    by meet-in-the-middle over column subsets.  Returns (w, v) or None."""
    H = np.ascontiguousarray(H_stab_other)
    n = H.shape[1]
    total = sum(math.comb(n, w) for w in range(1, wmax + 1))
    if total > budget:
        raise ValueError(f"distance enumeration budget exceeded ({total:.3g} candidates)")
    rq = rank(H_quot)
    cols = [H[:, i].tobytes() for i in range(n)]
    for w in range(1, wmax + 1):
        half = w // 2
        table: dict[bytes, list] = {}
        for c in itertools.combinations(range(n), half):
            s = np.zeros(H.shape[0], np.uint8)
            for i in c:
                s ^= H[:, i]
            table.setdefault(s.tobytes(), []).append(c)
        for c in itertools.combinations(range(n), w - half):
            s = np.zeros(H.shape[0], np.uint8)
            for i in c:
                s ^= H[:, i]
            for c2 in table.get(s.tobytes(), []):
                if set(c) & set(c2):
                    continue
                v = np.zeros(n, np.uint8)
                v[list(c + c2)] = 1
                if rank(np.vstack([H_quot, v])) > rq:
                    return w, v
    return None


def distance_exact_upto(code: TileCode, wmax: int, budget: int = 10**9):
    """Exact minimum logical weight if ≤ wmax, else the string "greater than wmax".

    CSS codes only: the minimum-weight logical of a CSS code is pure X-type
    or pure Z-type, so both sectors are searched and the smaller wins.
    """
    if wmax <= 0:
        return f"greater than {wmax}"
    if not code.is_css():
        raise ValueError("exact distance search requires a CSS code")
    hx, hz = code.hx, code.hz
    best = None
    for H_other, H_quot, kind in ((hx, hz, "Z"), (hz, hx, "X")):
        cap = wmax if best is None else best[0] - 1
        if cap < 1:
            break
        hit = _min_weight_css_logical(H_other, H_quot, cap, budget)
        if hit is not None and (best is None or hit[0] < best[0]):
            v = hit[1]
            n = code.n
            pauli = (
                PauliVec(np.zeros(n, np.uint8), v)
                if kind == "Z"
                else PauliVec(v, np.zeros(n, np.uint8))
            )
            best = (hit[0], pauli)
    if best is None:
        return f"greater than {wmax}"
    return best


def distance_upper(code: TileCode, effort: int = 200, seed: int = 0):
    """Randomized upper bound: lightest logical found by information-set search.

    Each round applies a random column permutation to the kernel generator
    matrix of one sector and row-reduces it; reduced rows are sparse and any
    non-stabilizer row is a logical candidate.  Returns (weight, certificate).
    """
    if not code.is_css():
        raise ValueError("randomized distance search requires a CSS code")
    from .algebra import kernel_basis

    rng = np.random.default_rng(seed)
    n = code.n
    best_w, best = None, None
    for H_other, H_quot, kind in ((code.hx, code.hz, "Z"), (code.hz, code.hx, "X")):
        K = kernel_basis(H_other)
        rq = rank(H_quot)
        for _ in range(effort):
            perm = rng.permutation(n)
            R, _, r = rref(K[:, perm])
            inv = np.empty(n, dtype=np.intp)
            inv[perm] = np.arange(n)
            for row in R[:r]:
                v = row[inv]
                w = int(v.sum())
                if best_w is not None and w >= best_w:
                    continue
                if rank(np.vstack([H_quot, v])) > rq:
                    zeros = np.zeros(n, np.uint8)
                    best_w = w
                    best = PauliVec(zeros, v) if kind == "Z" else PauliVec(v, zeros)
    return best_w, best


def is_logical(code: TileCode, p: PauliVec) -> bool:
    """True if p commutes with every check and is outside the check row space."""
    n = code.n
    comm = (code.xpart @ p.zbits + code.zpart @ p.xbits) % 2
    if comm.any():
        return False
    vec = np.concatenate([p.xbits, p.zbits])
    return rank(np.vstack([code.checks, vec])) > rank(code.checks)


# ---------------------------------------------------------------------------
# Serialization


def dumps(code: TileCode) -> str:
    """Text serialization: header then one check per line as qubit/axis tokens."""
    n = code.n
    lines = [f"tilecode v1 {code.boundary} {code.Lx} {code.Ly} {n} {code.k}"]
    for r in range(code.num_checks):
        toks = []
        for q in range(n):
            if code.checks[r, q]:
                toks.append(f"{q}X")
            if code.checks[r, n + q]:
                toks.append(f"{q}Z")
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


def loads(text: str) -> TileCode:
    lines = [l for l in text.strip().splitlines() if l.strip()]
    head = lines[0].split()
    if head[:2] != ["tilecode", "v1"]:
        raise ValueError("bad header")
    boundary, Lx, Ly, n, k = head[2], int(head[3]), int(head[4]), int(head[5]), int(head[6])
    rows, types = [], []
    for line in lines[1:]:
        row = np.zeros(2 * n, dtype=np.uint8)
        axes = set()
        for tok in line.split():
            q, axis = int(tok[:-1]), tok[-1]
            axes.add(axis)
            row[q if axis == "X" else n + q] = 1
        rows.append(row)
        types.append("X" if axes == {"X"} else "Z" if axes == {"Z"} else "M")
    coords = tuple(
        (axis, x, y) for axis in (0, 1) for x in range(Lx) for y in range(Ly)
    )
    code = TileCode(
        checks=np.array(rows, dtype=np.uint8),
        boundary=boundary,
        Lx=Lx,
        Ly=Ly,
        qubit_coords=coords,
        check_types=tuple(types),
        check_anchors=tuple((-1, -1) for _ in rows),
    )
    if code.k != k:
        raise ValueError("k mismatch on load")
    return code
