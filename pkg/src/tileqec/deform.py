"""Single-qubit Clifford deformations as symplectic column transforms.

A deformation assigns each qubit one of the six invertible 2×2 GF(2) maps on
its (x, z) bit pair — the permutations of the Pauli axes.  Tags name the pair
of axes swapped (or the 3-cycle):

    I          identity
    XZ         Hadamard            (x,z) -> (z,x)
    YZ         HSH                 (x,z) -> (x+z,z)   X fixed, Y<->Z
    XY         S                   (x,z) -> (x,x+z)   Z fixed, X<->Y
    cycle_xzy  X->Z->Y->X          (x,z) -> (z,x+z)
    cycle_xyz  X->Y->Z->X          (x,z) -> (x+z,x)
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .tilecode import TileCode

TAGS = ("I", "XZ", "YZ", "XY", "cycle_xzy", "cycle_xyz")

# (x', z') = (a x + b z, c x + d z); matrices stored as ((a,b),(c,d)).
TAG_MATRICES = {
    "I": ((1, 0), (0, 1)),
    "XZ": ((0, 1), (1, 0)),
    "YZ": ((1, 1), (0, 1)),
    "XY": ((1, 0), (1, 1)),
    "cycle_xzy": ((0, 1), (1, 1)),
    "cycle_xyz": ((1, 1), (1, 0)),
}

TAG_INVERSE = {
    "I": "I",
    "XZ": "XZ",
    "YZ": "YZ",
    "XY": "XY",
    "cycle_xzy": "cycle_xyz",
    "cycle_xyz": "cycle_xzy",
}


@dataclass(frozen=True)
class DeformationMap:
    """Per-qubit Clifford tags."""

    tags: tuple

    def __post_init__(self):
        for t in self.tags:
            if t not in TAG_MATRICES:
                raise ValueError(f"unknown tag {t!r}")

    @property
    def n(self) -> int:
        return len(self.tags)

    @classmethod
    def identity(cls, n: int) -> "DeformationMap":
        return cls(("I",) * n)

    def inverse(self) -> "DeformationMap":
        return DeformationMap(tuple(TAG_INVERSE[t] for t in self.tags))

    def compose(self, other: "DeformationMap") -> "DeformationMap":
        """Map applying `other` first, then self."""
        if self.n != other.n:
            raise ValueError("length mismatch")
        out = []
        for a, b in zip(self.tags, other.tags):
            Ma, Mb = TAG_MATRICES[a], TAG_MATRICES[b]
            M = tuple(
                tuple((Ma[i][0] * Mb[0][j] + Ma[i][1] * Mb[1][j]) % 2 for j in range(2))
                for i in range(2)
            )
            out.append(next(t for t, m in TAG_MATRICES.items() if m == M))
        return DeformationMap(tuple(out))


def transform_symplectic(rows: np.ndarray, dmap: DeformationMap) -> np.ndarray:
    """Apply the per-qubit column transform to (m, 2n) symplectic rows."""
    n = rows.shape[1] // 2
    if dmap.n != n:
        raise ValueError("deformation length mismatch")
    x = rows[:, :n].copy()
    z = rows[:, n:].copy()
    newx, newz = x.copy(), z.copy()
    for tag in set(dmap.tags):
        (a, b), (c, d) = TAG_MATRICES[tag]
        cols = np.array([i for i, t in enumerate(dmap.tags) if t == tag])
        newx[:, cols] = (a * x[:, cols] + b * z[:, cols]) % 2
        newz[:, cols] = (c * x[:, cols] + d * z[:, cols]) % 2
    return np.concatenate([newx, newz], axis=1).astype(np.uint8)


def apply(code: TileCode, dmap: DeformationMap) -> TileCode:
    """Deformed code: same (n, k), column-transformed check matrix."""
    return replace(code, checks=transform_symplectic(code.checks, dmap))


def random_map(n: int, pi_xz: float, pi_yz: float, seed: int) -> DeformationMap:
    """I.i.d. per-qubit tags: XZ w.p. pi_xz, YZ w.p. pi_yz, else I."""
    if pi_xz < 0 or pi_yz < 0 or pi_xz + pi_yz > 1:
        raise ValueError("invalid probabilities")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    tags = tuple(
        "XZ" if ui < pi_xz else "YZ" if ui < pi_xz + pi_yz else "I" for ui in u
    )
    return DeformationMap(tags)


def ti_linear(code: TileCode) -> DeformationMap:
    """Hadamard on every vertical qubit (the 'linear' variant)."""
    tags = ["I"] * code.n
    for q in code.vertical_qubits():
        tags[q] = "XZ"
    return DeformationMap(tuple(tags))


def ti_xy(code: TileCode) -> DeformationMap:
    """HSH on every qubit (the 'XY' variant): Z-type checks become Y-type."""
    return DeformationMap(("YZ",) * code.n)


# Default 2×2 unit cell realizing tag fractions (1/4 XZ, 1/2 YZ, 1/4 I);
# 2 divides every supported lattice extent, and this arrangement keeps the
# pure-Z logical basis size constant across sizes.
DEFAULT_CELL_025_05 = (("XZ", "I"), ("YZ", "YZ"))


def ti_unitcell(code: TileCode, cell=DEFAULT_CELL_025_05) -> DeformationMap:
    """Tile a w×h grid of tags over vertex coordinates (x mod w, y mod h)."""
    w, h = len(cell), len(cell[0])
    if code.Lx % w or code.Ly % h:
        raise ValueError("cell dimensions must divide lattice extents")
    tags = []
    for axis, x, y in code.qubit_coords:
        tags.append(cell[x % w][y % h])
    return DeformationMap(tuple(tags))


# ---------------------------------------------------------------------------
# Serialization: `deform v1 <n>` / `cell v1 <w> <h>`, one tag per line.


def dumps_map(dmap: DeformationMap) -> str:
    return f"deform v1 {dmap.n}\n" + "\n".join(dmap.tags) + "\n"


def loads_map(text: str) -> DeformationMap:
    lines = text.strip().splitlines()
    head = lines[0].split()
    if head[:2] != ["deform", "v1"]:
        raise ValueError("bad header")
    n = int(head[2])
    tags = tuple(l.strip() for l in lines[1 : 1 + n])
    if len(tags) != n:
        raise ValueError("tag count mismatch")
    return DeformationMap(tags)


def dumps_cell(cell) -> str:
    w, h = len(cell), len(cell[0])
    lines = [f"cell v1 {w} {h}"]
    for x in range(w):
        for y in range(h):
            lines.append(cell[x][y])
    return "\n".join(lines) + "\n"


def loads_cell(text: str):
    lines = text.strip().splitlines()
    head = lines[0].split()
    if head[:2] != ["cell", "v1"]:
        raise ValueError("bad header")
    w, h = int(head[2]), int(head[3])
    tags = [l.strip() for l in lines[1 : 1 + w * h]]
    if len(tags) != w * h:
        raise ValueError("tag count mismatch")
    return tuple(tuple(tags[x * h + y] for y in range(h)) for x in range(w))
