"""Syndrome-extraction circuits, Pauli-frame sampling, and detector error models.

Circuits are flat op lists over data qubits (code indices) and check qubits
(offset by n).  A memory experiment resets everything to |+⟩, applies the
deformation's single-qubit layer, runs interleaved X/Z entangling rounds on a
7-step schedule, measures-and-resets the checks each round, undoes the
deformation, and measures the data in the X basis.  Noise is annotated as
explicit NOISE ops so that one backward symplectic pass both certifies
detector determinism and yields the symptom of every elementary fault (the
detector error model).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import deform as deform_mod
from .algebra import kernel_basis, rank
from .bposd import DecoderConfig, DecodingProblem, decode_batch
from .channel import BiasedChannel
from .tilecode import (
    TileCode,
    X_HORIZONTAL,
    X_VERTICAL,
    Z_HORIZONTAL,
    Z_VERTICAL,
)

# Canonical data-qubit slots of a bulk check: (axis, (dx, dy)) from the anchor.
X_SLOTS = tuple(
    [(0, d) for d in X_HORIZONTAL] + [(1, d) for d in X_VERTICAL]
)
Z_SLOTS = tuple(
    [(0, d) for d in Z_HORIZONTAL] + [(1, d) for d in Z_VERTICAL]
)

DEFAULT_ROUNDS = 8


@dataclass(frozen=True)
class Circuit:
    """Flat Clifford circuit with noise annotations, detectors, observables.

    ops: tuple of tuples —
      ("RX", q) reset to |+⟩; ("MX", q) X-basis measurement (indices are
      sequential over the whole circuit); ("H"|"S", q); ("CX"|"CZ"|"CY", c, t);
      ("NOISE", q, px, py, pz); ("TICK",).
    detectors/observables: tuples of frozensets of measurement indices.
    """

    num_qubits: int
    ops: tuple
    detectors: tuple
    observables: tuple
    num_measurements: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self,
            "num_measurements",
            sum(1 for op in self.ops if op[0] == "MX"),
        )


@dataclass(frozen=True)
class DetectorErrorModel:
    """Mechanisms (probability, detector ids, observable ids), merged by symptom."""

    num_detectors: int
    num_observables: int
    mechanisms: tuple  # of (p, tuple(det ids), tuple(obs ids))


# ---------------------------------------------------------------------------
# Gate symplectic actions (self-inverse for H, CX, CZ, CY; S's symplectic
# action equals its inverse's)


def _apply_gate_cols(X, Z, op):
    name = op[0]
    if name == "H":
        q = op[1]
        tmp = X[:, q].copy()
        X[:, q] = Z[:, q]
        Z[:, q] = tmp
    elif name == "S":
        q = op[1]
        Z[:, q] ^= X[:, q]
    elif name == "CX":
        c, t = op[1], op[2]
        X[:, t] ^= X[:, c]
        Z[:, c] ^= Z[:, t]
    elif name == "CZ":
        c, t = op[1], op[2]
        Z[:, t] ^= X[:, c]
        Z[:, c] ^= X[:, t]
    elif name == "CY":
        c, t = op[1], op[2]
        xc = X[:, c].copy()
        Z[:, c] ^= X[:, t] ^ Z[:, t]
        X[:, t] ^= xc
        Z[:, t] ^= xc
    else:  # pragma: no cover
        raise ValueError(f"not a gate: {name}")


GATE_NAMES = {"H", "S", "CX", "CZ", "CY"}


# ---------------------------------------------------------------------------
# Backward pass: determinism + fault symptoms


def _backward_pass(circuit: Circuit, collect_mechanisms: bool):
    """Propagate all detector/observable operators to time 0.

    Returns (nondet flags per row, mechanism list).  Row order: detectors
    then observables.  Each mechanism is (op_index, q, (px,py,pz),
    symptom_x, symptom_y, symptom_z) with symptoms as uint8 row vectors.
    """
    rows = list(circuit.detectors) + list(circuit.observables)
    D = len(rows)
    nq = circuit.num_qubits
    X = np.zeros((D, nq), dtype=np.uint8)
    Z = np.zeros((D, nq), dtype=np.uint8)
    nondet = np.zeros(D, dtype=bool)
    meas_rows = {}
    for i, s in enumerate(rows):
        for m in s:
            meas_rows.setdefault(m, []).append(i)
    midx = circuit.num_measurements
    mechanisms = []
    for opi in range(len(circuit.ops) - 1, -1, -1):
        op = circuit.ops[opi]
        name = op[0]
        if name == "MX":
            midx -= 1
            q = op[1]
            for i in meas_rows.get(midx, ()):
                X[i, q] ^= 1
            nondet |= Z[:, q] == 1
        elif name == "RX":
            q = op[1]
            nondet |= Z[:, q] == 1
            X[:, q] = 0
            Z[:, q] = 0
        elif name == "NOISE":
            if collect_mechanisms:
                q = op[1]
                sx = Z[:, q].copy()  # inserted X anticommutes with Z support
                sz = X[:, q].copy()
                mechanisms.append((opi, q, op[2:], sx, sx ^ sz, sz))
        elif name == "TICK":
            pass
        else:
            _apply_gate_cols(X, Z, op)
    nondet |= Z.any(axis=1)
    return nondet, mechanisms


def determinism_flags(circuit: Circuit) -> np.ndarray:
    """Per detector-then-observable row: True iff non-deterministic."""
    nondet, _ = _backward_pass(circuit, collect_mechanisms=False)
    return nondet


def build_dem(circuit: Circuit) -> DetectorErrorModel:
    """Detector error model: per fault location × Pauli, the flipped
    detectors/observables; identical symptoms merged via p₁(1−p₂)+p₂(1−p₁)."""
    nondet, mechs = _backward_pass(circuit, collect_mechanisms=True)
    if nondet.any():
        raise ValueError("circuit has non-deterministic detectors")
    nd = len(circuit.detectors)
    merged = {}
    for _, _, probs, sx, sy, sz in mechs:
        for p, s in zip(probs, (sx, sy, sz)):
            if p <= 0 or not s.any():
                continue
            key = s.tobytes()
            if key in merged:
                q0 = merged[key][0]
                merged[key] = (q0 * (1 - p) + p * (1 - q0), s)
            else:
                merged[key] = (p, s)
    out = []
    for p, s in merged.values():
        ids = np.nonzero(s)[0]
        dets = tuple(int(i) for i in ids if i < nd)
        obs = tuple(int(i) - nd for i in ids if i >= nd)
        out.append((float(p), dets, obs))
    out.sort(key=lambda t: (t[1], t[2]))
    return DetectorErrorModel(nd, len(circuit.observables), tuple(out))


# ---------------------------------------------------------------------------
# Forward Pauli-frame sampling


def frame_sample(circuit: Circuit, shots: int, seed: int):
    """Sample detector and observable flip tables, (shots, D) and (shots, K)."""
    nq = circuit.num_qubits
    rng = np.random.default_rng(np.random.Philox(key=[seed, 0]))
    FX = np.zeros((shots, nq), dtype=np.uint8)
    FZ = np.zeros((shots, nq), dtype=np.uint8)
    mflips = np.zeros((shots, circuit.num_measurements), dtype=np.uint8)
    midx = 0
    for op in circuit.ops:
        name = op[0]
        if name == "NOISE":
            q, px, py, pz = op[1], op[2], op[3], op[4]
            v = rng.random(shots)
            FX[:, q] ^= v < px + py
            FZ[:, q] ^= (v >= px) & (v < px + py + pz)
        elif name == "MX":
            mflips[:, midx] = FZ[:, op[1]]
            midx += 1
        elif name == "RX":
            FX[:, op[1]] = 0
            FZ[:, op[1]] = 0
        elif name == "TICK":
            pass
        else:
            _apply_gate_cols(FX, FZ, op)
    D = len(circuit.detectors)
    det = np.zeros((shots, D), dtype=np.uint8)
    for i, s in enumerate(circuit.detectors):
        for m in s:
            det[:, i] ^= mflips[:, m]
    obs = np.zeros((shots, len(circuit.observables)), dtype=np.uint8)
    for i, s in enumerate(circuit.observables):
        for m in s:
            obs[:, i] ^= mflips[:, m]
    return det, obs


# ---------------------------------------------------------------------------
# Memory-experiment construction


def _tag_gates(tag: str):
    """Single-qubit gate sequence realizing a deformation tag's symplectic map."""
    target = deform_mod.TAG_MATRICES[tag]
    gates = {"H": np.array([[0, 1], [1, 0]]), "S": np.array([[1, 0], [1, 1]])}
    # search short products of H and S (column maps compose left-to-right)
    for depth in range(4):
        for seq in itertools.product("HS", repeat=depth):
            M = np.eye(2, dtype=int)
            for g in seq:
                M = gates[g] @ M % 2
            if (M % 2 == np.asarray(target) % 2).all():
                return seq
    raise ValueError(f"no H/S realization for tag {tag}")  # pragma: no cover


def css_x_logicals(code: TileCode) -> np.ndarray:
    """k independent pure-X logical representatives of an undeformed code."""
    K = kernel_basis(code.hz)  # X ops commuting with all Z checks
    stack = code.hx
    r0 = rank(stack)
    picked = []
    for v in K:
        cand = np.vstack([stack, v])
        r1 = rank(cand)
        if r1 > r0:
            picked.append(v)
            stack, r0 = cand, r1
        if len(picked) == code.k:
            break
    if len(picked) != code.k:
        raise ValueError("X-logical extraction failed")
    return np.array(picked, dtype=np.uint8)


def _check_slot_qubit(code: TileCode, row: int, slot):
    """Data-qubit index for a check's slot, or None if clipped away."""
    axis, (dx, dy) = slot
    ax, ay = code.check_anchors[row]
    x, y = ax + dx, ay + dy
    if code.boundary == "periodic":
        x %= code.Lx
        y %= code.Ly
    elif not (0 <= x < code.Lx and 0 <= y < code.Ly):
        return None
    q = code.qubit_index(axis, x, y)
    if not (code.xpart[row, q] or code.zpart[row, q]):
        return None
    return q


def _entangle_gate(dcode: TileCode, row: int, q: int) -> str:
    x, z = dcode.xpart[row, q], dcode.zpart[row, q]
    return {(1, 0): "CX", (0, 1): "CZ", (1, 1): "CY"}[(int(x), int(z))]


def build_memory(
    code: TileCode,
    deformation: deform_mod.DeformationMap | None = None,
    rounds: int = DEFAULT_ROUNDS,
    z_order: tuple = None,
    x_order: tuple = None,
    noise: BiasedChannel | None = None,
    noise_mode: str = "circuit",  # "circuit" | "pheno"
) -> Circuit:
    """X-basis memory experiment for a (possibly deformed) tile code.

    The 7-step schedule interleaves X-check layer k with Z-check layer k−1;
    x_order/z_order permute the canonical slot lists.  Detectors: first-round
    checks that are deterministic, consecutive-round differences for all
    checks, and final data-reconstruction comparisons for X-type checks.
    Observables: the undeformed code's pure-X logicals at the final layer.
    """
    if z_order is None:
        z_order = DEFAULT_Z_ORDER
    if x_order is None:
        x_order = DEFAULT_X_ORDER
    dcode = deform_mod.apply(code, deformation) if deformation is not None else code
    n, m = code.n, code.num_checks
    nq = n + m
    px = py = pz = 0.0
    if noise is not None:
        px, py, pz = noise.p_x, noise.p_y, noise.p_z
    noisy = noise is not None and noise.p > 0
    circuit_noise = noisy and noise_mode == "circuit"

    ops = []

    def noise_on(qs):
        for q in qs:
            ops.append(("NOISE", q, px, py, pz))

    data = list(range(n))
    checks = list(range(n, nq))
    x_rows = [r for r, t in enumerate(code.check_types) if t == "X"]
    z_rows = [r for r, t in enumerate(code.check_types) if t == "Z"]

    # per-check slot qubits in schedule order
    x_layers = []  # 6 layers of (check qubit, data qubit, gate)
    for step in range(6):
        layer = []
        for r in x_rows:
            q = _check_slot_qubit(code, r, X_SLOTS[x_order[step]])
            if q is not None:
                layer.append((n + r, q, _entangle_gate(dcode, r, q)))
        x_layers.append(layer)
    z_layers = []
    for step in range(6):
        layer = []
        for r in z_rows:
            q = _check_slot_qubit(code, r, Z_SLOTS[z_order[step]])
            if q is not None:
                layer.append((n + r, q, _entangle_gate(dcode, r, q)))
        z_layers.append(layer)

    # init: everything to |+⟩
    for q in data + checks:
        ops.append(("RX", q))
    if circuit_noise:
        noise_on(data + checks)
    # deformation layer
    if deformation is not None:
        for q in range(n):
            seq = _tag_gates(deformation.tags[q])
            for g in seq:
                ops.append((g, q))
            if circuit_noise and seq:
                noise_on([q])
    ops.append(("TICK",))

    def emit_layer(pairs):
        for cq, dq, g in pairs:
            ops.append((g, cq, dq))
        if circuit_noise:
            for cq, dq, _ in pairs:
                noise_on([cq, dq])

    for _ in range(rounds):
        if noisy:
            noise_on(data)  # start-of-round data noise (both modes)
        # 7 interleaved steps
        emit_layer(x_layers[0])
        ops.append(("TICK",))
        for k in range(1, 6):
            emit_layer(x_layers[k])
            emit_layer(z_layers[k - 1])
            ops.append(("TICK",))
        emit_layer(z_layers[5])
        ops.append(("TICK",))
        for r in range(m):
            if noisy:
                noise_on([n + r])  # pre-measurement noise (both modes)
            ops.append(("MX", n + r))
            ops.append(("RX", n + r))
            if circuit_noise:
                noise_on([n + r])
        ops.append(("TICK",))

    # undo deformation, measure data
    if deformation is not None:
        inv = deformation.inverse()
        for q in range(n):
            seq = _tag_gates(inv.tags[q])
            for g in seq:
                ops.append((g, q))
            if circuit_noise and seq:
                noise_on([q])
    if circuit_noise:
        noise_on(data)  # pre-measurement noise on data
    for q in data:
        ops.append(("MX", q))

    # detectors
    detectors = []
    for r in range(m):  # round 1, filtered by determinism below
        detectors.append(frozenset({r}))
    first_round_count = m
    for rd in range(1, rounds):
        for r in range(m):
            detectors.append(frozenset({(rd - 1) * m + r, rd * m + r}))
    final_base = rounds * m
    for r in x_rows:
        supp = np.nonzero(code.hx[x_rows.index(r)])[0]
        detectors.append(
            frozenset({(rounds - 1) * m + r} | {final_base + int(q) for q in supp})
        )
    observables = []
    for row in css_x_logicals(code):
        observables.append(frozenset(final_base + int(q) for q in np.nonzero(row)[0]))

    circ = Circuit(nq, tuple(ops), tuple(detectors), tuple(observables))
    nondet = determinism_flags(circ)
    # drop the non-deterministic first-round candidates (non-memory-basis checks)
    keep = [
        i
        for i in range(len(detectors))
        if i >= first_round_count or not nondet[i]
    ]
    bad = [i for i in keep if nondet[i]] + [
        i for i in range(len(observables)) if nondet[len(detectors) + i]
    ]
    if bad:
        raise ValueError("schedule yields non-deterministic detectors")
    return Circuit(
        nq, tuple(ops), tuple(detectors[i] for i in keep), tuple(observables)
    )


def schedule_search(code: TileCode, rounds: int = 3):
    """All Z-layer slot permutations giving fully deterministic detectors."""
    valid = []
    for perm in itertools.permutations(range(6)):
        try:
            build_memory(code, None, rounds=rounds, z_order=perm)
        except ValueError:
            continue
        valid.append(perm)
    return valid


# ---------------------------------------------------------------------------
# Decoding

def dem_problem(dem: DetectorErrorModel):
    """(DecodingProblem over active detectors, active-row indices, obs matrix)."""
    M = len(dem.mechanisms)
    H = np.zeros((dem.num_detectors, M), dtype=np.uint8)
    O = np.zeros((M, dem.num_observables), dtype=np.uint8)
    priors = np.empty(M)
    for j, (p, dets, obs) in enumerate(dem.mechanisms):
        priors[j] = p
        for d in dets:
            H[d, j] = 1
        for o in obs:
            O[j, o] = 1
    active = np.nonzero(H.any(axis=1))[0]
    return DecodingProblem(H[active], priors), active, O


def decode_circuit(
    dem: DetectorErrorModel,
    det_samples: np.ndarray,
    obs_samples: np.ndarray,
    config: DecoderConfig | None = None,
) -> float:
    """Logical failure rate: decode detector samples, compare predicted
    observable flips against the sampled ones.

    Samples are decoded in chunks to bound the memory of the batched BP
    message arrays.
    """
    problem, active, O = dem_problem(dem)
    B = det_samples.shape[0]
    chunk = max(256, 16_000_000 // max(1, problem.H.shape[1]))
    fails = 0
    for lo in range(0, B, chunk):
        hi = min(B, lo + chunk)
        est = decode_batch(problem, det_samples[lo:hi, active], config)
        pred = est @ O % 2
        fails += int((pred != obs_samples[lo:hi]).any(axis=1).sum())
    return fails / B


def memory_failure_rate(
    code: TileCode,
    deformation,
    noise: BiasedChannel,
    shots: int,
    seed: int,
    rounds: int = DEFAULT_ROUNDS,
    config: DecoderConfig | None = None,
    noise_mode: str = "circuit",
    z_order: tuple = None,
) -> float:
    """End-to-end: build circuit, sample frames, decode with the DEM."""
    circ = build_memory(
        code, deformation, rounds=rounds, z_order=z_order, noise=noise, noise_mode=noise_mode
    )
    dem = build_dem(circ)
    det, obs = frame_sample(circ, shots, seed)
    return decode_circuit(dem, det, obs, config)


# ---------------------------------------------------------------------------
# Text formats


def circuit_dumps(circuit: Circuit) -> str:
    lines = []
    for op in circuit.ops:
        if op[0] == "NOISE":
            lines.append(f"NOISE {op[1]} {op[2]!r} {op[3]!r} {op[4]!r}")
        else:
            lines.append(" ".join([op[0]] + [str(a) for a in op[1:]]))
    for s in circuit.detectors:
        lines.append("DETECTOR " + " ".join(str(m) for m in sorted(s)))
    for i, s in enumerate(circuit.observables):
        lines.append(f"OBSERVABLE {i} " + " ".join(str(m) for m in sorted(s)))
    return f"QUBITS {circuit.num_qubits}\n" + "\n".join(lines) + "\n"


def circuit_loads(text: str) -> Circuit:
    ops = []
    detectors = []
    observables = []
    nq = 0
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "QUBITS":
            nq = int(parts[1])
        elif parts[0] == "NOISE":
            ops.append(
                ("NOISE", int(parts[1]), float(parts[2]), float(parts[3]), float(parts[4]))
            )
        elif parts[0] == "DETECTOR":
            detectors.append(frozenset(int(m) for m in parts[1:]))
        elif parts[0] == "OBSERVABLE":
            observables.append(frozenset(int(m) for m in parts[2:]))
        elif parts[0] == "TICK":
            ops.append(("TICK",))
        else:
            ops.append(tuple([parts[0]] + [int(a) for a in parts[1:]]))
    return Circuit(nq, tuple(ops), tuple(detectors), tuple(observables))


def dem_dumps(dem: DetectorErrorModel) -> str:
    lines = [f"dem {dem.num_detectors} {dem.num_observables}"]
    for p, dets, obs in dem.mechanisms:
        terms = [f"D{d}" for d in dets] + [f"L{o}" for o in obs]
        lines.append(f"error({p!r}) " + " ".join(terms))
    return "\n".join(lines) + "\n"


def dem_loads(text: str) -> DetectorErrorModel:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    _, nd, no = lines[0].split()
    mechs = []
    for ln in lines[1:]:
        head, _, rest = ln.partition(") ")
        p = float(head[len("error(") :])
        dets = tuple(int(t[1:]) for t in rest.split() if t.startswith("D"))
        obs = tuple(int(t[1:]) for t in rest.split() if t.startswith("L"))
        mechs.append((p, dets, obs))
    return DetectorErrorModel(int(nd), int(no), tuple(mechs))


# Pinned by the schedule search on the CSS code: this X slot order admits
# exactly six valid Z permutations; the default Z order is one of them.
DEFAULT_X_ORDER = (0, 3, 1, 4, 2, 5)
DEFAULT_Z_ORDER = (2, 5, 1, 4, 0, 3)
