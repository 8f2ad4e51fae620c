"""Effective-bias estimation via Monte-Carlo Pauli propagation.

A syndrome-extraction circuit is compiled to a platform's native entangling
gate, then Pauli error strings are propagated through the ideal Clifford
layers while errors are injected from per-gate Pauli channels (or a uniform
circuit-level channel when no hardware model is selected).  Counting the
single-qubit Pauli letters of the propagated strings yields marginal
probabilities (p̄_I, p̄_X, p̄_Y, p̄_Z), from which the effective error rate
p_eff = p̄_X+p̄_Y+p̄_Z and effective bias η_eff = p̄_Z/(p̄_X+p̄_Y) follow.

The output is a single-qubit marginal model: correlations between qubits in
the propagated strings are deliberately discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from typing import NamedTuple

import numpy as np

from . import circuit as circuit_mod
from .bposd import DecoderConfig
from .channel import BiasedChannel
from .circuit import Circuit, _apply_gate_cols

PLATFORMS = (
    "no-phys-gate",
    "trapped-ions-CX",
    "superconducting-CX",
    "trapped-ions-CZ",
    "neutral-atoms-CZ",
)
STRATEGIES = ("no-native", "cx-native", "cz-native")

DEFAULT_P = 3e-4
DEFAULT_ETA_SYS = 100.0

_LETTERS = "IXYZ"
# (x, z) bits per Pauli letter
_LETTER_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_DEPHASING2 = ("IZ", "ZI", "ZZ")


def _labels(arity: int) -> tuple:
    if arity == 1:
        return tuple(_LETTERS)
    return tuple(a + b for a in _LETTERS for b in _LETTERS)


@dataclass(frozen=True)
class GateChannel:
    """Stochastic Pauli channel on the support of a gate.

    ``probs[i]`` is the probability of the Pauli string ``labels(arity)[i]``;
    entries sum to 1 and the identity entry is the largest.
    """

    arity: int
    probs: tuple

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError("arity must be 1 or 2")
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (4**self.arity,):
            raise ValueError("probability table has wrong length")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("probabilities must be nonnegative and sum to 1")
        if p[0] < p.max():
            raise ValueError("identity entry must be largest")

    @property
    def labels(self) -> tuple:
        return _labels(self.arity)

    def prob(self, label: str) -> float:
        return self.probs[self.labels.index(label)]

    def _tables(self):
        """Cumulative probabilities and per-qubit (x, z) flip lookup tables."""
        cum = np.cumsum(np.asarray(self.probs, dtype=float))
        flips = []
        for i in range(self.arity):
            x = np.array([_LETTER_XZ[s[i]][0] for s in self.labels], dtype=np.uint8)
            z = np.array([_LETTER_XZ[s[i]][1] for s in self.labels], dtype=np.uint8)
            flips.append((x, z))
        return cum, flips


def gate_bias(channel: GateChannel) -> float:
    """η_gate = (p_IZ+p_ZI+p_ZZ) / (total non-identity − dephasing)."""
    if channel.arity != 2:
        raise ValueError("gate bias is defined for two-qubit channels")
    num = sum(channel.prob(s) for s in _DEPHASING2)
    rest = sum(
        channel.prob(s) for s in channel.labels if s != "II" and s not in _DEPHASING2
    )
    if rest == 0:
        return math.inf
    return num / rest


# ---------------------------------------------------------------------------
# Channel tables


def load_channels(path=None) -> dict:
    """Parse a channel data file into {(platform, gate): GateChannel}.

    Format: ``channel <platform> <gate>`` followed by ``PAULI p`` lines.
    Single-qubit channels are platform-independent and filed under ``all``.
    """
    if path is None:
        text = (resources.files("tileqec") / "data" / "channels.txt").read_text()
    else:
        with open(path) as f:
            text = f.read()
    out = {}
    key, table = None, None

    def flush():
        if key is None:
            return
        arity = len(next(iter(table)))
        probs = [table.get(s, 0.0) for s in _labels(arity)]
        out[key] = GateChannel(arity, tuple(probs))

    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "channel":
            flush()
            key, table = (parts[1], parts[2]), {}
        else:
            table[parts[0]] = float(parts[1])
    flush()
    return out


@dataclass(frozen=True)
class PlatformModel:
    """Hardware platform: native 2q gate plus per-gate Pauli channels.

    ``native`` is None for the no-phys-gate model, where every layer applies
    the uniform circuit-level channel w_circ to all qubits instead of
    per-gate channels.
    """

    name: str
    native: str | None  # "CX", "CZ", or None
    p: float = DEFAULT_P
    eta_sys: float = DEFAULT_ETA_SYS
    channels: dict = field(default_factory=dict, compare=False)

    @property
    def w_circ(self) -> tuple:
        """(p_X, p_Y, p_Z, p_I) single-qubit circuit-level channel."""
        pz = self.p * self.eta_sys / (self.eta_sys + 2)
        px = self.p / (self.eta_sys + 2)
        return (px, px, pz, 1.0 - self.p)

    @property
    def w_initmeas(self) -> tuple:
        """(0, 0, p_Y+p_Z, 1−(p_Y+p_Z)): X-basis preparation/readout flips."""
        px, py, pz, _ = self.w_circ
        q = py + pz
        return (0.0, 0.0, q, 1.0 - q)

    def gate_channel(self, name: str) -> GateChannel:
        if self.native is None:
            raise ValueError("no-phys-gate model has no gate channels")
        if name in ("H", "S"):
            return self.channels[("all", name)]
        if name == self.native:
            return self.channels[(self.name, name)]
        raise ValueError(f"gate {name} is not native on {self.name}")


def platform_model(
    name: str, p: float = DEFAULT_P, eta_sys: float = DEFAULT_ETA_SYS, channels=None
) -> PlatformModel:
    if name not in PLATFORMS:
        raise ValueError(f"unknown platform {name!r}")
    if name == "no-phys-gate":
        return PlatformModel(name, None, p, eta_sys)
    native = name.rsplit("-", 1)[1]
    if channels is None:
        channels = load_channels()
    return PlatformModel(name, native, p, eta_sys, channels)


def native_strategy(platform_name: str) -> str:
    """Compilation strategy matching a hardware platform's native gate."""
    if platform_name == "no-phys-gate":
        return "no-native"
    return platform_name.rsplit("-", 1)[1].lower() + "-native"


# ---------------------------------------------------------------------------
# Compilation

# Rewrites expressed as op sequences in circuit order (leftmost acts first).
# S and S† act identically on Pauli strings, so S stands in for both.
_REWRITES = {
    ("cz-native", "CX"): (("H", "t"), ("CZ", "c", "t"), ("H", "t")),
    ("cz-native", "CY"): (
        ("S", "t"),
        ("H", "t"),
        ("CZ", "c", "t"),
        ("H", "t"),
        ("S", "t"),
    ),
    ("cx-native", "CZ"): (("H", "t"), ("CX", "c", "t"), ("H", "t")),
    ("cx-native", "CY"): (("S", "t"), ("CX", "c", "t"), ("S", "t")),
}


def _symplectic_action(ops) -> np.ndarray:
    """4×4 GF(2) action of a 2-qubit op sequence on (x_c, z_c, x_t, z_t)."""
    X = np.zeros((4, 2), dtype=np.uint8)
    Z = np.zeros((4, 2), dtype=np.uint8)
    X[0, 0] = Z[1, 0] = X[2, 1] = Z[3, 1] = 1  # basis rows X_c, Z_c, X_t, Z_t
    for op in ops:
        _apply_gate_cols(X, Z, op)
    return np.concatenate([X[:, [0]], Z[:, [0]], X[:, [1]], Z[:, [1]]], axis=1)


def _verify_rewrites():
    for (strategy, gate), seq in _REWRITES.items():
        want = _symplectic_action([(gate, 0, 1)])
        sub = [(o[0],) + tuple(0 if s == "c" else 1 for s in o[1:]) for o in seq]
        got = _symplectic_action(sub)
        if not np.array_equal(want, got):  # pragma: no cover
            raise AssertionError(f"rewrite for {gate} under {strategy} is not equivalent")


_verify_rewrites()


def compile_circuit(circuit: Circuit, strategy: str) -> Circuit:
    """Express every two-qubit gate in the strategy's native gate."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "no-native":
        return circuit
    ops = []
    for op in circuit.ops:
        rule = _REWRITES.get((strategy, op[0]))
        if rule is None:
            if op[0] in ("CX", "CZ", "CY") and op[0] != strategy[:2].upper():
                raise ValueError(f"unsupported gate {op[0]} under {strategy}")
            ops.append(op)
            continue
        c, t = op[1], op[2]
        for sub in rule:
            ops.append((sub[0],) + tuple(c if s == "c" else t for s in sub[1:]))
    return Circuit(
        circuit.num_qubits, tuple(ops), circuit.detectors, circuit.observables
    )


def gate_layers(circuit: Circuit) -> list:
    """Group the unitary gates of a circuit into disjoint-support layers.

    ASAP scheduling in program order: each gate lands in the earliest layer
    after the last layer touching any of its qubits.  Reset, measurement and
    noise ops are skipped — preparation/readout errors enter through the
    init/meas channel of the platform model.
    """
    last = np.full(circuit.num_qubits, -1, dtype=np.int64)
    layers = []
    for op in circuit.ops:
        if op[0] not in circuit_mod.GATE_NAMES:
            continue
        qs = op[1:]
        t = int(max(last[q] for q in qs)) + 1
        if t == len(layers):
            layers.append([])
        layers[t].append(op)
        for q in qs:
            last[q] = t
    return layers


# ---------------------------------------------------------------------------
# Monte-Carlo propagation


def _apply_weights(X, Z, rng, qubits, w):
    """Inject i.i.d. single-qubit Paulis with weights (p_X, p_Y, p_Z, p_I)."""
    px, py, pz, _ = w
    v = rng.random((X.shape[0], len(qubits)))
    q = np.fromiter(qubits, dtype=np.int64)
    X[:, q] ^= v < px + py
    Z[:, q] ^= (v >= px) & (v < px + py + pz)


def _apply_channel(X, Z, rng, channel_cache, channel, qubits):
    key = id(channel)
    if key not in channel_cache:
        channel_cache[key] = channel._tables()
    cum, flips = channel_cache[key]
    idx = np.searchsorted(cum, rng.random(X.shape[0]))
    for q, (fx, fz) in zip(qubits, flips):
        X[:, q] ^= fx[idx]
        Z[:, q] ^= fz[idx]


def propagate_mc(
    circuit: Circuit,
    model: PlatformModel,
    samples: int,
    seed: int,
    transport: str = "sampled",
) -> np.ndarray:
    """Marginal Pauli probabilities (p̄_I, p̄_X, p̄_Y, p̄_Z) after propagation.

    Init/meas channels act on all qubits at the start and end.  Each gate
    layer is applied by ideal Clifford conjugation; afterwards, per-gate
    channels act on gate supports and w_circ on idle qubits (hardware
    platforms), or w_circ acts on every qubit (no-phys-gate).

    ``transport`` selects how injected errors are counted.  "sampled": every
    error joins the propagated string and is conjugated by all later layers.
    "injected": only initialization errors are transported; circuit-layer and
    readout errors are counted in the frame where they occur.
    """
    if transport not in ("sampled", "injected"):
        raise ValueError(f"unknown transport {transport!r}")
    nq = circuit.num_qubits
    rng = np.random.default_rng(np.random.Philox(key=[seed, 0]))
    X = np.zeros((samples, nq), dtype=np.uint8)
    Z = np.zeros((samples, nq), dtype=np.uint8)
    allq = range(nq)
    cache = {}
    if transport == "sampled":
        LX, LZ = X, Z  # layer errors join the propagated string
    else:
        LX = np.zeros_like(X)  # layer errors stay in their local frame
        LZ = np.zeros_like(Z)

    _apply_weights(X, Z, rng, allq, model.w_initmeas)
    for layer in gate_layers(circuit):
        for op in layer:
            _apply_gate_cols(X, Z, op)
        if model.native is None:
            _apply_weights(LX, LZ, rng, allq, model.w_circ)
        else:
            active = set()
            for op in layer:
                _apply_channel(LX, LZ, rng, cache, model.gate_channel(op[0]), op[1:])
                active.update(op[1:])
            idle = [q for q in allq if q not in active]
            if idle:
                _apply_weights(LX, LZ, rng, idle, model.w_circ)
    _apply_weights(LX, LZ, rng, allq, model.w_initmeas)
    if LX is not X:
        X ^= LX
        Z ^= LZ

    total = samples * nq
    cy = int(np.count_nonzero(X & Z))
    cx = int(np.count_nonzero(X)) - cy
    cz = int(np.count_nonzero(Z)) - cy
    ci = total - cx - cy - cz
    return np.array([ci, cx, cy, cz], dtype=float) / total


class EffParams(NamedTuple):
    """p_eff = p̄_X+p̄_Y+p̄_Z; η_eff = p̄_Z/(p̄_X+p̄_Y).

    η_eff is math.inf when only Z errors occur and math.nan when no errors
    occur at all (undefined).
    """

    p_eff: float
    eta_eff: float


def eff_params(marginals) -> EffParams:
    _, px, py, pz = (float(v) for v in marginals)
    p_eff = px + py + pz
    if px + py > 0:
        eta = pz / (px + py)
    elif pz > 0:
        eta = math.inf
    else:
        eta = math.nan
    return EffParams(p_eff, eta)


def variant_circuit(code, deformation=None, rounds: int = 1, z_order=None) -> Circuit:
    """Noiseless syndrome-extraction circuit used for bias propagation."""
    return circuit_mod.build_memory(
        code, deformation, rounds=rounds, z_order=z_order, noise=None
    )


def estimate(
    code,
    deformation,
    strategy: str,
    model: PlatformModel,
    samples: int,
    seed: int,
    rounds: int = 1,
    transport: str = "sampled",
) -> EffParams:
    """Compile a variant's circuit and estimate its effective (p, η)."""
    circ = compile_circuit(variant_circuit(code, deformation, rounds), strategy)
    return eff_params(propagate_mc(circ, model, samples, seed, transport))


# ---------------------------------------------------------------------------
# Phenomenological evaluation of an effective model


class PhenoResult(NamedTuple):
    p_l: float
    p_eff: float
    eta_eff: float
    below_threshold: bool | None


def pheno_eval(
    code,
    deformation,
    p_eff: float,
    eta_eff: float,
    shots: int,
    seed: int,
    rounds: int = circuit_mod.DEFAULT_ROUNDS,
    config: DecoderConfig | None = None,
    threshold_curve=None,
) -> PhenoResult:
    """Logical error rate of the effective Pauli model under a
    phenomenological memory simulation.

    ``threshold_curve`` is an optional sequence of (η, p_th) points; when
    given, the result reports whether (p_eff, η_eff) lies below the
    log-interpolated threshold at η_eff.
    """
    noise = BiasedChannel(p_eff, eta_eff)
    p_l = circuit_mod.memory_failure_rate(
        code,
        deformation,
        noise,
        shots,
        seed,
        rounds=rounds,
        config=config,
        noise_mode="pheno",
    )
    below = None
    if threshold_curve:
        pts = sorted((float(e), float(t)) for e, t in threshold_curve)
        etas = np.log([e for e, _ in pts])
        ths = np.array([t for _, t in pts])
        p_th = float(np.interp(math.log(eta_eff), etas, ths))
        below = p_eff < p_th
    return PhenoResult(p_l, p_eff, eta_eff, below)


def effbias_csv_header() -> str:
    return "variant,strategy,platform,p_eff,eta_eff,p_l"


def effbias_csv_row(variant, strategy, platform, params: EffParams, p_l=None) -> str:
    pl = "" if p_l is None else repr(float(p_l))
    return f"{variant},{strategy},{platform},{params.p_eff!r},{params.eta_eff!r},{pl}"
