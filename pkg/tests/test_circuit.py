"""Oracle tests for syndrome-extraction circuits, DEMs, and frame sampling."""

import itertools
import math

import numpy as np
import pytest

from tileqec.channel import BiasedChannel
from tileqec.circuit import (
    DEFAULT_X_ORDER,
    DEFAULT_Z_ORDER,
    Circuit,
    _apply_gate_cols,
    build_dem,
    build_memory,
    circuit_dumps,
    circuit_loads,
    decode_circuit,
    dem_dumps,
    dem_loads,
    dem_problem,
    determinism_flags,
    frame_sample,
    memory_failure_rate,
)
from tileqec.deform import ti_linear, ti_unitcell, ti_xy
from tileqec.tilecode import build_open


def _variant(kind, L=6):
    code = build_open(L)
    dmap = {
        "css": None,
        "linear": ti_linear(code),
        "xy": ti_xy(code),
        "unitcell": ti_unitcell(code),
    }[kind]
    return code, dmap


@pytest.mark.parametrize("kind", ["css", "linear", "xy", "unitcell"])
def test_noiseless_determinism(kind):
    code, dmap = _variant(kind)
    circ = build_memory(code, dmap, rounds=2)
    det, obs = frame_sample(circ, 20, seed=0)
    assert not det.any()
    assert not obs.any()
    assert not determinism_flags(circ).any()


def test_gate_conjugation_tables():
    # exhaustive hand-checked symplectic actions on basis Paulis
    def frame(name, xin, zin):
        X = np.array([list(xin)], dtype=np.uint8)
        Z = np.array([list(zin)], dtype=np.uint8)
        _apply_gate_cols(X, Z, (name, 0, 1) if len(xin) == 2 else (name, 0))
        return tuple(X[0]), tuple(Z[0])

    # CX: X⊗I → X⊗X, I⊗Z → Z⊗Z, I⊗X and Z⊗I fixed
    assert frame("CX", (1, 0), (0, 0)) == ((1, 1), (0, 0))
    assert frame("CX", (0, 0), (0, 1)) == ((0, 0), (1, 1))
    assert frame("CX", (0, 1), (0, 0)) == ((0, 1), (0, 0))
    assert frame("CX", (0, 0), (1, 0)) == ((0, 0), (1, 0))
    # CZ: X⊗I → X⊗Z, I⊗X → Z⊗X, Z⊗Z fixed
    assert frame("CZ", (1, 0), (0, 0)) == ((1, 0), (0, 1))
    assert frame("CZ", (0, 1), (0, 0)) == ((0, 1), (1, 0))
    assert frame("CZ", (0, 0), (1, 1)) == ((0, 0), (1, 1))
    # CY: X⊗I → X⊗Y, I⊗X → Z⊗X, I⊗Y fixed (Y commutes with controlled-Y)
    assert frame("CY", (1, 0), (0, 0)) == ((1, 1), (0, 1))
    assert frame("CY", (0, 1), (0, 0)) == ((0, 1), (1, 0))
    assert frame("CY", (0, 1), (0, 1)) == ((0, 1), (0, 1))
    # H swaps X and Z; S maps X → Y, fixes Z
    assert frame("H", (1,), (0,)) == ((0,), (1,))
    assert frame("H", (0,), (1,)) == ((1,), (0,))
    assert frame("S", (1,), (0,)) == ((1,), (1,))
    assert frame("S", (0,), (1,)) == ((0,), (1,))


def test_gate_actions_preserve_commutation():
    # the symplectic form ⟨a,b⟩ = Xa·Zb + Za·Xb is invariant under every gate
    for name in ("H", "S"):
        for a, b in itertools.product(range(4), repeat=2):
            Xa, Za = np.array([[a & 1]], np.uint8), np.array([[a >> 1]], np.uint8)
            Xb, Zb = np.array([[b & 1]], np.uint8), np.array([[b >> 1]], np.uint8)
            before = int(Xa[0] @ Zb[0] + Za[0] @ Xb[0]) % 2
            _apply_gate_cols(Xa, Za, (name, 0))
            _apply_gate_cols(Xb, Zb, (name, 0))
            after = int(Xa[0] @ Zb[0] + Za[0] @ Xb[0]) % 2
            assert before == after
    for name in ("CX", "CZ", "CY"):
        for a, b in itertools.product(range(16), repeat=2):
            Xa = np.array([[a & 1, (a >> 1) & 1]], np.uint8)
            Za = np.array([[(a >> 2) & 1, (a >> 3) & 1]], np.uint8)
            Xb = np.array([[b & 1, (b >> 1) & 1]], np.uint8)
            Zb = np.array([[(b >> 2) & 1, (b >> 3) & 1]], np.uint8)
            before = int(Xa[0] @ Zb[0] + Za[0] @ Xb[0]) % 2
            _apply_gate_cols(Xa, Za, (name, 0, 1))
            _apply_gate_cols(Xb, Zb, (name, 0, 1))
            after = int(Xa[0] @ Zb[0] + Za[0] @ Xb[0]) % 2
            assert before == after


def test_default_orders_build_cleanly():
    code = build_open(6)
    circ = build_memory(code, None, rounds=3, z_order=DEFAULT_Z_ORDER, x_order=DEFAULT_X_ORDER)
    assert not determinism_flags(circ).any()
    assert len(circ.observables) == code.k


def test_bad_schedule_rejected():
    code = build_open(6)
    with pytest.raises(ValueError):
        build_memory(code, None, rounds=2, z_order=(0, 1, 2, 3, 4, 5))


def test_dem_forced_fault_matches_frame_sample():
    code = build_open(6)
    circ = build_memory(code, None, rounds=2, noise=BiasedChannel(0.01, 2.0))
    dem = build_dem(circ)
    symptoms = {(d, o) for _, d, o in dem.mechanisms}
    noise_ops = [i for i, op in enumerate(circ.ops) if op[0] == "NOISE"]
    for target in (noise_ops[0], noise_ops[len(noise_ops) // 2], noise_ops[-1]):
        q = circ.ops[target][1]
        for px, py, pz in ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)):
            # keep only this noise op, made deterministic; sample one shot
            ops = tuple(
                ("NOISE", q, px, py, pz) if i == target else op
                for i, op in enumerate(circ.ops)
                if op[0] != "NOISE" or i == target
            )
            forced = Circuit(circ.num_qubits, ops, circ.detectors, circ.observables)
            det, obs = frame_sample(forced, 1, seed=0)
            sym = (
                tuple(int(i) for i in np.nonzero(det[0])[0]),
                tuple(int(i) for i in np.nonzero(obs[0])[0]),
            )
            if sym == ((), ()):
                continue
            assert sym in symptoms


def test_dem_mechanism_count_and_probs():
    code = build_open(6)
    circ = build_memory(code, None, rounds=2, noise=BiasedChannel(0.01, 1.0))
    dem = build_dem(circ)
    n_noise = sum(1 for op in circ.ops if op[0] == "NOISE")
    assert 0 < len(dem.mechanisms) <= 3 * n_noise
    seen = set()
    for p, det, obs in dem.mechanisms:
        assert 0 < p <= 0.5
        assert (det, obs) not in seen  # symptoms are merged, hence unique
        seen.add((det, obs))


def test_dem_marginals_match_circuit_sampling():
    code = build_open(6)
    circ = build_memory(code, None, rounds=2, noise=BiasedChannel(0.005, 1.0))
    dem = build_dem(circ)
    shots = 20000
    det, _ = frame_sample(circ, shots, seed=7)
    circ_marg = det.mean(axis=0)
    # predicted marginal of each detector from independent mechanisms
    marg = np.zeros(dem.num_detectors)
    for p, ds, _ in dem.mechanisms:
        for d in ds:
            marg[d] = marg[d] * (1 - p) + (1 - marg[d]) * p
    sigma = np.sqrt(np.maximum(marg * (1 - marg), 1e-12) / shots)
    within = np.abs(circ_marg - marg) < 3 * sigma + 1e-9
    assert within.mean() > 0.95  # ~99.7% expected inside 3σ


def test_dem_problem_shapes():
    code = build_open(6)
    circ = build_memory(code, None, rounds=2, noise=BiasedChannel(0.01, 1.0))
    dem = build_dem(circ)
    problem, active, O = dem_problem(dem)
    M = len(dem.mechanisms)
    assert problem.H.shape == (len(active), M)
    assert O.shape == (M, dem.num_observables)
    assert problem.priors.shape == (M,)


def test_decode_zero_syndromes():
    code = build_open(6)
    circ = build_memory(code, None, rounds=2, noise=BiasedChannel(0.004, 1.0))
    dem = build_dem(circ)
    det = np.zeros((16, dem.num_detectors), dtype=np.uint8)
    obs = np.zeros((16, dem.num_observables), dtype=np.uint8)
    assert decode_circuit(dem, det, obs) == 0.0


def test_memory_failure_rate_bounds_and_pheno():
    code = build_open(6)
    rate = memory_failure_rate(code, None, BiasedChannel(0.003, 1.0), shots=200, seed=3, rounds=2)
    assert 0.0 <= rate <= 0.5
    rate = memory_failure_rate(
        code, None, BiasedChannel(0.02, 10.0), shots=100, seed=4, rounds=2, noise_mode="pheno"
    )
    assert 0.0 <= rate <= 1.0


def test_circuit_serialization_roundtrip():
    code = build_open(6)
    circ = build_memory(code, ti_linear(code), rounds=2, noise=BiasedChannel(0.01, 3.0))
    text = circuit_dumps(circ)
    back = circuit_loads(text)
    assert back.num_qubits == circ.num_qubits
    assert back.ops == circ.ops
    assert back.detectors == circ.detectors
    assert back.observables == circ.observables
    assert circuit_dumps(back) == text


def test_dem_serialization_roundtrip():
    code = build_open(6)
    circ = build_memory(code, None, rounds=2, noise=BiasedChannel(0.01, 3.0))
    dem = build_dem(circ)
    back = dem_loads(dem_dumps(dem))
    assert back.num_detectors == dem.num_detectors
    assert back.num_observables == dem.num_observables
    assert len(back.mechanisms) == len(dem.mechanisms)
    for (p1, d1, o1), (p2, d2, o2) in zip(dem.mechanisms, back.mechanisms):
        assert math.isclose(p1, p2, rel_tol=1e-9)
        assert (d1, o1) == (d2, o2)
