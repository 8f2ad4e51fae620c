"""Code-capacity Monte Carlo: logical error rates, thresholds, phase sweeps.

Trials are reproducible from (seed, block index) via counter-based Philox
streams, independent of how work is parallelized; results carry Wilson 95%
confidence intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import deform as deform_mod
from .bposd import (
    DecoderConfig,
    active_rows,
    decode_batch,
    decode_matrix,
    failure_batch,
    logical_basis,
    syndrome_batch,
)
from .channel import BiasedChannel, sample_error_batch
from .tilecode import TileCode

_BLOCK = 2048


def wilson_ci(failures: int, trials: int, z: float = 1.96):
    """Wilson 95% interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    phat = failures / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = (
        z
        * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class TrialResult:
    code_id: str
    p: float
    eta: float
    trials: int
    failures: int
    ci_lo: float
    ci_hi: float
    seed: int

    @property
    def rate(self) -> float:
        return self.failures / self.trials if self.trials else 0.0


def run_trials(
    code: TileCode,
    deformation: deform_mod.DeformationMap | None,
    channel: BiasedChannel,
    trials: int,
    seed: int,
    config: DecoderConfig | None = None,
    code_id: str = "",
) -> TrialResult:
    """Sample → syndrome → decode → classify, `trials` times."""
    dc = deform_mod.apply(code, deformation) if deformation is not None else code
    problem = decode_matrix(dc, channel)
    rows = active_rows(dc, channel)
    logicals = logical_basis(dc)
    n = dc.n
    failures = 0
    for b0 in range(0, trials, _BLOCK):
        bs = min(_BLOCK, trials - b0)
        rng = np.random.default_rng(np.random.Philox(key=[seed, b0]))
        ex, ez = sample_error_batch(n, channel, rng, bs)
        syn = syndrome_batch(dc, ex, ez)[:, rows]
        corr = decode_batch(problem, syn, config)
        if channel.infinite_bias:
            cx = np.zeros_like(corr)
            cz = corr
        else:
            cx, cz = corr[:, :n], corr[:, n:]
        failures += int(failure_batch(dc, logicals, ex, ez, cx, cz).sum())
    lo, hi = wilson_ci(failures, trials)
    return TrialResult(code_id, channel.p, channel.eta, trials, failures, lo, hi, seed)


def logical_rate_curve(
    code: TileCode,
    deformation,
    p_grid,
    eta: float,
    trials: int,
    seed: int,
    config: DecoderConfig | None = None,
    code_id: str = "",
):
    """[(p, TrialResult)] over a grid of physical error rates."""
    out = []
    for i, p in enumerate(p_grid):
        ch = BiasedChannel(p, eta)
        out.append(
            (p, run_trials(code, deformation, ch, trials, seed + 1000 * i, config, code_id))
        )
    return out


def _interp_crossing(ps, la, lb):
    """First sign-change crossing of la−lb (log rates) linear in p, or None."""
    d = np.asarray(la) - np.asarray(lb)
    for i in range(len(ps) - 1):
        if d[i] == 0:
            return ps[i]
        if d[i] * d[i + 1] < 0:
            f = d[i] / (d[i] - d[i + 1])
            return ps[i] + f * (ps[i + 1] - ps[i])
    return None


def threshold_estimate(results_by_size: dict, method: str = "crossing"):
    """Threshold estimate from p_L(p) curves per size.

    `results_by_size`: {size: [(p, p_L)] on a common grid}.

    method="crossing": log-linear interpolation per adjacent size pair;
    returns (median crossing, spread) or None when no pair crosses in range.
    method="fss": finite-size-scaling fit (see fss_threshold); spread is the
    max−min over leave-one-size-out refits.
    """
    if method == "fss":
        sizes = sorted(results_by_size)
        p_th, _ = fss_threshold(results_by_size)
        if len(sizes) >= 3:
            loo = [
                fss_threshold({s: results_by_size[s] for s in sizes if s != drop})[0]
                for drop in sizes
            ]
            spread = max(loo) - min(loo)
        else:
            spread = 0.0
        return p_th, spread
    sizes = sorted(results_by_size)
    if len(sizes) < 2:
        raise ValueError("need at least two sizes")
    crossings = []
    for a, b in zip(sizes, sizes[1:]):
        pa = [p for p, _ in results_by_size[a]]
        pb = [p for p, _ in results_by_size[b]]
        if pa != pb:
            raise ValueError("size curves must share a p grid")
        floor = 1e-12
        la = [math.log(max(r, floor)) for _, r in results_by_size[a]]
        lb = [math.log(max(r, floor)) for _, r in results_by_size[b]]
        c = _interp_crossing(pa, la, lb)
        if c is not None:
            crossings.append(c)
    if not crossings:
        return None
    crossings.sort()
    med = crossings[len(crossings) // 2]
    return med, max(crossings) - min(crossings)


def fss_threshold(results_by_size: dict, p_range=None, nu_range=(0.5, 2.5)):
    """Finite-size-scaling threshold fit.

    Fits p_L(p, L) = a0 + a1·x + a2·x² + c/L with x = (p − p_th)·L^{1/ν}
    by grid search over (p_th, ν) with linear least squares for the
    remaining coefficients; the c/L term absorbs the downward drift of
    finite-size crossings.  Returns (p_th, nu).
    """
    sizes = sorted(results_by_size)
    pts = [
        (p, L, r) for L in sizes for p, r in results_by_size[L]
    ]
    ps = np.array([p for p, _, _ in pts])
    Ls = np.array([L for _, L, _ in pts], dtype=float)
    ys = np.array([r for _, _, r in pts])
    if p_range is None:
        p_range = (ps.min(), ps.max())
    best = (np.inf, None, None)
    for p_th in np.linspace(*p_range, 81):
        for nu in np.linspace(*nu_range, 41):
            x = (ps - p_th) * Ls ** (1.0 / nu)
            A = np.stack([np.ones_like(x), x, x * x, 1.0 / Ls], axis=1)
            coef, res, *_ = np.linalg.lstsq(A, ys, rcond=None)
            sse = float(np.sum((A @ coef - ys) ** 2))
            if sse < best[0]:
                best = (sse, float(p_th), float(nu))
    return best[1], best[2]


def fifty_percent_monotone(rates_by_size: dict) -> bool:
    """True iff p_L strictly decreases with size (the 50%-region proxy)."""
    sizes = sorted(rates_by_size)
    vals = [rates_by_size[s] for s in sizes]
    return all(a > b for a, b in zip(vals, vals[1:]))


def phase_point(
    build_code,
    sizes,
    pi_xz: float,
    pi_yz: float,
    p_grid,
    trials: int,
    disorder_samples: int = 5,
    seed: int = 0,
    config: DecoderConfig | None = None,
):
    """Average infinite-bias p_L curves over disorder samples at one phase point.

    `build_code(size)` constructs the code.  Returns {size: [(p, mean p_L)]}.
    """
    out = {}
    for size in sizes:
        code = build_code(size)
        acc = np.zeros(len(p_grid))
        for s in range(disorder_samples):
            dmap = deform_mod.random_map(code.n, pi_xz, pi_yz, seed * 977 + s)
            curve = logical_rate_curve(
                code,
                dmap,
                p_grid,
                math.inf,
                trials,
                seed + 13 * s,
                config,
                code_id=f"phase({pi_xz},{pi_yz})",
            )
            acc += np.array([r.rate for _, r in curve])
        out[size] = list(zip(list(p_grid), (acc / disorder_samples).tolist()))
    return out


# ---------------------------------------------------------------------------
# CSV emission


def trials_csv_header() -> str:
    return "code,L,pi_xz,pi_yz,eta,p,trials,failures,ci_lo,ci_hi,seed"


def trials_csv_row(r: TrialResult, L, pi_xz=0.0, pi_yz=0.0) -> str:
    eta = "inf" if r.eta == math.inf else repr(r.eta)
    return (
        f"{r.code_id},{L},{pi_xz},{pi_yz},{eta},{r.p},{r.trials},"
        f"{r.failures},{r.ci_lo:.6g},{r.ci_hi:.6g},{r.seed}"
    )


def thresholds_csv_header() -> str:
    return "variant,eta,p_th,spread,method"


def thresholds_csv_row(variant, eta, p_th, spread, method="log-linear-crossing") -> str:
    eta = "inf" if eta == math.inf else repr(eta)
    return f"{variant},{eta},{p_th:.6g},{spread:.6g},{method}"
