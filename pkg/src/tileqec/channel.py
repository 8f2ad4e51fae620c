"""Biased Pauli channels, error sampling, decoder priors, and the hashing bound.

A channel with total error rate p and Z-bias η has p_X = p_Y = p/(2+η) and
p_Z = pη/(2+η); infinite bias (a distinct tag, not a large float) means
p_X = p_Y = 0, p_Z = p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algebra import PauliVec

INF = math.inf


@dataclass(frozen=True)
class BiasedChannel:
    p: float
    eta: float  # positive finite or math.inf

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError("p out of range")
        if not (self.eta == INF or self.eta > 0):
            raise ValueError("eta must be positive or infinite")

    @property
    def infinite_bias(self) -> bool:
        return self.eta == INF

    @property
    def p_x(self) -> float:
        return 0.0 if self.infinite_bias else self.p / (2 + self.eta)

    @property
    def p_y(self) -> float:
        return self.p_x

    @property
    def p_z(self) -> float:
        return self.p if self.infinite_bias else self.p * self.eta / (2 + self.eta)


def sample_error(n: int, channel: BiasedChannel, rng: np.random.Generator) -> PauliVec:
    """I.i.d. per-qubit Pauli error: X sets the x-bit, Z the z-bit, Y both."""
    u = rng.random(n)
    px, py, pz = channel.p_x, channel.p_y, channel.p_z
    is_x = u < px
    is_y = (u >= px) & (u < px + py)
    is_z = (u >= px + py) & (u < px + py + pz)
    x = (is_x | is_y).astype(np.uint8)
    z = (is_z | is_y).astype(np.uint8)
    return PauliVec(x, z)


def sample_error_batch(n: int, channel: BiasedChannel, rng, trials: int):
    """(trials, n) xbits and zbits arrays in one draw."""
    u = rng.random((trials, n))
    px, py, pz = channel.p_x, channel.p_y, channel.p_z
    is_x = u < px
    is_y = (u >= px) & (u < px + py)
    is_z = (u >= px + py) & (u < px + py + pz)
    return (is_x | is_y).astype(np.uint8), (is_z | is_y).astype(np.uint8)


def decoder_priors(channel: BiasedChannel):
    """Binary marginals: (Pr[x-bit = 1], Pr[z-bit = 1])."""
    return channel.p_x + channel.p_y, channel.p_z + channel.p_y


def _entropy4(probs) -> float:
    return -sum(q * math.log2(q) for q in probs if q > 0)


def hashing_bound(eta: float, tol: float = 1e-6) -> float:
    """The p at which the 4-outcome entropy H(1−p, p_X, p_Y, p_Z) equals 1 bit.

    η → ∞ returns 0.5 exactly (binary symmetric channel capacity point).
    """
    if eta == INF:
        return 0.5

    def f(p):
        ch = BiasedChannel(p, eta)
        return _entropy4((1 - p, ch.p_x, ch.p_y, ch.p_z)) - 1.0

    # f(0.5) = 0.5·H(split) > 0 for every finite η, so [ε, 0.5] always brackets
    lo, hi = 1e-12, 0.5
    flo, fhi = f(lo), f(hi)
    if not (flo < 0 < fhi):
        raise AssertionError("bisection bracket without sign change")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2
