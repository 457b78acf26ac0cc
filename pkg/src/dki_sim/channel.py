"""Normalized slow-fading Gaussian channel ``y = g c + z``, ``z ~ N(0, sigma2/n)``.

Noise for trial ``t`` of an experiment is drawn from its own counter-derived
generator, ``SeedSequence(seed, spawn_key=(stream, t))``, so trials can be
split across workers in any way without changing a single sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidModel, InvalidParameter

FADING_KINDS = ("constant", "uniform-interval", "truncated-rayleigh", "degenerate-zero")


@dataclass(frozen=True)
class FadingModel:
    kind: str = "constant"
    gamma: float = 1.0
    g_max: float | None = None
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in FADING_KINDS:
            raise InvalidModel(f"unknown fading kind {self.kind!r}; expected one of {FADING_KINDS}")
        if self.g_max is None:
            object.__setattr__(self, "g_max", self.gamma)
        if self.kind == "degenerate-zero":
            return
        if not self.gamma > 0:
            raise InvalidModel(f"fading infimum gamma must be positive, got {self.gamma!r}")
        if not self.g_max >= self.gamma:
            raise InvalidModel(f"g_max ({self.g_max!r}) must be >= gamma ({self.gamma!r})")
        if self.kind == "truncated-rayleigh" and not self.scale > 0:
            raise InvalidModel("Rayleigh scale must be positive")


@dataclass
class ChannelOutput:
    y: np.ndarray
    g_used: float
    noise_seed: int


def trial_rng(seed, stream, trial):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, trial)))


def _rayleigh_in(rng, model):
    # rejection against [gamma, g_max]; fall back to inverse CDF when the
    # acceptance region is too thin for plain rejection
    lo, hi, s = model.gamma, model.g_max, model.scale
    if lo == hi:
        return lo
    for _ in range(64):
        g = rng.rayleigh(s)
        if lo <= g <= hi:
            return float(g)
    # inverse of the survival function exp(-x^2 / 2s^2); stable deep in the tail
    log_s = lambda x: -x * x / (2 * s * s)
    a, b = log_s(hi), log_s(lo)
    u = rng.random()
    log_v = b + math.log1p(u * math.expm1(a - b)) if a > -math.inf else b + math.log(u or 1e-300)
    g = s * math.sqrt(-2.0 * log_v)
    return float(min(max(g, lo), hi))


def sample_fading(model, seed=0, size=None):
    """Draw fading value(s) from ``model``; support is ``[gamma, g_max]``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    count = 1 if size is None else int(size)
    if model.kind == "degenerate-zero":
        out = np.zeros(count)
    elif model.kind == "constant":
        out = np.full(count, float(model.gamma))
    elif model.kind == "uniform-interval":
        out = rng.uniform(model.gamma, model.g_max, count)
        out = np.clip(out, model.gamma, model.g_max)
    else:
        out = np.array([_rayleigh_in(rng, model) for _ in range(count)])
    return float(out[0]) if size is None else out


def noise(n, sigma2, rng):
    """One noise vector with i.i.d. ``N(0, sigma2/n)`` entries."""
    z = rng.standard_normal(n)
    if sigma2 == 0:
        return np.zeros(n)
    return z * math.sqrt(sigma2 / n)


def transmit(codeword, g, ch, seed=0, *, stream=0, trial=0):
    """Send ``codeword`` through fading ``g``; noise is fixed by (seed, stream, trial)."""
    c = np.asarray(codeword, dtype=np.float64)
    if c.ndim != 1:
        raise InvalidParameter("codeword must be a 1-d vector")
    if not np.all(np.isfinite(c)) or not math.isfinite(g):
        raise InvalidParameter("codeword and fading must be finite")
    z = noise(len(c), ch.sigma2, trial_rng(seed, stream, trial))
    return ChannelOutput(y=g * c + z, g_used=float(g), noise_seed=seed)
