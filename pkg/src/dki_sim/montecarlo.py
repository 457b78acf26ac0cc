"""Monte Carlo estimates of type I / type II identification errors.

For a transmitted codeword ``c_i`` and a target codeword ``c_j`` the decoder
residual is ``||g (c_i - c_j) + z||^2``, evaluated here as
``||z||^2 + 2 g <z, d_j> + g^2 ||d_j||^2`` with ``d_j = c_i - c_j``. When
``d_j = 0`` or ``g = 0`` this reduces to ``||z||^2`` bit for bit, which is
what makes the shared-stream identities exact.

Noise for trial ``t`` comes from ``channel.trial_rng(seed, stream, t)``. Two
estimates that use the same (seed, stream) see the same noise (common random
numbers); different streams are independent.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .channel import noise, trial_rng
from .decoder import TargetSet
from .errors import InvalidParameter
from .packing import build_codebook

STREAM_TYPE1 = 1
STREAM_TYPE2 = 2

DEFAULT_TRIALS = 10_000
_BATCH_FLOATS = 1 << 22


@dataclass
class ErrorEstimate:
    p_hat: float
    trials: int
    half_width: float
    g_worst: float
    seed: int
    g_grid: tuple = ()
    per_g: tuple = ()
    counts: tuple = field(default=(), repr=False)


def half_width(p, trials):
    """Three-sigma binomial half-width ``3 sqrt(p (1-p) / trials)``."""
    return 3.0 * math.sqrt(p * (1.0 - p) / trials)


def make_ggrid(gamma, g_max=None, points=5):
    """Ascending grid over ``[gamma, g_max]`` that starts at ``gamma``."""
    if not gamma > 0:
        raise InvalidParameter(f"gamma must be positive, got {gamma!r}")
    g_max = gamma if g_max is None else g_max
    if g_max < gamma:
        raise InvalidParameter("g_max must be >= gamma")
    if g_max == gamma or points <= 1:
        return (float(gamma),)
    grid = np.linspace(gamma, g_max, int(points))
    grid[0] = gamma
    return tuple(float(g) for g in grid)


def _check_grid(ggrid):
    grid = tuple(float(g) for g in ggrid)
    if not grid:
        raise InvalidParameter("fading grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise InvalidParameter("fading grid must be ascending")
    return grid


def default_threads():
    try:
        return max(1, int(os.environ.get("DKI_SIM_THREADS", "1")))
    except ValueError:
        return 1


def _tau_for(cb, ch, tau):
    if tau is not None:
        return float(tau)
    return ch.gamma ** 2 * cb.theta / 3.0


def _trial_chunks(trials, n):
    size = max(1, min(trials, _BATCH_FLOATS // max(n, 1)))
    return [(s, min(trials, s + size)) for s in range(0, trials, size)]


def _accept_chunk(diffs, ggrid, sigma2, thr, seed, stream, lo, hi):
    """Per-trial union decisions for trials ``lo..hi-1``: bool (trials, grid)."""
    n = diffs.shape[1]
    Z = np.empty((hi - lo, n))
    for r, t in enumerate(range(lo, hi)):
        Z[r] = noise(n, sigma2, trial_rng(seed, stream, t))
    zz = np.einsum("ij,ij->i", Z, Z)
    zd = Z @ diffs.T
    dd = np.einsum("ij,ij->i", diffs, diffs)
    out = np.empty((hi - lo, len(ggrid)), dtype=bool)
    for k, g in enumerate(ggrid):
        res = zz[:, None] + 2.0 * g * zd + (g * g) * dd[None, :]
        out[:, k] = (res <= thr).any(axis=1)
    return out


def accept_decisions(codewords, i, target, g_grid, sigma2, tau, trials, seed,
                     stream, threads=None):
    """Boolean matrix (trials x grid): did the decoder say "in target" for ``c_i``."""
    cw = getattr(codewords, "codewords", codewords)
    cw = np.atleast_2d(np.asarray(cw, dtype=np.float64))
    if not isinstance(target, TargetSet):
        target = TargetSet(tuple(target))
    target.check(len(cw))
    if not 0 <= i < len(cw):
        raise InvalidParameter(f"message index {i} out of range")
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    grid = _check_grid(g_grid)
    diffs = cw[i][None, :] - cw[list(target.indices)]
    thr = sigma2 + tau
    chunks = _trial_chunks(trials, cw.shape[1])
    threads = default_threads() if threads is None else threads
    run = lambda c: _accept_chunk(diffs, grid, sigma2, thr, seed, stream, *c)
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return np.concatenate(parts, axis=0)


def _summarize(errors, grid, trials, seed):
    counts = errors.sum(axis=0)
    per_g = counts / trials
    k = int(np.argmax(per_g))
    p = float(per_g[k])
    return ErrorEstimate(p_hat=p, trials=trials, half_width=half_width(p, trials),
                         g_worst=grid[k], seed=seed, g_grid=tuple(grid),
                         per_g=tuple(float(x) for x in per_g),
                         counts=tuple(int(c) for c in counts))


def estimate_type1(cb, i, target, ch, ggrid, trials=DEFAULT_TRIALS, seed=0, *,
                   tau=None, stream=STREAM_TYPE1, threads=None):
    """Worst-case-over-grid frequency of rejecting the true message ``i``."""
    if not isinstance(target, TargetSet):
        target = TargetSet(tuple(target))
    if i not in target:
        raise InvalidParameter(f"type I needs the sent message {i} inside the target set")
    grid = _check_grid(ggrid)
    acc = accept_decisions(cb, i, target, grid, ch.sigma2, _tau_for(cb, ch, tau),
                           trials, seed, stream, threads)
    return _summarize(~acc, grid, trials, seed)


def estimate_type2(cb, i, target, ch, ggrid, trials=DEFAULT_TRIALS, seed=0, *,
                   tau=None, stream=STREAM_TYPE2, threads=None):
    """Worst-case-over-grid frequency of accepting message ``i`` outside the target."""
    if not isinstance(target, TargetSet):
        target = TargetSet(tuple(target))
    if i in target:
        raise InvalidParameter(f"type II needs the sent message {i} outside the target set")
    grid = _check_grid(ggrid)
    acc = accept_decisions(cb, i, target, grid, ch.sigma2, _tau_for(cb, ch, tau),
                           trials, seed, stream, threads)
    return _summarize(acc, grid, trials, seed)


def choose_target(codewords, i, K, policy="nearest", include=False, seed=0):
    """Size-``K`` target set around message ``i``.

    ``nearest`` takes the codewords closest to ``c_i`` (ties by index),
    ``random`` a uniform subset. With ``include`` the set contains ``i``
    itself plus ``K-1`` others; otherwise ``i`` is excluded.
    """
    cw = np.atleast_2d(np.asarray(getattr(codewords, "codewords", codewords)))
    M = len(cw)
    others = np.array([j for j in range(M) if j != i], dtype=int)
    need = K - 1 if include else K
    if need < 0 or need > len(others):
        raise InvalidParameter(f"cannot pick a target of size {K} from {M} codewords")
    if policy == "nearest":
        d = np.sum((cw[others] - cw[i]) ** 2, axis=1)
        picked = others[np.lexsort((others, d))[:need]]
    elif policy == "random":
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(7,)))
        picked = rng.choice(others, size=need, replace=False) if need else others[:0]
    else:
        raise InvalidParameter(f"unknown target policy {policy!r}")
    idx = [int(j) for j in picked] + ([i] if include else [])
    return TargetSet(tuple(idx))


@dataclass
class DegenerateResult:
    p1: float
    p2: float
    trials: int
    shared: bool

    @property
    def total(self):
        return self.p1 + self.p2


def degenerate_fading_experiment(cb, i1, i2, target, ch, trials=DEFAULT_TRIALS, seed=0, *,
                                 shared=True, tau=None, threads=None):
    """Type I (for ``i1``) and type II (for ``i2``) frequencies with the fading forced to 0.

    With ``shared`` both estimates use one noise stream, so each trial's two
    indicators are complementary and ``p1 + p2 == 1`` exactly.
    """
    if not isinstance(target, TargetSet):
        target = TargetSet(tuple(target))
    if i1 not in target or i2 in target:
        raise InvalidParameter("need i1 inside and i2 outside the target set")
    t = _tau_for(cb, ch, tau)
    s2 = STREAM_TYPE1 if shared else STREAM_TYPE2
    acc1 = accept_decisions(cb, i1, target, (0.0,), ch.sigma2, t, trials, seed,
                            STREAM_TYPE1, threads)
    acc2 = accept_decisions(cb, i2, target, (0.0,), ch.sigma2, t, trials, seed, s2, threads)
    e1 = int(np.count_nonzero(~acc1[:, 0]))
    e2 = int(np.count_nonzero(acc2[:, 0]))
    return DegenerateResult(p1=e1 / trials, p2=e2 / trials, trials=trials, shared=shared)


@dataclass
class DistancePoint:
    d: float
    p1: float
    p2: float
    hw1: float
    hw2: float

    @property
    def total(self):
        return self.p1 + self.p2


def two_codeword_book(n, d):
    """Two codewords ``+-d/2`` along the first axis."""
    cw = np.zeros((2, n))
    cw[0, 0] = d / 2.0
    cw[1, 0] = -d / 2.0
    return cw


def converse_distance_experiment(n, ch, code, distances, trials=DEFAULT_TRIALS, seed=0, *,
                                 shared=True, threads=None):
    """Error sum ``P1(i1) + P2(i2, {i1})`` at ``g = gamma`` for two codewords ``d`` apart."""
    if code.n != n:
        code = bounds.CodeParams(n=n, kappa=code.kappa, b=code.b)
    th = bounds.theta(code, ch)
    t = bounds.tau(code, ch)
    R_inner = max(0.0, math.sqrt(ch.A) - math.sqrt(th))
    s2 = STREAM_TYPE1 if shared else STREAM_TYPE2
    out = []
    for d in distances:
        if d < 0:
            raise InvalidParameter("distances must be nonnegative")
        if d > 2.0 * R_inner:
            raise InvalidParameter(f"distance {d} exceeds twice the inner radius {R_inner}")
        cw = two_codeword_book(n, d)
        target = TargetSet((0,))
        acc1 = accept_decisions(cw, 0, target, (ch.gamma,), ch.sigma2, t, trials, seed,
                                STREAM_TYPE1, threads)
        acc2 = accept_decisions(cw, 1, target, (ch.gamma,), ch.sigma2, t, trials, seed,
                                s2, threads)
        p1 = float(np.count_nonzero(~acc1[:, 0])) / trials
        p2 = float(np.count_nonzero(acc2[:, 0])) / trials
        out.append(DistancePoint(d=float(d), p1=p1, p2=p2,
                                 hw1=half_width(p1, trials), hw2=half_width(p2, trials)))
    return out


@dataclass
class SweepRow:
    n: int
    kappa: float
    b: float
    M: int
    rate_ratio: float
    converse_ratio: float
    seed: int

    @property
    def within_bound(self):
        return self.rate_ratio <= self.converse_ratio


def scaling_sweep(n_list, kappa, b, ch, seed=0, saturation_T=5000):
    """Greedy codebook per ``n``; empirical ``log2 M / (n log2 n)`` vs the converse."""
    rows = []
    for n in n_list:
        code = bounds.CodeParams(n=n, kappa=kappa, b=b)
        cb = build_codebook(code, ch, seed=seed, saturation_T=saturation_T)
        scale = n * math.log2(n)
        rows.append(SweepRow(
            n=n, kappa=kappa, b=b, M=cb.M,
            rate_ratio=math.log2(cb.M) / scale,
            converse_ratio=bounds.converse_log_codebook(code, ch) / scale,
            seed=seed,
        ))
    return rows
