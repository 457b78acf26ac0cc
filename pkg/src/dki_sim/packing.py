"""Saturated sphere-packing codebooks built by random sequential insertion.

Centres are drawn uniformly from the inner ball of radius ``sqrt(A) - r0``
and kept when they are at least ``2 r0`` from every accepted centre. The
construction stops after ``saturation_T`` consecutive rejections, which is a
finite stand-in for saturation; :func:`coverage_certificate` checks it.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .errors import DimensionTooLarge, InvalidParameter

DEFAULT_SATURATION_T = 5000
DEFAULT_MEMORY_CAP = 100_000
CHECK_SLACK = 1e-12

_CANDIDATE_BATCH = 256
_COVERAGE_BATCH = 4096


@dataclass
class Codebook:
    n: int
    codewords: np.ndarray
    r0: float
    R_inner: float
    seed: int
    saturation_rejections: int
    A: float = 1.0
    kappa: float = 0.0
    b: float = 0.5
    theta: float = field(default=None)

    def __post_init__(self):
        self.codewords = np.atleast_2d(np.asarray(self.codewords, dtype=np.float64))
        if self.theta is None:
            self.theta = self.r0 ** 2

    @property
    def M(self):
        return self.codewords.shape[0]

    def __len__(self):
        return self.M


@dataclass
class ValidationReport:
    M: int
    max_norm: float
    min_distance: float
    R_inner: float
    min_required: float
    power_ok: bool
    distance_ok: bool

    @property
    def passed(self):
        return self.power_ok and self.distance_ok and self.M >= 1


def uniform_ball(rng, count, n, radius):
    """``count`` points uniform in the centred ``n``-ball of the given radius."""
    g = rng.standard_normal((count, n))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    u = rng.random(count)
    r = radius * u ** (1.0 / n)
    return g * (r / norms)[:, None]


def projected_log2_size(n, R_inner, r0):
    """Rough log2 of the largest codebook the construction could produce."""
    if R_inner <= 0:
        return 0.0
    return n * math.log2((R_inner + r0) / r0) - bounds.DENSITY_UPPER_EXP * n + 1.0


def log2_volume_ratio_cap(n, R_inner, r0):
    """log2 of ``Vol(R_inner + r0) / Vol(r0)``: disjoint r0-balls must fit inside."""
    return bounds.sphere_log_volume(n, R_inner + r0) - bounds.sphere_log_volume(n, r0)


def build_codebook(code, ch, seed=0, saturation_T=DEFAULT_SATURATION_T, *,
                   theta=None, max_codewords=None, memory_cap=DEFAULT_MEMORY_CAP):
    """Greedy random sequential packing for the given code and channel.

    ``theta`` overrides the squared packing radius (must not exceed ``A``).
    ``max_codewords`` truncates the construction once that many centres are
    accepted; the result still satisfies the power and distance constraints
    but is not saturated.
    """
    if int(saturation_T) != saturation_T or saturation_T < 1:
        raise InvalidParameter(f"saturation_T must be a positive integer, got {saturation_T!r}")
    if max_codewords is not None and max_codewords < 1:
        raise InvalidParameter("max_codewords must be >= 1")
    th = bounds.theta(code, ch) if theta is None else float(theta)
    if not 0 < th <= ch.A:
        raise InvalidParameter(f"theta must lie in (0, A], got {th!r}")
    n = code.n
    r0 = math.sqrt(th)
    R_inner = max(0.0, math.sqrt(ch.A) - r0)
    limit = max_codewords if max_codewords is not None else memory_cap
    if max_codewords is None or max_codewords > memory_cap:
        proj = projected_log2_size(n, R_inner, r0)
        if proj > math.log2(memory_cap):
            raise DimensionTooLarge(
                f"projected codebook size 2^{proj:.1f} exceeds the memory cap {memory_cap}")
        limit = min(limit, memory_cap)

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    min_d2 = 4.0 * th
    centres = np.empty((min(limit, 1024), n))
    sq = np.empty(centres.shape[0])
    M = 0
    run = 0
    margin = 1e-9 * (4.0 * ch.A + 4.0 * th + 1.0)
    done = False
    while not done:
        cand = uniform_ball(rng, _CANDIDATE_BATCH, n, R_inner)
        csq = np.einsum("ij,ij->i", cand, cand)
        if M:
            fast = csq[:, None] + sq[None, :M] - 2.0 * cand @ centres[:M].T
            maybe = fast.min(axis=1) >= min_d2 - margin
        else:
            maybe = np.ones(len(cand), dtype=bool)
        for k in range(len(cand)):
            ok = bool(maybe[k])
            if ok and M:
                # exact check against everything accepted so far
                d2 = np.sum((centres[:M] - cand[k]) ** 2, axis=1)
                ok = bool(d2.min() >= min_d2)
            if ok:
                if M == centres.shape[0]:
                    grow = min(limit, 2 * M)
                    centres = np.resize(centres, (grow, n))
                    sq = np.resize(sq, grow)
                centres[M] = cand[k]
                sq[M] = csq[k]
                M += 1
                run = 0
                if M >= limit:
                    done = True
                    break
            else:
                run += 1
                if run >= saturation_T:
                    done = True
                    break

    return Codebook(n=n, codewords=centres[:M].copy(), r0=r0, R_inner=R_inner, seed=seed,
                    saturation_rejections=run, A=ch.A, kappa=code.kappa, b=code.b, theta=th)


def pairwise_min_distance(points):
    """Smallest pairwise Euclidean distance (``inf`` for fewer than two points)."""
    pts = np.asarray(points, dtype=np.float64)
    m = len(pts)
    best = math.inf
    for i in range(m - 1):
        d2 = np.sum((pts[i + 1:] - pts[i]) ** 2, axis=1)
        best = min(best, float(d2.min()))
    return math.sqrt(best)


def validate_codebook(cb, ch=None):
    norms = np.linalg.norm(cb.codewords, axis=1)
    max_norm = float(norms.max()) if cb.M else 0.0
    dmin = pairwise_min_distance(cb.codewords)
    return ValidationReport(
        M=cb.M,
        max_norm=max_norm,
        min_distance=dmin,
        R_inner=cb.R_inner,
        min_required=2.0 * cb.r0,
        power_ok=max_norm <= cb.R_inner + CHECK_SLACK,
        distance_ok=dmin >= 2.0 * cb.r0 - CHECK_SLACK,
    )


def _covered_in_batch(cb, seed, index, count):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    pts = uniform_ball(rng, count, cb.n, cb.R_inner)
    C = cb.codewords
    d2 = (np.einsum("ij,ij->i", pts, pts)[:, None]
          + np.einsum("ij,ij->i", C, C)[None, :] - 2.0 * pts @ C.T)
    return int(np.count_nonzero(d2.min(axis=1) <= 4.0 * cb.r0 ** 2))


def coverage_certificate(cb, samples=100_000, seed=0, threads=1):
    """Fraction of uniform inner-ball points within ``2 r0`` of some codeword.

    Each batch of points has its own sub-seed, so the answer does not depend
    on ``threads``.
    """
    if samples < 1:
        raise InvalidParameter("samples must be >= 1")
    sizes = [min(_COVERAGE_BATCH, samples - s) for s in range(0, samples, _COVERAGE_BATCH)]
    jobs = [(cb, seed, i, c) for i, c in enumerate(sizes)]
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            hits = sum(pool.map(lambda a: _covered_in_batch(*a), jobs))
    else:
        hits = sum(_covered_in_batch(*a) for a in jobs)
    return hits / samples


def density_log2(cb):
    """log2 of ``M Vol(r0) / Vol(R_inner + r0)``."""
    return math.log2(cb.M) - log2_volume_ratio_cap(cb.n, cb.R_inner, cb.r0)


# -- codebook file ----------------------------------------------------------

_HEADER_KEYS = ("n", "A", "kappa", "b", "theta", "seed", "M")


def _fmt(x):
    return format(float(x), ".17g")


def write_codebook(cb, path):
    lines = [
        f"n={cb.n}",
        f"A={_fmt(cb.A)}",
        f"kappa={_fmt(cb.kappa)}",
        f"b={_fmt(cb.b)}",
        f"theta={_fmt(cb.theta)}",
        f"seed={cb.seed}",
        f"M={cb.M}",
    ]
    lines.extend(" ".join(_fmt(v) for v in row) for row in cb.codewords)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_codebook(path):
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    header = {}
    for key, line in zip(_HEADER_KEYS, raw):
        k, sep, v = line.partition("=")
        if not sep or k.strip() != key:
            raise InvalidParameter(f"{path}: expected header '{key}=', got {line!r}")
        header[key] = v.strip()
    n, M = int(header["n"]), int(header["M"])
    body = raw[len(_HEADER_KEYS):]
    if len(body) != M:
        raise InvalidParameter(f"{path}: header says M={M} but {len(body)} codewords follow")
    cw = np.array([[float(t) for t in row.split()] for row in body], dtype=np.float64)
    if cw.shape != (M, n):
        raise InvalidParameter(f"{path}: codeword rows must have {n} entries")
    A, th = float(header["A"]), float(header["theta"])
    r0 = math.sqrt(th)
    return Codebook(n=n, codewords=cw, r0=r0, R_inner=max(0.0, math.sqrt(A) - r0),
                    seed=int(header["seed"]), saturation_rejections=0, A=A,
                    kappa=float(header["kappa"]), b=float(header["b"]), theta=th)
