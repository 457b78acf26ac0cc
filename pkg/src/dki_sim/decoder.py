"""Distance decoder: individual territories and their union over a target set."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, InvalidParameter


@dataclass(frozen=True)
class TargetSet:
    """Sorted, distinct, 0-based message indices."""

    indices: tuple

    def __post_init__(self):
        idx = tuple(sorted(int(i) for i in self.indices))
        if not idx:
            raise InvalidParameter("target set must not be empty")
        if len(set(idx)) != len(idx):
            raise InvalidParameter("target indices must be distinct")
        object.__setattr__(self, "indices", idx)

    @property
    def K(self):
        return len(self.indices)

    def __contains__(self, i):
        return int(i) in self.indices

    def __iter__(self):
        return iter(self.indices)

    def check(self, M):
        if self.K > M or self.indices[0] < 0 or self.indices[-1] >= M:
            raise IndexOutOfRange(f"target set {self.indices} does not fit a codebook of size {M}")


def residual(y, c, g):
    """``sum_t (y_t - g c_t)**2``, accumulated with ``math.fsum``."""
    y = np.asarray(y, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if y.shape != c.shape:
        raise InvalidParameter(f"length mismatch: {y.shape} vs {c.shape}")
    return math.fsum(((y - g * c) ** 2).tolist())


def in_territory(y, c, g, sigma2, tau):
    """Closed decoding ball: residual ``<= sigma2 + tau``."""
    if tau < 0:
        raise InvalidParameter("tau must be nonnegative")
    return residual(y, c, g) <= sigma2 + tau


def k_identify(y, codewords, target, g, sigma2, tau):
    """True iff ``y`` falls in the territory of at least one target codeword."""
    cw = getattr(codewords, "codewords", codewords)
    if not isinstance(target, TargetSet):
        target = TargetSet(tuple(target))
    target.check(len(cw))
    return any(in_territory(y, cw[j], g, sigma2, tau) for j in target)


def rejects_all(y, codewords, target, g, sigma2, tau):
    """True iff ``y`` lies outside every target territory (intersection of complements)."""
    cw = getattr(codewords, "codewords", codewords)
    if not isinstance(target, TargetSet):
        target = TargetSet(tuple(target))
    target.check(len(cw))
    return all(not in_territory(y, cw[j], g, sigma2, tau) for j in target)
