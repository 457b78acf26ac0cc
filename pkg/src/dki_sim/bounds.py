"""Closed-form quantities for DKI codes over the slow-fading Gaussian channel.

Every logarithm is base 2. Volumes and codebook sizes are carried as log2
values so that nothing overflows at large ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidParameter

# Upper packing-density exponent: density <= 2**(-DENSITY_UPPER_EXP * n).
DENSITY_UPPER_EXP = 0.599


@dataclass(frozen=True)
class CodeParams:
    """Codeword length ``n``, target-rate exponent ``kappa`` and slack ``b``.

    ``b + kappa == 1`` is accepted as the degenerate boundary where the
    packing radius equals the power radius and the codebook collapses to a
    single codeword.
    """

    n: int
    kappa: float = 0.0
    b: float = 0.5

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidParameter(f"n must be an integer >= 2, got {self.n!r}")
        if not 0.0 <= self.kappa < 1.0:
            raise InvalidParameter(f"kappa must lie in [0, 1), got {self.kappa!r}")
        if not 0.0 < self.b < 1.0:
            raise InvalidParameter(f"b must lie in (0, 1), got {self.b!r}")
        if self.b + self.kappa > 1.0:
            raise InvalidParameter(
                f"b + kappa must not exceed 1, got {self.b + self.kappa!r}")


@dataclass(frozen=True)
class ChannelParams:
    """Power budget ``A``, noise variance ``sigma2`` and fading support."""

    A: float = 1.0
    sigma2: float = 1.0
    gamma: float = 1.0
    g_max: float | None = None

    def __post_init__(self):
        if not self.A > 0:
            raise InvalidParameter(f"A must be positive, got {self.A!r}")
        if not self.sigma2 >= 0:
            raise InvalidParameter(f"sigma2 must be nonnegative, got {self.sigma2!r}")
        if not self.gamma > 0:
            raise InvalidParameter(f"gamma must be positive, got {self.gamma!r}")
        if self.g_max is None:
            object.__setattr__(self, "g_max", self.gamma)
        if not self.g_max >= self.gamma:
            raise InvalidParameter(
                f"g_max ({self.g_max!r}) must be >= gamma ({self.gamma!r})")


@dataclass(frozen=True)
class BoundReport:
    n: int
    kappa: float
    b: float
    theta_n: float
    tau_n: float
    K: int
    rate_lower: float
    rate_upper: float
    log2M_lower: float
    log2M_upper: float
    min_dist_converse: float
    type1_bound: float
    type2_bound: float


def target_set_size(n, kappa):
    """Number of target messages, ``ceil(n**kappa)``."""
    if int(n) != n or n < 2:
        raise InvalidParameter(f"n must be an integer >= 2, got {n!r}")
    if not 0.0 <= kappa < 1.0:
        raise InvalidParameter(f"kappa must lie in [0, 1), got {kappa!r}")
    k = n ** kappa
    # guard against 16**0.5 -> 4.000000000000001 style round-up
    rk = round(k)
    if abs(k - rk) <= 1e-9 * max(1.0, k):
        return max(1, int(rk))
    return max(1, math.ceil(k))


def _exponent(code):
    return (1.0 - (code.b + code.kappa)) / 2.0


def theta(code, ch):
    """Squared packing radius ``A / n**((1 - (b + kappa)) / 2)``."""
    return ch.A * code.n ** (-_exponent(code))


def tau(code, ch):
    """Decoding threshold slack ``gamma**2 * theta / 3``."""
    if not ch.gamma > 0:
        raise InvalidParameter("gamma must be positive; with zero fading nothing is identifiable")
    return ch.gamma ** 2 * theta(code, ch) / 3.0


def sphere_log_volume(n, r):
    """log2 of the volume of an ``n``-ball of radius ``r``.

    Uses ``pi**(n/2) r**n / Gamma(n/2 + 1)`` evaluated through ``lgamma``.
    """
    if int(n) != n or n < 1:
        raise InvalidParameter(f"n must be a positive integer, got {n!r}")
    if not r > 0:
        raise InvalidParameter(f"radius must be positive, got {r!r}")
    ln_vol = 0.5 * n * math.log(math.pi) + n * math.log(r) - math.lgamma(0.5 * n + 1.0)
    return ln_vol / math.log(2.0)


def packing_density_bounds(n):
    """(log2 lower, log2 upper) bounds on the density of a saturated packing."""
    return -float(n), -DENSITY_UPPER_EXP * n


def achievable_log_codebook(code, ch=None):
    """Lower bound on log2 M, ``((1-(b+kappa))/4) n log n - 2n``, clamped at 0.

    The raw bound is negative for small ``n``; the clamp reflects M >= 1.
    """
    n = code.n
    raw = (1.0 - (code.b + code.kappa)) / 4.0 * n * math.log2(n) - 2.0 * n
    return max(0.0, raw)


def converse_log_codebook(code, ch=None):
    """Upper bound on log2 M for any good code, exactly as the closed form reads."""
    n = code.n
    e = 2.0 * (1.0 + code.kappa + code.b)
    return ((1.0 + code.kappa + code.b) * n * math.log2(n)
            + 0.5 * n * math.log2(1.0 + n ** (-e))
            - DENSITY_UPPER_EXP * n)


def rate_bounds(kappa):
    """Lower and upper DKI capacity bounds ``((1-kappa)/4, 1+kappa)``."""
    if not 0.0 <= kappa < 1.0:
        raise InvalidParameter(f"kappa must lie in [0, 1), got {kappa!r}")
    return (1.0 - kappa) / 4.0, 1.0 + kappa


def converse_epsilon(code, ch):
    """``A / n**(2(1+kappa+b))``, the per-symbol converse distance scale."""
    return ch.A / code.n ** (2.0 * (1.0 + code.kappa + code.b))


def converse_min_distance(code, ch):
    """Minimum codeword distance ``2 sqrt(n eps')`` required of any good code."""
    return 2.0 * math.sqrt(code.n * converse_epsilon(code, ch))


def converse_alpha(code, ch):
    """Same distance written as ``2 sqrt(A) / n**((1 + 2(kappa+b))/2)``."""
    return 2.0 * math.sqrt(ch.A) / code.n ** ((1.0 + 2.0 * (code.kappa + code.b)) / 2.0)


def _chebyshev_scale(code, ch):
    # A^2 gamma^4 for the common denominators below
    return ch.A ** 2 * ch.gamma ** 4


def type1_error_bound(code, ch):
    """Chebyshev bound ``27 sigma^4 / (A^2 gamma^4 n^(kappa+b))``, capped at 1."""
    raw = 27.0 * ch.sigma2 ** 2 / (_chebyshev_scale(code, ch) * code.n ** (code.kappa + code.b))
    return min(1.0, raw)


def zeta0(code, ch):
    """Per-message bound on the cross-term event (uncapped)."""
    t = tau(code, ch)
    return (144.0 * ch.sigma2 * (ch.sigma2 + t)
            / (_chebyshev_scale(code, ch) * code.n ** (code.kappa + code.b)))


def zeta1(code, ch):
    """Per-message bound on the low-noise-energy event (uncapped)."""
    return 27.0 * ch.sigma2 ** 2 / (_chebyshev_scale(code, ch) * code.n ** (code.kappa + code.b))


def type2_error_bound(code, ch):
    """Composite type-II bound ``(144 s2 (s2+tau) + 27 s2^2) / (A^2 gamma^4 n^b)``.

    The target-set size is absorbed into the ``n^b`` denominator; capped at 1.
    """
    t = tau(code, ch)
    raw = ((144.0 * ch.sigma2 * (ch.sigma2 + t) + 27.0 * ch.sigma2 ** 2)
           / (_chebyshev_scale(code, ch) * code.n ** code.b))
    return min(1.0, raw)


def bound_report(code, ch):
    lo, hi = rate_bounds(code.kappa)
    return BoundReport(
        n=code.n,
        kappa=code.kappa,
        b=code.b,
        theta_n=theta(code, ch),
        tau_n=tau(code, ch),
        K=target_set_size(code.n, code.kappa),
        rate_lower=lo,
        rate_upper=hi,
        log2M_lower=achievable_log_codebook(code, ch),
        log2M_upper=converse_log_codebook(code, ch),
        min_dist_converse=converse_min_distance(code, ch),
        type1_bound=type1_error_bound(code, ch),
        type2_bound=type2_error_bound(code, ch),
    )
