"""Gamma-family reference distributions and closed-form moments.

The regularized incomplete gamma function is evaluated with the power series
below ``x = a + 1`` and Lentz's continued fraction above it, each returning
the tail it is accurate for, so that both the CDF and the CCDF keep full
relative precision deep into their tails.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ChannelDims
from .errors import NumericalError
from .powers import Measure
from .precoder import NormalizationKind

__all__ = [
    "Tail",
    "GammaParams",
    "Relation",
    "Moment",
    "MomentSpec",
    "regularized_gamma_p",
    "regularized_gamma_q",
    "gamma_pdf",
    "gamma_cdf",
    "gamma_ccdf",
    "gamma_quantile",
    "gamma_moments",
    "reference_params",
    "table1_moments",
    "dtr_rx_variance",
    "dtr_rx_variance_printed",
]

_EPS = np.finfo(np.float64).eps
_TINY = 1e-300
_MAX_ITER = 5000
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


class Tail(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"


@dataclass(frozen=True)
class GammaParams:
    """Gamma(shape, scale); with ``squared`` set, the law of ``X**2`` instead."""

    shape: float
    scale: float
    squared: bool = False

    def __post_init__(self):
        if not (self.shape > 0 and math.isfinite(self.shape)):
            raise ValueError(f"shape must be positive, got {self.shape}")
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError(f"scale must be positive, got {self.scale}")

    @classmethod
    def unit_mean(cls, shape: float, squared: bool = False) -> "GammaParams":
        return cls(shape, 1.0 / shape, squared)


# -- incomplete gamma ---------------------------------------------------------

def _stirling_correction(a: float) -> float:
    """``lgamma(a) - ((a - 1/2) log a - a + log(2 pi)/2)`` for ``a >= 10``."""
    r = 1.0 / a
    r2 = r * r
    return r * (1 / 12 - r2 * (1 / 360 - r2 * (1 / 1260 - r2 * (1 / 1680 - r2 / 1188))))


def _log_prefactor(a: float, z: np.ndarray) -> np.ndarray:
    """``log(z**a exp(-z) / Gamma(a))`` for ``z > 0``."""
    if a < 10.0:
        return a * np.log(z) - z - math.lgamma(a)
    z = np.asarray(z, dtype=np.float64)
    out = np.empty(z.shape)
    # the log1p form only pays off near the peak; far below it use the direct one
    near = z > 0.5 * a
    t = (z[near] - a) / a
    out[near] = (
        0.5 * math.log(a) - _HALF_LOG_2PI - _stirling_correction(a)
        + a * (np.log1p(t) - t)
    )
    far = z[~near]
    out[~near] = a * np.log(far) - far - math.lgamma(a)
    return out


def _series_p(a: float, z: np.ndarray) -> np.ndarray:
    """Lower regularized gamma by power series; intended for ``z < a + 1``."""
    total = np.full(z.shape, 1.0 / a)
    term = total.copy()
    active = np.arange(z.size)
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term[active] *= z[active] / ap
        total[active] += term[active]
        keep = np.abs(term[active]) >= np.abs(total[active]) * _EPS
        active = active[keep]
        if active.size == 0:
            break
    else:
        raise NumericalError(f"incomplete gamma series did not converge (a={a})")
    return total * np.exp(_log_prefactor(a, z))


def _continued_fraction_q(a: float, z: np.ndarray) -> np.ndarray:
    """Upper regularized gamma by modified Lentz; intended for ``z >= a + 1``."""
    b = z + 1.0 - a
    c = np.full(z.shape, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.arange(z.size)
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b[active] += 2.0
        da = an * d[active] + b[active]
        da[np.abs(da) < _TINY] = _TINY
        ca = b[active] + an / c[active]
        ca[np.abs(ca) < _TINY] = _TINY
        da = 1.0 / da
        delta = da * ca
        d[active] = da
        c[active] = ca
        h[active] *= delta
        active = active[np.abs(delta - 1.0) >= _EPS]
        if active.size == 0:
            break
    else:
        raise NumericalError(f"incomplete gamma continued fraction did not converge (a={a})")
    return h * np.exp(_log_prefactor(a, z))


def _regularized(a: float, x, upper: bool):
    z = np.asarray(x, dtype=np.float64)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).astype(np.float64, copy=True)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise ValueError("incomplete gamma needs x >= 0")
    out = np.empty_like(z)
    zero = z == 0.0
    inf = np.isinf(z)
    out[zero] = 1.0 if upper else 0.0
    out[inf] = 0.0 if upper else 1.0
    finite = ~(zero | inf)
    low = finite & (z < a + 1.0)
    high = finite & ~low
    if np.any(low):
        p = _series_p(a, z[low])
        out[low] = 1.0 - p if upper else p
    if np.any(high):
        q = _continued_fraction_q(a, z[high])
        out[high] = q if upper else 1.0 - q
    np.clip(out, 0.0, 1.0, out=out)
    return float(out[0]) if scalar else out


def regularized_gamma_p(a: float, x):
    """Lower regularized incomplete gamma ``P(a, x)``."""
    return _regularized(a, x, upper=False)


def regularized_gamma_q(a: float, x):
    """Upper regularized incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    return _regularized(a, x, upper=True)


# -- distribution functions -----------------------------------------------------

def _standardize(p: GammaParams, x):
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("gamma distribution functions need x >= 0")
    if p.squared:
        arr = np.sqrt(arr)
    return arr / p.scale


def gamma_pdf(p: GammaParams, x):
    """Density of the plain variate ``X ~ Gamma(shape, scale)``."""
    z = np.atleast_1d(np.asarray(x, dtype=np.float64) / p.scale)
    out = np.zeros_like(z)
    pos = z > 0
    out[pos] = np.exp(_log_prefactor(p.shape, z[pos])) / (z[pos] * p.scale)
    if p.shape == 1.0:
        out[z == 0] = 1.0 / p.scale
    elif p.shape < 1.0:
        out[z == 0] = np.inf
    return float(out[0]) if np.ndim(x) == 0 else out


def gamma_cdf(p: GammaParams, x):
    return regularized_gamma_p(p.shape, _standardize(p, x))


def gamma_ccdf(p: GammaParams, x):
    return regularized_gamma_q(p.shape, _standardize(p, x))


def _log_tail(a: float, z: float, upper: bool) -> float:
    v = _regularized(a, z, upper)
    return math.log(v) if v > 0 else -math.inf


def _standard_quantile(a: float, prob: float, upper: bool, max_iter: int = 300) -> float:
    """Quantile of Gamma(a, 1) by bracketing plus safeguarded Newton on the log tail."""
    target = math.log(prob)

    def g(z: float) -> float:
        # decreasing in z for the upper tail, increasing for the lower tail
        return _log_tail(a, z, upper) - target

    step = max(1.0, math.sqrt(a))
    if upper:
        lo, hi = 0.0, a
        while g(hi) > 0:
            lo, hi = hi, hi + step
            step *= 2.0
            if not math.isfinite(hi):
                raise NumericalError("failed to bracket upper gamma quantile")
    else:
        lo, hi = a, a
        while g(hi) <= 0:
            lo, hi = hi, hi + step
            step *= 2.0
            if not math.isfinite(hi):
                raise NumericalError("failed to bracket lower gamma quantile")
        if lo == hi:
            lo = hi / 2.0
            while g(lo) >= 0:
                hi, lo = lo, lo / 2.0
                if lo == 0.0:
                    raise NumericalError("failed to bracket lower gamma quantile")

    z = 0.5 * (lo + hi) if lo > 0 else min(hi, a)
    for _ in range(max_iter):
        gz = g(z)
        if gz == 0.0:
            return z
        # shrink the bracket around the root
        if (gz > 0) == upper:
            lo = z
        else:
            hi = z
        tail = _regularized(a, z, upper)
        density = math.exp(float(_log_prefactor(a, np.float64(z)))) / z
        slope = (-density if upper else density) / tail if tail > 0 else 0.0
        candidate = z - gz / slope if slope != 0.0 else math.nan
        if not (lo < candidate < hi):
            candidate = math.sqrt(lo * hi) if lo > 0 and hi / lo > 4 else 0.5 * (lo + hi)
        if abs(candidate - z) <= 1e-14 * z or (hi - lo) <= 1e-15 * hi:
            return candidate
        z = candidate
    raise NumericalError(
        f"gamma quantile did not converge (shape={a}, prob={prob}, tail={'upper' if upper else 'lower'})"
    )


def gamma_quantile(p: GammaParams, tail_prob: float, tail: Tail = Tail.UPPER) -> float:
    """Point ``x`` with ``ccdf(x) = tail_prob`` (upper) or ``cdf(x) = tail_prob`` (lower)."""
    if not 0.0 < tail_prob < 1.0:
        raise ValueError(f"tail probability must be in (0, 1), got {tail_prob}")
    tail = Tail(tail)
    x = _standard_quantile(p.shape, tail_prob, tail is Tail.UPPER) * p.scale
    return x * x if p.squared else x


def gamma_moments(p: GammaParams) -> tuple[float, float]:
    """Mean and variance of the (possibly squared) variate."""
    a, s = p.shape, p.scale
    if not p.squared:
        return a * s, a * s * s
    m2 = a * (a + 1) * s**2
    m4 = a * (a + 1) * (a + 2) * (a + 3) * s**4
    return m2, m4 - m2 * m2


# -- reference laws and moment table ------------------------------------------------

def reference_params(
    kind: NormalizationKind, measure: Measure, dims: ChannelDims
) -> Optional[GammaParams]:
    """Closed-form law of a measure under the maximum-diversity model, if known."""
    dof = dims.M * dims.N
    if measure is Measure.ANT and kind is NormalizationKind.DTR:
        return GammaParams.unit_mean(dims.N)
    if measure is Measure.BS and kind is NormalizationKind.DTR:
        return GammaParams.unit_mean(dof)
    if measure is Measure.RX and kind is NormalizationKind.TR:
        return GammaParams.unit_mean(dof)
    if measure is Measure.RX and kind is NormalizationKind.DTR:
        return GammaParams.unit_mean(dof, squared=True)
    return None


class Relation(enum.Enum):
    EQ = "=="
    LE = "<="
    GE = ">="


@dataclass(frozen=True)
class Moment:
    """A table entry: exact value or one-sided bound.

    ``deterministic`` marks entries that hold per realization, not just in
    expectation (zero-variance cells and their means).
    """

    value: float
    relation: Relation = Relation.EQ
    deterministic: bool = False


@dataclass(frozen=True)
class MomentSpec:
    mean: Moment
    variance: Moment


def dtr_rx_variance(antennas: int, taps: int) -> float:
    """Variance of ``Y**2`` for ``Y ~ Gamma(a, 1/a)``, ``a = M N``."""
    a = float(antennas * taps)
    return 4.0 / a + 10.0 / a**2 + 6.0 / a**3


def dtr_rx_variance_printed(antennas: int, taps: int) -> float:
    """The same quantity with the last term written as ``6 / (M N**3)``."""
    a = float(antennas * taps)
    return 4.0 / a + 10.0 / a**2 + 6.0 / (antennas * taps**3)


def table1_moments(kind: NormalizationKind, measure: Measure, antennas: int, taps: int) -> MomentSpec:
    if antennas < 1 or taps < 1:
        raise ValueError("antennas and taps must be >= 1")
    kind, measure = NormalizationKind(kind), Measure(measure)
    inv_n = 1.0 / taps
    inv_mn = 1.0 / (antennas * taps)
    TR, DTR, PI = NormalizationKind.TR, NormalizationKind.DTR, NormalizationKind.PI
    one = Moment(1.0)
    exact_one = Moment(1.0, deterministic=True)
    exact_zero = Moment(0.0, deterministic=True)
    table = {
        (DTR, Measure.ANT): MomentSpec(one, Moment(inv_n)),
        (TR, Measure.ANT): MomentSpec(one, Moment(inv_n, Relation.LE)),
        (PI, Measure.ANT): MomentSpec(Moment(1.0, Relation.GE), Moment(inv_n, Relation.GE)),
        (DTR, Measure.BS): MomentSpec(one, Moment(inv_mn)),
        (TR, Measure.BS): MomentSpec(exact_one, exact_zero),
        (PI, Measure.BS): MomentSpec(Moment(1.0, Relation.GE), Moment(inv_mn, Relation.GE)),
        (DTR, Measure.RX): MomentSpec(Moment(1.0 + inv_mn), Moment(dtr_rx_variance(antennas, taps))),
        (TR, Measure.RX): MomentSpec(one, Moment(inv_mn)),
        (PI, Measure.RX): MomentSpec(exact_one, exact_zero),
    }
    return table[kind, measure]
