"""Deterministic Monte Carlo ensembles of the relative power measures.

Realizations are grouped in fixed blocks of ``BLOCK_SIZE``; block ``b`` draws
from a Philox stream keyed by ``(seed, b)``.  Each block writes into its own
slice of preallocated output arrays, so results do not depend on how many
workers process the blocks or in which order.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .analytic import Tail
from .channel import ChannelDims, antenna_energies, generate_taps
from .errors import InsufficientSamplesError, SampleBudgetError
from .powers import Measure, closed_form_powers, to_decibel
from .precoder import NormalizationKind

__all__ = [
    "BLOCK_SIZE",
    "MAX_SAMPLES",
    "MIN_TAIL_COUNT",
    "SimConfig",
    "KindSamples",
    "PowerSamples",
    "EmpiricalDistribution",
    "SweepRow",
    "block_stream",
    "run_ensemble",
    "empirical_cdf",
    "empirical_ccdf",
    "empirical_tail_quantile",
    "tail_order_statistic",
    "ks_distance",
    "scaling_sweep",
]

log = logging.getLogger(__name__)

BLOCK_SIZE = 4096
MAX_SAMPLES = 10**8
MIN_TAIL_COUNT = 10
ALL_KINDS = (NormalizationKind.TR, NormalizationKind.DTR, NormalizationKind.PI)


@dataclass(frozen=True)
class SimConfig:
    dims: ChannelDims
    realizations: int = 1_000_000
    seed: int = 0
    kinds: tuple = ALL_KINDS
    pool_antennas: bool = True

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError(f"realizations must be >= 1, got {self.realizations}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        kinds = tuple(NormalizationKind(k) for k in self.kinds)
        if not kinds:
            raise ValueError("at least one normalization kind is required")
        # canonical order, duplicates dropped
        object.__setattr__(self, "kinds", tuple(k for k in ALL_KINDS if k in kinds))

    @property
    def ant_count(self) -> int:
        return self.realizations * (self.dims.M if self.pool_antennas else 1)


@dataclass(frozen=True, eq=False)
class KindSamples:
    """Linear-scale samples for one normalization."""

    ant: np.ndarray
    bs: np.ndarray
    rx: np.ndarray

    def __getitem__(self, measure) -> np.ndarray:
        return getattr(self, Measure(measure).value)


@dataclass(frozen=True, eq=False)
class PowerSamples:
    config: SimConfig
    by_kind: dict = field(default_factory=dict)

    def __getitem__(self, kind) -> KindSamples:
        return self.by_kind[NormalizationKind(kind)]


def block_stream(seed: int, block: int) -> np.random.Generator:
    """Independent counter-based substream for block ``block`` of ``seed``."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,)))
    )


def run_ensemble(cfg: SimConfig, workers: int = 1) -> PowerSamples:
    """Draw ``cfg.realizations`` channels and record every measure per kind.

    All kinds are evaluated on the same channel draws.
    """
    R, M = cfg.realizations, cfg.dims.M
    if cfg.ant_count > MAX_SAMPLES or R > MAX_SAMPLES:
        raise SampleBudgetError(
            f"{cfg.ant_count} antenna samples exceed the budget of {MAX_SAMPLES}"
        )
    try:
        out = {
            kind: KindSamples(
                ant=np.empty((R, M) if cfg.pool_antennas else R),
                bs=np.empty(R),
                rx=np.empty(R),
            )
            for kind in cfg.kinds
        }
    except MemoryError as exc:
        raise SampleBudgetError(f"cannot allocate samples for {cfg}") from exc

    def fill(block: int) -> None:
        start = block * BLOCK_SIZE
        stop = min(R, start + BLOCK_SIZE)
        taps = generate_taps(cfg.dims, stop - start, block_stream(cfg.seed, block))
        energies = antenna_energies(taps)
        for kind, dest in out.items():
            ant, bs, rx = closed_form_powers(energies, kind)
            dest.ant[start:stop] = ant if cfg.pool_antennas else ant[:, 0]
            dest.bs[start:stop] = bs
            dest.rx[start:stop] = rx

    n_blocks = math.ceil(R / BLOCK_SIZE)
    if workers <= 1:
        for b in range(n_blocks):
            fill(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # list() re-raises the first worker exception
            list(pool.map(fill, range(n_blocks)))

    if cfg.pool_antennas:
        out = {k: replace(v, ant=v.ant.reshape(-1)) for k, v in out.items()}
    return PowerSamples(cfg, out)


# -- empirical distributions --------------------------------------------------

@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    samples: np.ndarray

    def __post_init__(self):
        arr = np.sort(np.asarray(self.samples, dtype=np.float64).ravel())
        if arr.size == 0:
            raise ValueError("empirical distribution needs at least one sample")
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    @property
    def count(self) -> int:
        return self.samples.size


def empirical_cdf(d: EmpiricalDistribution, x):
    """Fraction of samples ``<= x`` (right-continuous)."""
    counts = np.searchsorted(d.samples, x, side="right")
    return counts / d.count


def empirical_ccdf(d: EmpiricalDistribution, x):
    """Fraction of samples ``> x``."""
    counts = np.searchsorted(d.samples, x, side="right")
    return (d.count - counts) / d.count


def _tail_rank(count: int, p: float) -> int:
    if not 0.0 < p <= 1.0:
        raise ValueError(f"tail probability must be in (0, 1], got {p}")
    if p * count < MIN_TAIL_COUNT:
        raise InsufficientSamplesError(
            f"p={p:g} with {count} samples leaves fewer than {MIN_TAIL_COUNT} in the tail"
        )
    # round first so 1e-4 * 1e6 does not become rank 101
    return max(1, math.ceil(round(p * count, 9)))


def empirical_tail_quantile(d: EmpiricalDistribution, p: float, tail: Tail = Tail.UPPER) -> float:
    """Order statistic of rank ``ceil(p * count)`` counted from the chosen end."""
    k = _tail_rank(d.count, p)
    if Tail(tail) is Tail.UPPER:
        return float(d.samples[d.count - k])
    return float(d.samples[k - 1])


def tail_order_statistic(values: np.ndarray, p: float, tail: Tail = Tail.UPPER) -> float:
    """Same value as :func:`empirical_tail_quantile` without a full sort.

    Partitions ``values`` in place.
    """
    values = values.ravel()
    k = _tail_rank(values.size, p)
    idx = values.size - k if Tail(tail) is Tail.UPPER else k - 1
    values.partition(idx)
    return float(values[idx])


def ks_distance(d: EmpiricalDistribution, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Supremum distance between the empirical CDF and a continuous ``cdf``."""
    n = d.count
    ref = np.asarray(cdf(d.samples), dtype=np.float64)
    above = np.arange(1, n + 1) / n - ref
    below = ref - np.arange(0, n) / n
    return float(max(above.max(), below.max()))


# -- scaling sweep ----------------------------------------------------------------

_SWEEP_TAILS = {Measure.ANT: Tail.UPPER, Measure.BS: Tail.UPPER, Measure.RX: Tail.LOWER}


@dataclass(frozen=True)
class SweepRow:
    m: int
    kind: NormalizationKind
    measure: Measure
    quantile_db: float


def sweep_realizations(base: SimConfig, antennas: int, p: float) -> int:
    """Realization count used for one sweep point.

    Raised so every tail keeps ``MIN_TAIL_COUNT`` samples; lowered when pooled
    antenna samples would exceed ``MAX_SAMPLES``.
    """
    R = max(base.realizations, math.ceil(MIN_TAIL_COUNT / p))
    if base.pool_antennas and R * antennas > MAX_SAMPLES:
        R = MAX_SAMPLES // antennas
    if R * p < MIN_TAIL_COUNT:
        raise InsufficientSamplesError(
            f"cannot resolve p={p:g} at M={antennas} within the sample budget"
        )
    return R


def scaling_sweep(
    base_cfg: SimConfig,
    m_values: Iterable[int],
    p: float = 1e-4,
    workers: int = 1,
) -> list[SweepRow]:
    """Tail levels of every measure and kind for each antenna count.

    Antenna and BS power use the upper tail (level exceeded with probability
    ``p``), received power the lower tail.  Kinds run one at a time on the
    same seed, so they still share channel draws while only one kind's
    samples are held in memory.
    """
    rows = []
    for M in m_values:
        dims = ChannelDims(int(M), base_cfg.dims.N)
        R = sweep_realizations(base_cfg, dims.M, p)
        if R != base_cfg.realizations:
            log.info("sweep M=%d uses %d realizations", dims.M, R)
        for kind in base_cfg.kinds:
            cfg = replace(base_cfg, dims=dims, realizations=R, kinds=(kind,))
            samples = run_ensemble(cfg, workers=workers)[kind]
            for measure, tail in _SWEEP_TAILS.items():
                q = tail_order_statistic(samples[measure], p, tail)
                rows.append(SweepRow(dims.M, kind, measure, to_decibel(q)))
            del samples
    return rows


def default_m_values(max_antennas: int = 128) -> list[int]:
    values, m = [], 1
    while m <= max_antennas:
        values.append(m)
        m *= 2
    return values
