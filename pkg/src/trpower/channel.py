"""Maximum-diversity channel model.

Every antenna sees an ``N`` tap impulse response with a rectangular power
delay profile: the taps are i.i.d. circularly symmetric complex normal with
variance ``1/N``, so the expected energy per antenna is one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelDims",
    "ChannelRealization",
    "generate_channel",
    "generate_taps",
    "channel_energy",
    "per_antenna_energy",
    "antenna_energies",
]

# above this many taps the total energy is accumulated with math.fsum
_COMPENSATED_SUM_THRESHOLD = 1000


@dataclass(frozen=True)
class ChannelDims:
    """Array size ``M`` (antennas) and impulse response length ``N`` (taps)."""

    antennas: int
    taps: int

    def __post_init__(self):
        for name in ("antennas", "taps"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise TypeError(f"{name} must be an integer, got {value!r}")
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")

    @property
    def M(self) -> int:
        return int(self.antennas)

    @property
    def N(self) -> int:
        return int(self.taps)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One draw of the ``M x N`` tap matrix for the single user in scope.

    Entry ``taps[m, n]`` is the tap of antenna ``m`` at delay ``n`` (0-based).
    The array is copied and marked read-only on construction.
    """

    dims: ChannelDims
    taps: np.ndarray

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.complex128, copy=True)
        if taps.shape != (self.dims.M, self.dims.N):
            raise ValueError(
                f"taps shape {taps.shape} does not match dims "
                f"({self.dims.M}, {self.dims.N})"
            )
        if not np.all(np.isfinite(taps)):
            raise ValueError("channel taps must be finite")
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    @classmethod
    def from_taps(cls, taps) -> "ChannelRealization":
        arr = np.atleast_2d(np.asarray(taps, dtype=np.complex128))
        return cls(ChannelDims(arr.shape[0], arr.shape[1]), arr)


def generate_taps(dims: ChannelDims, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` tap matrices at once, shape ``(count, M, N)``.

    Real and imaginary parts are independent ``N(0, 1/(2N))`` draws, consumed
    from ``rng`` in C order, so the first matrix of a batch equals what
    :func:`generate_channel` would return from the same stream state.
    """
    parts = rng.standard_normal((count, dims.M, dims.N, 2))
    parts *= math.sqrt(0.5 / dims.N)
    return parts.view(np.complex128)[..., 0]


def generate_channel(dims: ChannelDims, rng: np.random.Generator) -> ChannelRealization:
    return ChannelRealization(dims, generate_taps(dims, 1, rng)[0])


def antenna_energies(taps: np.ndarray) -> np.ndarray:
    """Per-antenna energy ``sum_n |h[m, n]|^2`` along the last axis."""
    return np.sum(taps.real**2 + taps.imag**2, axis=-1)


def per_antenna_energy(ch: ChannelRealization, m: int) -> float:
    if not 0 <= m < ch.dims.M:
        raise IndexError(f"antenna index {m} out of range for M={ch.dims.M}")
    return float(antenna_energies(ch.taps[m]))


def channel_energy(ch: ChannelRealization) -> float:
    """Total energy ``S`` of the realization over all antennas and taps."""
    power = ch.taps.real**2 + ch.taps.imag**2
    if power.size > _COMPENSATED_SUM_THRESHOLD:
        return math.fsum(power.ravel())
    return float(power.sum())
