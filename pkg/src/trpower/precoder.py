"""Time-reversal precoding for the intended user.

Weights are the conjugated uplink taps divided by a normalization
coefficient.  The weight array keeps forward index order: column ``j`` holds
the weight applied at delay ``-j``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelDims, ChannelRealization, channel_energy
from .errors import DegenerateChannelError

__all__ = [
    "NormalizationKind",
    "PrecoderWeights",
    "EffectiveChannelIR",
    "normalization_coefficient",
    "compute_weights",
    "effective_channel",
    "zero_delay_tap",
]


class NormalizationKind(enum.Enum):
    """Normalization of the time-reversal weights.

    TR scales by the instantaneous channel energy (centralized), DTR by its
    expectation (distributed), PI over-compensates weak channels so that the
    received zero-delay power is constant.
    """

    TR = "tr"
    DTR = "dtr"
    PI = "pi"

    @classmethod
    def parse(cls, text: str) -> "NormalizationKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown normalization {text!r}; expected one of tr, dtr, pi"
            ) from None


@dataclass(frozen=True, eq=False)
class PrecoderWeights:
    dims: ChannelDims
    weights: np.ndarray
    kind: NormalizationKind
    coefficient: float

    def at(self, m: int, delay: int) -> complex:
        """Weight of antenna ``m`` at delay ``delay`` in ``[-(N-1), 0]``."""
        if not -(self.dims.N - 1) <= delay <= 0:
            return 0j
        return complex(self.weights[m, -delay])


@dataclass(frozen=True, eq=False)
class EffectiveChannelIR:
    """Effective channel on delays ``-(N-1) .. N-1``; ``values[N-1]`` is delay 0."""

    values: np.ndarray

    @property
    def max_delay(self) -> int:
        return (len(self.values) - 1) // 2

    @property
    def delays(self) -> np.ndarray:
        return np.arange(-self.max_delay, self.max_delay + 1)

    def at(self, n: int) -> complex:
        if abs(n) > self.max_delay:
            return 0j
        return complex(self.values[n + self.max_delay])


def _coefficient(energy: float, antennas: int, kind: NormalizationKind) -> float:
    if kind is NormalizationKind.DTR:
        return math.sqrt(antennas)
    if energy <= 0.0:
        raise DegenerateChannelError(
            f"{kind.name} normalization is undefined for a zero-energy channel"
        )
    if kind is NormalizationKind.TR:
        return math.sqrt(energy)
    return energy / math.sqrt(antennas)


def normalization_coefficient(ch: ChannelRealization, kind: NormalizationKind) -> float:
    return _coefficient(channel_energy(ch), ch.dims.M, kind)


def compute_weights(ch: ChannelRealization, kind: NormalizationKind) -> PrecoderWeights:
    c = normalization_coefficient(ch, kind)
    weights = np.conj(ch.taps) / c
    weights.flags.writeable = False
    return PrecoderWeights(ch.dims, weights, kind, c)


def effective_channel(ch: ChannelRealization, w: PrecoderWeights) -> EffectiveChannelIR:
    """Sum over antennas of channel convolved with weights, by direct summation.

    With ``w[m, j]`` applied at delay ``-j`` the output at delay ``n`` is
    ``sum_m sum_j h[m, n + j] * w[m, j]`` over all ``j`` keeping ``n + j``
    inside ``[0, N-1]``.
    """
    if ch.dims != w.dims:
        raise ValueError(f"dimension mismatch: channel {ch.dims}, weights {w.dims}")
    N = ch.dims.N
    h, wt = ch.taps, w.weights
    values = np.zeros(2 * N - 1, dtype=np.complex128)
    for n in range(-(N - 1), N):
        j_lo, j_hi = max(0, -n), min(N, N - n)
        acc = 0j
        for j in range(j_lo, j_hi):
            acc += np.sum(h[:, n + j] * wt[:, j])
        values[n + N - 1] = acc
    values.flags.writeable = False
    return EffectiveChannelIR(values)


def zero_delay_tap(ch: ChannelRealization, kind: NormalizationKind) -> float:
    """Closed form ``S / c`` of the effective channel at delay zero."""
    energy = channel_energy(ch)
    return energy / _coefficient(energy, ch.dims.M, kind)
