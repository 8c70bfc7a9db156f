"""Relative antenna, base-station and received power measures."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .errors import DegenerateChannelError
from .precoder import (
    NormalizationKind,
    PrecoderWeights,
    compute_weights,
    zero_delay_tap,
)

__all__ = [
    "Measure",
    "RelativePowers",
    "relative_antenna_power",
    "relative_bs_power",
    "relative_rx_power",
    "relative_powers",
    "closed_form_powers",
    "to_decibel",
]


class Measure(enum.Enum):
    ANT = "ant"
    BS = "bs"
    RX = "rx"


@dataclass(frozen=True, eq=False)
class RelativePowers:
    """Linear-scale powers of one realization under one normalization."""

    p_ant: np.ndarray
    p_bs: float
    p_rx: float


def _weight_energy(w: PrecoderWeights) -> np.ndarray:
    return np.sum(w.weights.real**2 + w.weights.imag**2, axis=1)


def relative_antenna_power(w: PrecoderWeights, m: int) -> float:
    if not 0 <= m < w.dims.M:
        raise IndexError(f"antenna index {m} out of range for M={w.dims.M}")
    return w.dims.M * float(_weight_energy(w)[m])


def relative_bs_power(w: PrecoderWeights) -> float:
    return float(np.sum(_weight_energy(w)))


def relative_rx_power(ch: ChannelRealization, kind: NormalizationKind) -> float:
    return zero_delay_tap(ch, kind) ** 2 / ch.dims.M


def relative_powers(ch: ChannelRealization, kind: NormalizationKind) -> RelativePowers:
    w = compute_weights(ch, kind)
    p_ant = w.dims.M * _weight_energy(w)
    return RelativePowers(p_ant, relative_bs_power(w), relative_rx_power(ch, kind))


def closed_form_powers(energies: np.ndarray, kind: NormalizationKind):
    """Vectorized powers from per-antenna energies of shape ``(..., M)``.

    Returns ``(p_ant, p_bs, p_rx)``.  The algebra is simplified per kind so
    that TR gives ``p_bs == 1`` and PI gives ``p_rx == 1`` exactly, and DTR
    gives ``p_rx == p_bs**2`` bit for bit.
    """
    energies = np.asarray(energies, dtype=np.float64)
    M = energies.shape[-1]
    total = energies.sum(axis=-1)
    if kind is not NormalizationKind.DTR and np.any(total <= 0.0):
        raise DegenerateChannelError("zero-energy channel in ensemble")
    if kind is NormalizationKind.TR:
        mean_energy = total / M
        p_ant = energies / mean_energy[..., None]
        p_bs = total / total
        p_rx = mean_energy
    elif kind is NormalizationKind.DTR:
        p_ant = energies.copy()
        p_bs = total / M
        p_rx = p_bs * p_bs
    else:
        mean_energy = total / M
        p_ant = energies / (mean_energy * mean_energy)[..., None]
        p_bs = 1.0 / mean_energy
        p_rx = np.ones_like(total)
    return p_ant, p_bs, p_rx


def to_decibel(p):
    """``10 log10(p)``; accepts scalars or arrays, all entries must be positive."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any(~(arr > 0.0)):
        raise ValueError("decibel conversion needs strictly positive power")
    out = 10.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out
