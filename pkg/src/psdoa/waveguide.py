"""Standing-wave waveguide with square-law energy detectors along its length."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .model import SPEED_OF_LIGHT


@dataclass(frozen=True)
class WaveguideConfig:
    """Waveguide of length ``length_m`` sampled by ``detector_count`` EDs.

    Positions default to ``detector_count`` uniformly spaced points covering
    ``[0, length_m]`` end to end.
    """

    length_m: float = 2.5e-3
    phase_velocity_mps: float = SPEED_OF_LIGHT
    detector_count: int = 30
    detector_positions_m: tuple[float, ...] | None = None

    def __post_init__(self):
        if not self.length_m > 0:
            raise ValueError("length_m must be > 0")
        if not self.phase_velocity_mps > 0:
            raise ValueError("phase_velocity_mps must be > 0")
        if self.detector_positions_m is None:
            if self.detector_count < 1:
                raise ValueError("detector_count must be >= 1")
            pos = np.linspace(0.0, self.length_m, int(self.detector_count))
        else:
            pos = np.asarray(self.detector_positions_m, dtype=float)
            if pos.size != self.detector_count:
                object.__setattr__(self, "detector_count", int(pos.size))
        if pos.size < 1:
            raise ValueError("need at least one detector")
        if np.any(np.diff(pos) <= 0):
            raise ValueError("detector positions must be strictly increasing")
        if pos[0] < 0 or pos[-1] > self.length_m * (1 + 1e-12):
            raise ValueError("detector positions must lie within [0, length_m]")
        object.__setattr__(self, "detector_positions_m", tuple(float(x) for x in pos))

    @property
    def positions(self) -> np.ndarray:
        return np.asarray(self.detector_positions_m)


@dataclass(frozen=True)
class StandingWaveFrame:
    pilot_hz: float
    ed_readings: np.ndarray

    def __post_init__(self):
        readings = np.asarray(self.ed_readings, dtype=float)
        if np.any(readings < 0):
            raise ValueError("energy readings must be non-negative")
        object.__setattr__(self, "ed_readings", readings)


def beta(pilot_hz, config: WaveguideConfig):
    """Phase constant 2*pi*f/c_T in rad/m."""
    return 2 * np.pi * np.asarray(pilot_hz, dtype=float) / config.phase_velocity_mps


def standing_wave_energy(s1, s2, pilot_hz, config: WaveguideConfig) -> np.ndarray:
    """``|s1 e^{j beta x} + s2 e^{-j beta x}|^2`` at every detector.

    Inputs broadcast together; output has a trailing detector axis.
    """
    s1, s2, f = np.broadcast_arrays(np.asarray(s1), np.asarray(s2), np.asarray(pilot_hz, float))
    phase = beta(f, config)[..., None] * config.positions
    fwd = np.exp(1j * phase)
    field = s1[..., None] * fwd + s2[..., None] * fwd.conj()
    return field.real ** 2 + field.imag ** 2


def standing_wave_energy_incoherent(path1, path2, n1, n2, pilot_hz, config: WaveguideConfig):
    """ED readings when distinct propagation paths do not interfere.

    ``path1``/``path2`` carry a leading path axis. Each path's standing wave and
    the noise field add in power, except that noise still beats coherently with
    the total signal field. This is what remains of the full superposition once
    the delay-separated path cross terms are low-pass filtered away.
    """
    path1 = np.asarray(path1)
    path2 = np.asarray(path2)
    f = np.asarray(pilot_hz, float)
    phase = beta(f, config)[..., None] * config.positions
    fwd = np.exp(1j * phase)
    per_path = path1[..., None] * fwd + path2[..., None] * fwd.conj()
    noise_field = np.asarray(n1)[..., None] * fwd + np.asarray(n2)[..., None] * fwd.conj()
    signal_field = per_path.sum(axis=0)
    energy = (np.abs(per_path) ** 2).sum(axis=0)
    energy = energy + 2 * (signal_field * noise_field.conj()).real + np.abs(noise_field) ** 2
    return np.maximum(energy, 0.0)


def sample_standing_wave(s1: complex, s2: complex, pilot_hz: float,
                         config: WaveguideConfig) -> StandingWaveFrame:
    """ED readings for one pilot; noise enters only through ``s1`` and ``s2``."""
    if not (np.isfinite(s1) and np.isfinite(s2) and math.isfinite(pilot_hz)):
        raise ValueError("inputs must be finite")
    return StandingWaveFrame(float(pilot_hz), standing_wave_energy(s1, s2, pilot_hz, config))


def energy_expansion(amplitudes, delays_s, tdoas_s, x_m, pilot_hz, phase_velocity_mps=SPEED_OF_LIGHT):
    """Closed-form four-group expansion of the standing-wave energy.

    Own-path cos^2 terms for LoS and NLoS, LoS/NLoS beat terms and NLoS/NLoS
    beat terms, written out term by term. Path 0 is LoS; ``delays_s[0]``
    is ignored (taken as zero).
    """
    a = np.asarray(amplitudes, float)
    t = np.asarray(delays_s, float).copy()
    t[0] = 0.0
    dt = np.asarray(tdoas_s, float)
    x = np.asarray(x_m, float)
    f = np.asarray(pilot_hz, float)
    bx = 2 * np.pi * f / phase_velocity_mps * x

    def c(k):
        return np.cos(bx + np.pi * f * dt[k])

    n = len(a)
    energy = 4 * a[0] ** 2 * c(0) ** 2
    for k in range(1, n):
        energy = energy + 4 * a[k] ** 2 * c(k) ** 2
    for k in range(1, n):
        energy = energy + (8 * a[0] * a[k] * c(0) * c(k)
                           * np.cos(2 * np.pi * f * (t[k] + (dt[k] - dt[0]) / 2)))
    for k in range(1, n):
        for l in range(k + 1, n):
            energy = energy + (8 * a[l] * a[k] * c(l) * c(k)
                               * np.cos(2 * np.pi * f * (t[k] - t[l] + (dt[k] - dt[l]) / 2)))
    return energy


def write_frames_csv(frames: Iterable[StandingWaveFrame], config: WaveguideConfig, fh):
    writer = csv.writer(fh)
    writer.writerow(["pilot_hz", "x_m", "energy"])
    for frame in frames:
        for x, e in zip(config.positions, frame.ed_readings):
            writer.writerow([repr(frame.pilot_hz), repr(float(x)), repr(float(e))])
