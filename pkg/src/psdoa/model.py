"""Array geometry, frequency code-books, multipath scenarios and antenna signals.

Everything is simulated in the phasor domain: each pilot is a tone held for one
slot, so the common carrier is factored out and a slot is one complex sample
per antenna.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

MAX_PATHS = 4


@dataclass(frozen=True)
class PiaGeometry:
    """Two-antenna phase interferometry array.

    DoA is measured from the array baseline, in [0, 180] degrees.
    """

    antenna_gap_m: float

    def __post_init__(self):
        if not (math.isfinite(self.antenna_gap_m) and self.antenna_gap_m > 0):
            raise ValueError(f"antenna_gap_m must be > 0, got {self.antenna_gap_m}")


@dataclass(frozen=True)
class FrequencyCodebook:
    """Ordered pilot tones, one per slot (or all at once in ultrafast mode).

    ``center_hz`` and ``band_hz`` default to the midpoint and span of the
    pilots.
    """

    pilots_hz: tuple[float, ...]
    slot_duration_s: float = 1e-6
    rf_bandwidth_hz: float = 100e6
    center_hz: float | None = None
    band_hz: float | None = None

    def __post_init__(self):
        pilots = tuple(float(f) for f in np.atleast_1d(self.pilots_hz))
        object.__setattr__(self, "pilots_hz", pilots)
        if len(pilots) < 1:
            raise ValueError("code-book needs at least one pilot")
        if any(not math.isfinite(f) or f <= 0 for f in pilots):
            raise ValueError("pilot frequencies must be positive and finite")
        if any(b <= a for a, b in zip(pilots, pilots[1:])):
            raise ValueError("pilots must be strictly increasing")
        if self.slot_duration_s <= 0 or self.rf_bandwidth_hz <= 0:
            raise ValueError("slot_duration_s and rf_bandwidth_hz must be > 0")
        if self.center_hz is None:
            object.__setattr__(self, "center_hz", 0.5 * (pilots[0] + pilots[-1]))
        if self.band_hz is None:
            object.__setattr__(self, "band_hz", pilots[-1] - pilots[0])
        if self.band_hz < 0:
            raise ValueError("band_hz must be >= 0")
        lo = self.center_hz - self.band_hz / 2
        hi = self.center_hz + self.band_hz / 2
        slack = 1e-9 * max(abs(hi), 1.0)
        if pilots[0] < lo - slack or pilots[-1] > hi + slack:
            raise ValueError(
                f"pilots [{pilots[0]:g}, {pilots[-1]:g}] Hz fall outside band [{lo:g}, {hi:g}] Hz"
            )

    @classmethod
    def uniform(cls, center_hz, band_hz, pilot_count, slot_duration_s=1e-6,
                rf_bandwidth_hz=100e6):
        """Equally spaced pilots from band edge to band edge."""
        if pilot_count < 1:
            raise ValueError("pilot_count must be >= 1")
        if pilot_count == 1:
            pilots = (float(center_hz),)
        else:
            pilots = tuple(np.linspace(center_hz - band_hz / 2, center_hz + band_hz / 2,
                                       int(pilot_count)))
        return cls(pilots, slot_duration_s, rf_bandwidth_hz, float(center_hz), float(band_hz))

    @property
    def pilots(self) -> np.ndarray:
        return np.asarray(self.pilots_hz)

    @property
    def pilot_count(self) -> int:
        return len(self.pilots_hz)

    @property
    def first_pilot_hz(self) -> float:
        return self.pilots_hz[0]

    @property
    def pilot_spacing_hz(self) -> float:
        # mean spacing; exact for uniform code-books
        if self.pilot_count == 1:
            return 0.0
        return (self.pilots_hz[-1] - self.pilots_hz[0]) / (self.pilot_count - 1)

    @property
    def stage1_gain(self) -> float:
        return self.rf_bandwidth_hz * self.slot_duration_s

    def subbands(self, count: int, pilot_count: int | None = None) -> list[FrequencyCodebook]:
        """Split the band into ``count`` equal sub-bands, each with its own pilots.

        Pilots sit at the centres of equal cells so neighbouring sub-bands never
        share a frequency.
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        n = pilot_count or self.pilot_count
        width = self.band_hz / count
        lo = self.center_hz - self.band_hz / 2
        out = []
        for i in range(count):
            start = lo + i * width
            pilots = start + (np.arange(n) + 0.5) * width / n
            out.append(FrequencyCodebook(tuple(pilots), self.slot_duration_s,
                                         self.rf_bandwidth_hz, start + width / 2, width))
        return out


@dataclass(frozen=True)
class PropagationPath:
    doa_deg: float
    excess_delay_s: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        for name in ("doa_deg", "excess_delay_s", "amplitude"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 <= self.doa_deg <= 180.0:
            raise ValueError(f"doa_deg must be in [0, 180], got {self.doa_deg}")
        if self.excess_delay_s < 0:
            raise ValueError("excess_delay_s must be >= 0")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be > 0")


@dataclass(frozen=True)
class MultipathScenario:
    """LoS path first, then up to three NLoS paths."""

    paths: tuple[PropagationPath, ...]

    def __post_init__(self):
        paths = tuple(self.paths)
        object.__setattr__(self, "paths", paths)
        if not 1 <= len(paths) <= MAX_PATHS:
            raise ValueError(f"scenario needs 1..{MAX_PATHS} paths, got {len(paths)}")
        if paths[0].excess_delay_s != 0:
            raise ValueError("LoS path must have zero excess delay")
        if any(p.excess_delay_s <= 0 for p in paths[1:]):
            raise ValueError("NLoS paths must arrive strictly after the LoS path")

    @classmethod
    def single(cls, doa_deg, amplitude=1.0):
        return cls((PropagationPath(doa_deg, 0.0, amplitude),))

    @classmethod
    def with_sir(cls, los_doa_deg, nlos: Sequence[tuple[float, float, float]] = ()):
        """Build from a LoS DoA and ``(doa_deg, delay_s, sir_db)`` NLoS triples.

        NLoS amplitudes are ``10**(-sir_db/20)`` relative to a unit LoS path.
        """
        paths = [PropagationPath(los_doa_deg)]
        for doa, delay, sir_db in nlos:
            paths.append(PropagationPath(doa, delay, 10 ** (-sir_db / 20)))
        return cls(tuple(paths))

    @property
    def los(self) -> PropagationPath:
        return self.paths[0]

    @property
    def nlos_count(self) -> int:
        return len(self.paths) - 1

    @property
    def doas_deg(self) -> np.ndarray:
        return np.array([p.doa_deg for p in self.paths])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.amplitude for p in self.paths])

    @property
    def delays_s(self) -> np.ndarray:
        return np.array([p.excess_delay_s for p in self.paths])


@dataclass(frozen=True)
class NoiseModel:
    """Per-antenna input SNR (dB, at B_rf, relative to the LoS amplitude) and seed.

    ``input_snr_db = inf`` disables noise.
    """

    input_snr_db: float = math.inf
    rng_seed: int = 0

    @property
    def snr_lin(self) -> float:
        return 10 ** (self.input_snr_db / 10)

    @property
    def noiseless(self) -> bool:
        return self.input_snr_db == math.inf

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.rng_seed)

    def variance(self, los_amplitude=1.0, integration_gain=1.0) -> float:
        """Complex noise variance per antenna after stage-1 integration."""
        if self.noiseless:
            return 0.0
        return los_amplitude ** 2 / (self.snr_lin * integration_gain)


def tdoa_from_doa(doa_deg, geometry: PiaGeometry):
    """Far-field TDoA ``D cos(theta) / c``; positive for theta < 90 degrees."""
    return geometry.antenna_gap_m * np.cos(np.radians(doa_deg)) / SPEED_OF_LIGHT


def min_pilots(band_hz, geometry: PiaGeometry) -> int:
    """Smallest code-book that samples the PDoA at the f-domain Nyquist rate."""
    if band_hz <= 0:
        raise ValueError("band_hz must be > 0")
    ratio = 2 * band_hz * geometry.antenna_gap_m / SPEED_OF_LIGHT
    # guard against 1.5000000000000002 style round-off pushing ceil up
    return max(1, math.ceil(round(ratio, 12)))


def path_components(scenario: MultipathScenario, geometry: PiaGeometry, pilot_hz):
    """Noiseless per-path phasors at both antennas.

    Returns two arrays of shape ``(paths, *pilot_hz.shape)``.
    """
    f = np.asarray(pilot_hz, dtype=float)
    amp = scenario.amplitudes.reshape((-1,) + (1,) * f.ndim)
    t = scenario.delays_s.reshape(amp.shape)
    dt = tdoa_from_doa(scenario.doas_deg, geometry).reshape(amp.shape)
    ant1 = amp * np.exp(-2j * np.pi * f * t)
    ant2 = amp * np.exp(-2j * np.pi * f * (t + dt))
    return ant1, ant2


def complex_noise(rng: np.random.Generator, shape, variance=1.0):
    """Circular complex Gaussian samples with the given total variance."""
    scale = math.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def synthesize_antenna_signals(scenario: MultipathScenario, geometry: PiaGeometry, pilot_hz,
                               noise: NoiseModel, integration_gain=1.0, rng=None):
    """Complex amplitudes ``(s1, s2)`` at the two antennas for one slot per pilot.

    ``pilot_hz`` may be a scalar or an array; noise is drawn from ``rng`` when
    given, otherwise from a fresh generator seeded by ``noise.rng_seed``.
    """
    f = np.asarray(pilot_hz, dtype=float)
    if np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise ValueError("pilot_hz must be positive and finite")
    if integration_gain < 1:
        raise ValueError("integration_gain must be >= 1")
    ant1, ant2 = path_components(scenario, geometry, f)
    s1 = ant1.sum(axis=0)
    s2 = ant2.sum(axis=0)
    var = noise.variance(scenario.los.amplitude, integration_gain)
    if var > 0:
        rng = rng if rng is not None else noise.rng()
        n = complex_noise(rng, (2,) + f.shape, var)
        s1 = s1 + n[0]
        s2 = s2 + n[1]
    if f.ndim == 0:
        return complex(s1), complex(s2)
    return s1, s2


@dataclass(frozen=True)
class Setup:
    """Bundle of the pieces a scenario file describes."""

    geometry: PiaGeometry
    codebook: FrequencyCodebook
    scenario: MultipathScenario
    noise: NoiseModel
    extras: dict = field(default_factory=dict)
