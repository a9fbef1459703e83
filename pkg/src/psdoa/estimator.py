"""PDoA extraction from standing-wave frames and matched-filter DoA detection."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .model import SPEED_OF_LIGHT, PiaGeometry
from .waveguide import StandingWaveFrame, WaveguideConfig, beta

DEFAULT_GRID_STEP_DEG = 0.1
DEFAULT_THRESHOLD_DB = -10.0
HALF_POWER = 10 ** (-3 / 20)


@dataclass(frozen=True)
class PdoaSet:
    """Per-pilot composite phasors ``sum_k a_k^2 exp(j 2 pi f dt_k)`` plus noise."""

    pilots_hz: np.ndarray
    phasors: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.pilots_hz, float).ravel()
        z = np.asarray(self.phasors, complex).ravel()
        if f.size == 0 or f.size != z.size:
            raise ValueError("need one phasor per pilot")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(z))):
            raise ValueError("pilots and phasors must be finite")
        object.__setattr__(self, "pilots_hz", f)
        object.__setattr__(self, "phasors", z)

    @property
    def entries(self):
        return list(zip(self.pilots_hz.tolist(), self.phasors.tolist()))

    @property
    def band_hz(self) -> float:
        return float(self.pilots_hz.max() - self.pilots_hz.min())


@dataclass(frozen=True)
class AngularSpectrum:
    grid_deg: np.ndarray
    magnitude: np.ndarray
    peaks: tuple[tuple[float, float], ...] = ()
    resolution_deg: float = math.nan  # c/(B D) at broadside, for default peak spacing

    def __post_init__(self):
        g = np.asarray(self.grid_deg, float)
        m = np.asarray(self.magnitude, float)
        if g.shape != m.shape or g.ndim != 1:
            raise ValueError("grid and magnitude must be 1-D and the same length")
        if np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid_deg", g)
        object.__setattr__(self, "magnitude", m)

    @property
    def argmax_deg(self) -> float:
        return float(self.grid_deg[np.argmax(self.magnitude)])


def angle_grid(step_deg=DEFAULT_GRID_STEP_DEG) -> np.ndarray:
    """Grid over [0, 180] degrees; includes 180 when ``step_deg`` divides it."""
    if not 0 < step_deg <= 180:
        raise ValueError("grid step must be in (0, 180]")
    n = round(180 / step_deg)
    if abs(n * step_deg - 180) < 1e-9:
        return np.linspace(0.0, 180.0, n + 1)
    return np.arange(0.0, 180.0, step_deg)


def scan_grid(count: int) -> np.ndarray:
    """``count`` directions at the centres of equal cells over [0, 180]."""
    return (np.arange(count) + 0.5) * 180.0 / count


def _projection(pilot_hz, config: WaveguideConfig, method: str):
    """Row vectors mapping ED readings to the complex PDoA phasor."""
    x = config.positions
    f = np.asarray(pilot_hz, float)
    phase = 2 * beta(f, config)[..., None] * x
    n = x.size
    if method == "correlate":
        w = np.exp(-1j * phase) / n
        # folding the mean subtraction into the weights keeps this linear
        return w - w.mean(axis=-1, keepdims=True)
    if method == "lstsq":
        # E(x) = c0 + 2 Re(z) cos(2 beta x) - 2 Im(z) sin(2 beta x), solved exactly
        design = np.stack(np.broadcast_arrays(np.ones_like(phase), 2 * np.cos(phase),
                                              -2 * np.sin(phase)), axis=-1)
        pinv = np.linalg.pinv(design)
        return pinv[..., 1, :] + 1j * pinv[..., 2, :]
    raise ValueError(f"unknown extraction method {method!r}")


def extract_pdoa_batch(readings, pilot_hz, config: WaveguideConfig, method="correlate"):
    """Vectorised :func:`extract_pdoa`; ``readings`` has a trailing detector axis."""
    readings = np.asarray(readings, float)
    if readings.shape[-1] < 4:
        raise ValueError("need at least 4 detectors to extract a PDoA")
    w = _projection(pilot_hz, config, method)
    return np.einsum("...n,...n->...", readings, w)


def extract_pdoa(frame: StandingWaveFrame, config: WaveguideConfig, method="correlate") -> complex:
    """Complex PDoA phasor of one frame.

    ``correlate`` correlates the mean-removed readings with ``exp(-j 2 beta x)``
    and divides by the detector count, so a unit single path gives about
    ``exp(j 2 pi f dt)`` up to leakage when the waveguide does not hold an
    integer number of half-wavelengths. ``lstsq`` fits the DC, cosine and sine
    terms jointly and is leakage free.
    """
    readings = frame.ed_readings
    if readings.size < 4:
        raise ValueError("need at least 4 detectors to extract a PDoA")
    if np.ptp(readings) <= 1e-12 * max(float(np.abs(readings).max()), 1e-300):
        raise ValueError("degenerate frame: readings show no spatial modulation")
    return complex(extract_pdoa_batch(readings, frame.pilot_hz, config, method))


def steering_matrix(pilots_hz, geometry: PiaGeometry, grid_deg) -> np.ndarray:
    """``exp(-j 2 pi f D cos(theta) / c)`` with shape ``(pilots, grid)``."""
    tau = geometry.antenna_gap_m * np.cos(np.radians(grid_deg)) / SPEED_OF_LIGHT
    return np.exp(-2j * np.pi * np.outer(pilots_hz, tau))


def matched_filter_magnitude(phasors, pilots_hz, geometry: PiaGeometry, grid_deg):
    """Unnormalised ``|sum_f z_f exp(-j 2 pi f D cos(theta)/c)|`` along the last axis."""
    return np.abs(np.asarray(phasors) @ steering_matrix(pilots_hz, geometry, grid_deg))


def broadside_resolution_deg(band_hz, geometry: PiaGeometry) -> float:
    if band_hz <= 0:
        return math.nan
    return math.degrees(SPEED_OF_LIGHT / (band_hz * geometry.antenna_gap_m))


def matched_filter_spectrum(pdoa: PdoaSet, geometry: PiaGeometry,
                            grid_step_deg=DEFAULT_GRID_STEP_DEG, grid_deg=None,
                            rel_threshold_db=DEFAULT_THRESHOLD_DB) -> AngularSpectrum:
    """Matched-filter angular spectrum normalised to unit peak, with detected peaks.

    Path cross terms are not modelled separately: they sit at f-domain rates
    set by the excess delays, far from the TDoA range this filter scans.
    """
    if grid_deg is None:
        if not 0 < grid_step_deg <= 1:
            raise ValueError("grid_step_deg must be in (0, 1]")
        grid_deg = angle_grid(grid_step_deg)
    grid_deg = np.asarray(grid_deg, float)
    mag = matched_filter_magnitude(pdoa.phasors, pdoa.pilots_hz, geometry, grid_deg)
    peak = mag.max()
    if peak > 0:
        mag = mag / peak
    res = broadside_resolution_deg(pdoa.band_hz, geometry)
    spec = AngularSpectrum(grid_deg, mag, (), res)
    if peak > 0:
        sep = res / 2 if math.isfinite(res) else 0.0
        spec = AngularSpectrum(grid_deg, mag, tuple(detect_doas(spec, rel_threshold_db, sep)), res)
    return spec


def local_maxima(values: np.ndarray) -> np.ndarray:
    """Indices of local maxima; plateaus report their first index, edges count."""
    v = np.asarray(values, float)
    if v.size == 1:
        return np.array([0])
    left = np.concatenate(([-np.inf], v[:-1]))
    right = np.concatenate((v[1:], [-np.inf]))
    return np.flatnonzero((v > left) & (v >= right))


def detect_doas(spectrum: AngularSpectrum, rel_threshold_db=DEFAULT_THRESHOLD_DB,
                min_separation_deg=None) -> list[tuple[float, float]]:
    """Greedy peak picking: strongest first, suppressing close weaker maxima.

    Returns ``(doa_deg, relative_power)`` sorted by descending power, where
    relative power is the squared normalised magnitude.
    """
    mag = spectrum.magnitude
    peak = mag.max() if mag.size else 0.0
    if not peak > 0:
        return []
    if min_separation_deg is None:
        res = spectrum.resolution_deg
        min_separation_deg = res / 2 if math.isfinite(res) else 0.0
    floor = peak * 10 ** (rel_threshold_db / 20)
    idx = local_maxima(mag)
    idx = idx[mag[idx] >= floor]
    idx = idx[np.argsort(-mag[idx], kind="stable")]
    accepted: list[int] = []
    for i in idx:
        theta = spectrum.grid_deg[i]
        if all(abs(theta - spectrum.grid_deg[j]) >= min_separation_deg for j in accepted):
            accepted.append(i)
    return [(float(spectrum.grid_deg[i]), float((mag[i] / peak) ** 2)) for i in accepted]


def main_lobe_width(spectrum: AngularSpectrum) -> float:
    """-3 dB width in degrees around the global peak.

    Edges are the first grid points on each side that fall below half power.
    """
    mag = spectrum.magnitude
    k = int(np.argmax(mag))
    level = mag[k] * HALF_POWER
    below_left = np.flatnonzero(mag[:k] < level)
    below_right = np.flatnonzero(mag[k + 1:] < level)
    if below_left.size == 0 or below_right.size == 0:
        raise ValueError("-3 dB contour leaves the angle grid")
    lo = below_left[-1]
    hi = k + 1 + below_right[0]
    return float(spectrum.grid_deg[hi] - spectrum.grid_deg[lo])


def write_spectrum_csv(spectrum: AngularSpectrum, fh):
    writer = csv.writer(fh)
    writer.writerow(["theta_deg", "magnitude"])
    for theta, m in zip(spectrum.grid_deg, spectrum.magnitude):
        writer.writerow([f"{theta:.6g}", f"{m:.9g}"])


def write_peaks_csv(peaks, fh):
    writer = csv.writer(fh)
    writer.writerow(["doa_deg", "rel_power"])
    for doa, power in peaks:
        writer.writerow([f"{doa:.6g}", f"{power:.9g}"])
