"""Closed-form bounds: CRLBs, ULA equivalence, resolution and processing gain."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .model import SPEED_OF_LIGHT


def _check_doa(doa_deg):
    if not 0.0 < doa_deg < 180.0:
        raise ValueError(f"doa_deg must be strictly inside (0, 180); endfire bound diverges "
                         f"(got {doa_deg})")
    return math.sin(math.radians(doa_deg))


def _check_snr(snr_lin):
    if not snr_lin > 0:
        raise ValueError("snr_lin must be > 0")


def crlb_pia(snr_lin, gap_over_lambda, doa_deg):
    """DoA CRLB (rad^2) of a two-antenna phase interferometer."""
    _check_snr(snr_lin)
    if not gap_over_lambda > 0:
        raise ValueError("gap_over_lambda must be > 0")
    s = _check_doa(doa_deg)
    return (1 / snr_lin) / ((2 * math.pi * gap_over_lambda) ** 2 * s ** 2)


def crlb_ula(snr_lin, elements, doa_deg):
    """DoA CRLB (rad^2) of an ``elements``-antenna half-wavelength ULA."""
    _check_snr(snr_lin)
    if elements < 2:
        raise ValueError("ULA needs at least 2 elements")
    s = _check_doa(doa_deg)
    m = float(elements)
    return 6 / (snr_lin * math.pi ** 2 * m * (m ** 2 - 1) * s ** 2)


def equivalent_ula_elements(gap_over_lambda):
    """ULA size with the same Fisher information as a PIA of gap ``D/lambda``."""
    if not gap_over_lambda > 0:
        raise ValueError("gap_over_lambda must be > 0")
    return 24 ** (1 / 3) * gap_over_lambda ** (2 / 3)


def angular_resolution(band_hz, gap_m, doa_deg):
    """Matched-filter DoA resolution ``c / (B D |sin theta|)`` in radians."""
    if not (band_hz > 0 and gap_m > 0):
        raise ValueError("band_hz and gap_m must be > 0")
    s = _check_doa(doa_deg)
    return SPEED_OF_LIGHT / (band_hz * gap_m * abs(s))


def waveguide_frequency_resolution(length_m, phase_velocity_mps=SPEED_OF_LIGHT):
    """Frequency resolution ``c_T / (2 L)`` of a waveguide of length L."""
    if not length_m > 0:
        raise ValueError("length_m must be > 0")
    return phase_velocity_mps / (2 * length_m)


def processing_gain(rf_bandwidth_hz, slot_duration_s, pilot_count):
    """Total processing gain ``B_rf T_p S_f`` (the ED stage contributes unity)."""
    if not (rf_bandwidth_hz > 0 and slot_duration_s > 0 and pilot_count > 0):
        raise ValueError("all arguments must be > 0")
    return rf_bandwidth_hz * slot_duration_s * pilot_count


def ula_beamwidth(elements):
    """Beam width of an m-element ULA in cos-space, ``2/m``."""
    if elements < 2:
        raise ValueError("ULA needs at least 2 elements")
    return 2 / elements


def to_db(ratio):
    return 10 * math.log10(ratio)


@dataclass(frozen=True)
class BoundReport:
    crlb_rad2: float
    equivalent_ula_elements: float
    resolution_rad: float
    processing_gain_db: float

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value >= 0:
                raise ValueError(f"{name} must be non-negative, got {value}")

    def as_row(self) -> dict:
        return asdict(self)


def bound_report(snr_lin, gap_m, wavelength_m, doa_deg, band_hz, rf_bandwidth_hz,
                 slot_duration_s, pilot_count) -> BoundReport:
    ratio = gap_m / wavelength_m
    return BoundReport(
        crlb_rad2=crlb_pia(snr_lin, ratio, doa_deg),
        equivalent_ula_elements=equivalent_ula_elements(ratio),
        resolution_rad=angular_resolution(band_hz, gap_m, doa_deg),
        processing_gain_db=to_db(processing_gain(rf_bandwidth_hz, slot_duration_s, pilot_count)),
    )
