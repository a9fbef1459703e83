"""Half-wavelength ULA with a conventional beamformer, used as the baseline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimator import angle_grid, scan_grid
from .model import MultipathScenario, NoiseModel, complex_noise

SCAN = "scan"
DIGITAL = "digital"


@dataclass(frozen=True)
class UlaConfig:
    elements: int
    center_hz: float = 60e9

    def __post_init__(self):
        if self.elements < 2:
            raise ValueError("ULA needs at least 2 elements")


def ula_beam_pattern(config: UlaConfig, steer_deg, eval_deg):
    """Normalised conventional-beamformer response, in [0, 1]."""
    n = np.arange(config.elements)
    du = np.cos(np.radians(eval_deg)) - np.cos(np.radians(steer_deg))
    du = np.asarray(du, float)
    resp = np.exp(1j * np.pi * np.multiply.outer(du, n)).sum(axis=-1)
    out = np.abs(resp) / config.elements
    return float(out) if out.ndim == 0 else out


def element_response(config: UlaConfig, scenario: MultipathScenario) -> np.ndarray:
    """Noiseless per-element phasor summed over paths, shape ``(elements,)``."""
    n = np.arange(config.elements)
    phase_delay = np.exp(-2j * np.pi * config.center_hz * scenario.delays_s)
    steer = np.exp(-1j * np.pi * np.outer(np.cos(np.radians(scenario.doas_deg)), n))
    return (scenario.amplitudes * phase_delay) @ steer


def beam_directions(slots, grid_step_deg=None, mode=SCAN) -> np.ndarray:
    if grid_step_deg is None:
        return scan_grid(slots) if mode == SCAN else angle_grid()
    return angle_grid(grid_step_deg)


def ula_estimate_batch(scenario: MultipathScenario, config: UlaConfig, noise: NoiseModel,
                       slots: int, slot_gain: float, rngs, grid_step_deg=None, mode=SCAN):
    """DoA estimates for a batch of trials, one generator per trial.

    ``scan``: slot ``s`` steers the beam to direction ``s mod G`` and the
    received power is averaged per direction (an analogue spatial search).
    ``digital``: every slot's snapshot is beamformed towards every direction
    and powers are averaged over the slots.
    """
    if slots < 1:
        raise ValueError("slots must be >= 1")
    if mode not in (SCAN, DIGITAL):
        raise ValueError(f"unknown ULA mode {mode!r}")
    grid = beam_directions(slots, grid_step_deg, mode)
    if mode == SCAN and slots < grid.size:
        raise ValueError(f"scan needs at least one slot per direction ({grid.size} > {slots})")
    clean = element_response(config, scenario)
    weights = np.exp(-1j * np.pi * np.outer(np.arange(config.elements),
                                           np.cos(np.radians(grid))))
    var = noise.variance(scenario.los.amplitude, slot_gain)
    estimates = []
    for rng in rngs:
        snap = np.broadcast_to(clean, (slots, config.elements))
        if var > 0:
            snap = snap + complex_noise(rng, (slots, config.elements), var)
        if mode == SCAN:
            beam = np.arange(slots) % grid.size
            out = np.einsum("sn,ns->s", snap, weights.conj()[:, beam])
            power = np.bincount(beam, np.abs(out) ** 2, minlength=grid.size)
            power = power / np.bincount(beam, minlength=grid.size)
        else:
            power = (np.abs(snap @ weights.conj()) ** 2).mean(axis=0)
        estimates.append(float(grid[np.argmax(power)]))
    return np.array(estimates)


def ula_estimate_doa(scenario: MultipathScenario, config: UlaConfig, noise: NoiseModel,
                     slots: int, slot_gain: float, grid_step_deg=None, mode=SCAN, rng=None):
    rng = rng if rng is not None else noise.rng()
    return float(ula_estimate_batch(scenario, config, noise, slots, slot_gain, [rng],
                                    grid_step_deg, mode)[0])
