import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from psdoa.model import SPEED_OF_LIGHT, MultipathScenario, PiaGeometry, path_components
from psdoa.waveguide import (StandingWaveFrame, WaveguideConfig, beta, energy_expansion,
                             sample_standing_wave, standing_wave_energy,
                             standing_wave_energy_incoherent, write_frames_csv)


def random_instance(rng):
    """Random multipath, position and pilot; returns expansion inputs and antenna phasors."""
    n = rng.integers(1, 5)
    a = rng.uniform(0.1, 2.0, n)
    t = np.r_[0.0, np.sort(rng.uniform(1e-9, 1e-7, n - 1))]
    dt = 0.2 * np.cos(np.radians(rng.uniform(0, 180, n))) / SPEED_OF_LIGHT
    x = rng.uniform(0, 2.5e-3)
    f = rng.uniform(55e9, 65e9)
    s1 = np.sum(a * np.exp(-2j * np.pi * f * t))
    s2 = np.sum(a * np.exp(-2j * np.pi * f * (t + dt)))
    return a, t, dt, x, f, s1, s2


def test_beta_examples():
    wg = WaveguideConfig()
    assert beta(60e9, wg) == pytest.approx(1257.0, abs=0.6)
    assert beta(60e9, wg) == pytest.approx(1257.5070, rel=1e-7)
    assert beta(120e9, wg) == pytest.approx(2 * beta(60e9, wg))
    assert beta(1e-3, wg) == pytest.approx(0, abs=1e-9)


def test_sample_examples():
    f = 60e9
    b = float(beta(f, WaveguideConfig()))
    wg = WaveguideConfig(length_m=1e-2, detector_positions_m=(0.0, math.pi / 2 / b))
    frame = sample_standing_wave(1, 1, f, wg)
    assert frame.ed_readings[0] == pytest.approx(4.0)
    assert frame.ed_readings[1] == pytest.approx(0.0, abs=1e-12)


def test_expansion_matches_superposition():
    rng = np.random.default_rng(2024)
    wg = WaveguideConfig()
    for _ in range(300):
        a, t, dt, x, f, s1, s2 = random_instance(rng)
        direct = abs(s1 * np.exp(1j * beta(f, wg) * x) + s2 * np.exp(-1j * beta(f, wg) * x)) ** 2
        expanded = energy_expansion(a, t, dt, x, f)
        scale = (abs(s1) + abs(s2)) ** 2
        assert abs(direct - expanded) <= 1e-9 * max(direct, scale)


@settings(max_examples=40)
@given(st.floats(55e9, 65e9), st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_periodic_and_bounded(f, s1, s2):
    period = SPEED_OF_LIGHT / (2 * f)
    x = np.linspace(0, period, 7)
    wg = WaveguideConfig(length_m=3 * period, detector_positions_m=tuple(np.r_[x, x[1:] + period]))
    e = standing_wave_energy(s1, s2, f, wg)
    assert np.allclose(e[:7], e[6:], atol=1e-9 * (1 + abs(s1) + abs(s2)) ** 2)
    assert np.all(e <= (abs(s1) + abs(s2)) ** 2 * (1 + 1e-12) + 1e-12)
    assert np.all(e >= -1e-12)


def test_default_geometry_one_period():
    wg = WaveguideConfig()
    assert wg.detector_count == 30
    assert wg.positions[0] == 0 and wg.positions[-1] == pytest.approx(2.5e-3)
    assert SPEED_OF_LIGHT / (2 * 60e9) == pytest.approx(2.4983e-3, rel=1e-4)


def test_config_validation():
    with pytest.raises(ValueError):
        WaveguideConfig(detector_count=0)
    with pytest.raises(ValueError):
        WaveguideConfig(detector_positions_m=(0.0, 1e-3, 1e-3))
    with pytest.raises(ValueError):
        WaveguideConfig(detector_positions_m=(0.0, 1.0))
    with pytest.raises(ValueError):
        StandingWaveFrame(60e9, np.array([1.0, -0.5]))


def test_incoherent_single_path_equals_coherent():
    rng = np.random.default_rng(3)
    wg = WaveguideConfig()
    scen = MultipathScenario.single(50)
    f = np.array([56e9, 61e9])
    u1, u2 = path_components(scen, PiaGeometry(0.2), f)
    n1, n2 = rng.normal(size=(2, 2)) * 0.1 + 0j
    inc = standing_wave_energy_incoherent(u1, u2, n1, n2, f, wg)
    coh = standing_wave_energy(u1.sum(0) + n1, u2.sum(0) + n2, f, wg)
    assert np.allclose(inc, coh)


def test_incoherent_drops_cross_terms():
    wg = WaveguideConfig()
    scen = MultipathScenario.with_sir(90, [(30, 2e-8, 0)])
    f = np.array([60e9])
    u1, u2 = path_components(scen, PiaGeometry(0.01), f)
    inc = standing_wave_energy_incoherent(u1, u2, 0, 0, f, wg)
    parts = sum(standing_wave_energy(u1[k], u2[k], f, wg) for k in range(2))
    assert np.allclose(inc, parts)


def test_frames_csv():
    wg = WaveguideConfig(detector_count=3)
    buf = io.StringIO()
    write_frames_csv([sample_standing_wave(1, 1, 60e9, wg)], wg, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "pilot_hz,x_m,energy"
    assert len(lines) == 4
    assert float(lines[1].split(",")[2]) == pytest.approx(4.0)
