"""Small noiseless pipeline used by several test modules."""
import numpy as np

from psdoa.estimator import PdoaSet, extract_pdoa_batch, matched_filter_spectrum
from psdoa.model import FrequencyCodebook, MultipathScenario, PiaGeometry, path_components
from psdoa.waveguide import WaveguideConfig, standing_wave_energy, standing_wave_energy_incoherent

MAIN_CODEBOOK = FrequencyCodebook.uniform(60e9, 10e9, 40, 1e-6, 100e6)
MAIN_GEOMETRY = PiaGeometry(0.2)


def noiseless_pdoa(scenario, codebook=MAIN_CODEBOOK, geometry=MAIN_GEOMETRY,
                   waveguide=None, coherent=False, method="lstsq"):
    wg = waveguide or WaveguideConfig()
    f = codebook.pilots
    u1, u2 = path_components(scenario, geometry, f)
    if coherent:
        energy = standing_wave_energy(u1.sum(0), u2.sum(0), f, wg)
    else:
        energy = standing_wave_energy_incoherent(u1, u2, 0, 0, f, wg)
    return PdoaSet(f, extract_pdoa_batch(energy, f, wg, method))


def noiseless_spectrum(scenario, codebook=MAIN_CODEBOOK, geometry=MAIN_GEOMETRY, **kw):
    step = kw.pop("grid_step_deg", 0.1)
    return matched_filter_spectrum(noiseless_pdoa(scenario, codebook, geometry, **kw), geometry,
                                   step)


def pair(a, b, sir_db=0.0, delay=2e-8):
    return MultipathScenario.with_sir(b, [(a, delay, sir_db)])
