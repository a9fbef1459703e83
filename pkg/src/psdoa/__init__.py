"""Phase-spectrometry DoA estimation with a two-antenna interferometer and a
standing-wave waveguide receiver."""
from .bounds import (angular_resolution, bound_report, crlb_pia, crlb_ula,
                     equivalent_ula_elements, processing_gain, ula_beamwidth,
                     waveguide_frequency_resolution)
from .estimator import (AngularSpectrum, PdoaSet, detect_doas, extract_pdoa, main_lobe_width,
                        matched_filter_spectrum)
from .harness import (ErrorStats, ExperimentConfig, run_monte_carlo, run_trial, run_uplink_sim)
from .model import (SPEED_OF_LIGHT, FrequencyCodebook, MultipathScenario, NoiseModel,
                    PiaGeometry, PropagationPath, min_pilots, synthesize_antenna_signals,
                    tdoa_from_doa)
from .waveguide import StandingWaveFrame, WaveguideConfig, sample_standing_wave

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
