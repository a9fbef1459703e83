"""Plot-ready datasets for the reference experiments.

Every dataset is a :class:`Table` whose CSV output starts with a ``#`` line
holding the full configuration and seed as JSON, so runs can be regenerated.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import estimator as est
from .harness import (ExperimentConfig, run_monte_carlo, run_trial, run_ula_monte_carlo,
                      ULTRAFAST, PER_SLOT)
from .model import FrequencyCodebook, MultipathScenario, PiaGeometry
from .ula import UlaConfig, ula_beam_pattern

FIGURES = ("spectrum", "resolution-pairs", "rmse-vs-snr", "four-pilot", "sir-sweep", "ps-vs-ula")

FOUR_PILOTS_HZ = (59.5e9, 59.83e9, 60.16e9, 60.5e9)
NLOS_DELAY_S = 20e-9


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def write(self, fh, meta=True):
        if meta:
            fh.write("# " + json.dumps(self.meta, default=_jsonable, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in row])

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _jsonable(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    return value


def main_setup_codebook():
    """40 pilots from 55 to 65 GHz, T_p = 1 us, B_rf T_p = 100."""
    return FrequencyCodebook.uniform(60e9, 10e9, 40, 1e-6, 100e6)


def four_pilot_codebook():
    return FrequencyCodebook(FOUR_PILOTS_HZ, 100e-9, 100e6, 60e9, 1e9)


def main_config(doa_deg=60.0, snr_db=20.0, **kw) -> ExperimentConfig:
    return ExperimentConfig(MultipathScenario.single(doa_deg), main_setup_codebook(),
                            PiaGeometry(0.2), snr_db=(snr_db,), **kw)


def _mode(ultrafast):
    return ULTRAFAST if ultrafast else PER_SLOT


def _overrides(grid_step_deg=None, threshold_db=None):
    kw = {}
    if grid_step_deg is not None:
        kw["grid_step_deg"] = grid_step_deg
    if threshold_db is not None:
        kw["threshold_db"] = threshold_db
    return kw


def spectrum_figure(seed=0, snr_db=20.0, ultrafast=False, grid_step_deg=None,
                    threshold_db=None, doa_deg=60.0, ula_elements=13):
    cfg = main_config(doa_deg, snr_db, seed=seed, mode=_mode(ultrafast),
                      **_overrides(grid_step_deg, threshold_db))
    result = run_trial(cfg, seed)
    spec = result.spectrum
    ula = ula_beam_pattern(UlaConfig(ula_elements), doa_deg, spec.grid_deg)
    meta = {"figure": "spectrum", **cfg.describe(), "ula_elements": ula_elements,
            "argmax_deg": spec.argmax_deg, "peaks": spec.peaks}
    try:
        meta["ps_width_deg"] = est.main_lobe_width(spec)
        meta["ula_width_deg"] = est.main_lobe_width(est.AngularSpectrum(spec.grid_deg, ula))
    except ValueError:
        pass
    table = Table(["theta_deg", "ps_magnitude", "ula_magnitude"],
                  [list(r) for r in zip(spec.grid_deg, spec.magnitude, ula)], meta)
    return {"spectrum": table}


def resolution_pairs_figure(seed=0, snr_db=20.0, ultrafast=False, grid_step_deg=None,
                            threshold_db=None, pairs=((40, 60), (45, 60), (50, 60), (55, 60))):
    spectra = Table(["gap_deg", "theta_deg", "magnitude"])
    peaks = Table(["gap_deg", "doa_deg", "rel_power"])
    counts = {}
    for a, b in pairs:
        scen = MultipathScenario.with_sir(b, [(a, NLOS_DELAY_S, 0.0)])
        cfg = main_config(snr_db=snr_db, seed=seed, mode=_mode(ultrafast),
                          **_overrides(grid_step_deg, threshold_db))
        cfg = replace(cfg, scenario=scen)
        spec = run_trial(cfg, seed).spectrum
        gap = abs(b - a)
        spectra.rows.extend([gap, t, m] for t, m in zip(spec.grid_deg, spec.magnitude))
        peaks.rows.extend([gap, d, p] for d, p in spec.peaks)
        counts[str(gap)] = len(spec.peaks)
        spectra.meta = {"figure": "resolution-pairs", **cfg.describe(), "pairs": pairs}
    spectra.meta["peak_counts"] = counts
    peaks.meta = dict(spectra.meta)
    return {"spectrum": spectra, "peaks": peaks}


def rmse_rows(stats, band_hz, gap_m, extra=()):
    return [[s, band_hz, gap_m, r, stats.trials, *extra] for s, r in zip(stats.snr_db, stats.rmse_deg)]


def rmse_vs_snr_figure(seed=0, snr_db=None, trials=1000, ultrafast=False, grid_step_deg=None,
                       threshold_db=None,
                       setups=((10e9, 0.2), (5e9, 0.2), (10e9, 0.1), (1e9, 0.2)),
                       cdf_snr_db=(-10.0, -5.0, 0.0, 5.0)):
    snrs = tuple(np.arange(-15, 20.5, 2.5)) if snr_db is None else tuple(snr_db)
    rmse = Table(["snr_db", "B_hz", "D_m", "rmse_deg", "trials"])
    cdf = Table(["snr_db", "err_deg", "cum_prob", "B_hz", "D_m"])
    for band, gap in setups:
        cb = FrequencyCodebook.uniform(60e9, band, 40, 1e-6, 100e6)
        cfg = ExperimentConfig(MultipathScenario.single(60.0), cb, PiaGeometry(gap),
                               snr_db=tuple(sorted(set(snrs) | set(cdf_snr_db))),
                               trials=trials, seed=seed, mode=_mode(ultrafast),
                               **_overrides(grid_step_deg, threshold_db))
        stats = run_monte_carlo(cfg)
        for i, s in enumerate(stats.snr_db):
            if s in snrs:
                rmse.rows.append([s, band, gap, stats.rmse_deg[i], trials])
            if s in cdf_snr_db:
                err, prob = stats.cdf(i)
                # one row per distinct error value keeps the file small
                last = np.r_[err[1:] != err[:-1], True]
                cdf.rows.extend([s, e, p, band, gap] for e, p in zip(err[last], prob[last]))
        rmse.meta = {"figure": "rmse-vs-snr", **cfg.describe(), "setups": setups}
    cdf.meta = dict(rmse.meta, cdf_snr_db=cdf_snr_db)
    return {"rmse": rmse, "cdf": cdf}


def four_pilot_figure(seed=0, snr_db=None, trials=1000, ultrafast=False, grid_step_deg=None,
                      threshold_db=None, slots=(20, 40, 80, 160), doa_deg=60.0):
    snrs = tuple(np.arange(-5.0, 26.0, 1.0)) if snr_db is None else tuple(snr_db)
    table = Table(["snr_db", "B_hz", "D_m", "rmse_deg", "trials", "slots", "integration_time_s"])
    for m in slots:
        cfg = ExperimentConfig(MultipathScenario.single(doa_deg), four_pilot_codebook(),
                               PiaGeometry(0.01), snr_db=snrs, trials=trials, slots=m, seed=seed,
                               mode=_mode(ultrafast), **_overrides(grid_step_deg, threshold_db))
        stats = run_monte_carlo(cfg)
        table.rows.extend(rmse_rows(stats, cfg.codebook.band_hz, 0.01,
                                    (m, cfg.integration_time_s)))
        table.meta = {"figure": "four-pilot", **cfg.describe(), "slots": slots}
    return {"rmse": table}


def sir_config(sir_db, slots=40, snr_db=30.0, trials=1000, seed=0, **kw) -> ExperimentConfig:
    """LoS at 90 deg, one NLoS path at 30 deg, four-pilot code-book, D = 1 cm."""
    scen = MultipathScenario.with_sir(90.0, [(30.0, NLOS_DELAY_S, sir_db)])
    return ExperimentConfig(scen, four_pilot_codebook(), PiaGeometry(0.01), snr_db=(snr_db,),
                            trials=trials, slots=slots, seed=seed, **kw)


def sir_sweep_figure(seed=0, snr_db=None, trials=1000, ultrafast=False, grid_step_deg=None,
                     threshold_db=None, sir_db=None, slots=(40, 160)):
    snr = 30.0 if snr_db is None else float(np.atleast_1d(snr_db)[0])
    sirs = tuple(np.arange(0.0, 21.0, 1.0)) if sir_db is None else tuple(sir_db)
    table = Table(["sir_db", "slots", "rmse_deg", "trials", "snr_db"])
    for m in slots:
        for sir in sirs:
            cfg = sir_config(sir, m, snr, trials, seed, mode=_mode(ultrafast),
                             **_overrides(grid_step_deg, threshold_db))
            stats = run_monte_carlo(cfg)
            table.rows.append([sir, m, stats.rmse_deg[0], trials, snr])
    table.meta = {"figure": "sir-sweep", **cfg.describe(), "slots": slots, "sir_db": sirs}
    return {"rmse": table}


def ps_vs_ula_figure(seed=0, snr_db=None, trials=1000, ultrafast=False, grid_step_deg=None,
                     threshold_db=None, slots=200, pias=((10e9, 0.1), (10e9, 0.05), (10e9, 0.01)),
                     ula_elements=(4, 8, 20), pilot_count=40, doa_deg=60.0):
    """PS and a scanning ULA with the same slot budget and the same angle grid.

    Unless ``grid_step_deg`` is given, both search the ``slots`` scan
    directions, so they share one angular quantisation.
    """
    snrs = tuple(np.arange(-15.0, 21.0, 1.0)) if snr_db is None else tuple(snr_db)
    tp, brf = 100e-9, 100e6
    grid_kw = ({"grid_step_deg": grid_step_deg} if grid_step_deg is not None
               else {"grid_deg": tuple(est.scan_grid(slots))})
    table = Table(["snr_db", "B_hz", "D_m", "rmse_deg", "trials", "array", "elements"])
    for band, gap in pias:
        cb = FrequencyCodebook.uniform(60e9, band, pilot_count, tp, brf)
        cfg = ExperimentConfig(MultipathScenario.single(doa_deg), cb, PiaGeometry(gap),
                               snr_db=snrs, trials=trials, slots=slots, seed=seed,
                               mode=_mode(ultrafast), threshold_db=threshold_db or -10.0,
                               **grid_kw)
        stats = run_monte_carlo(cfg)
        table.rows.extend(rmse_rows(stats, band, gap, ("PS", 2)))
    for m in ula_elements:
        stats = run_ula_monte_carlo(MultipathScenario.single(doa_deg), UlaConfig(m), snrs,
                                    trials, slots, brf * tp, grid_step_deg, seed=seed)
        table.rows.extend([s, math.nan, math.nan, r, trials, "ULA", m]
                          for s, r in zip(stats.snr_db, stats.rmse_deg))
    table.meta = {"figure": "ps-vs-ula", **cfg.describe(), "ula_elements": ula_elements,
                  "ula_mode": "scan", "ula_slot_gain": brf * tp}
    return {"rmse": table}


_BUILDERS = {
    "spectrum": spectrum_figure,
    "resolution-pairs": resolution_pairs_figure,
    "rmse-vs-snr": rmse_vs_snr_figure,
    "four-pilot": four_pilot_figure,
    "sir-sweep": sir_sweep_figure,
    "ps-vs-ula": ps_vs_ula_figure,
}


def figure_suite(name: str, **kw) -> dict:
    """Run one reference experiment; returns named tables (the first is primary)."""
    if name not in _BUILDERS:
        raise ValueError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    builder = _BUILDERS[name]
    if name in ("spectrum", "resolution-pairs"):
        kw.pop("trials", None)
        if kw.get("snr_db") is not None:
            kw["snr_db"] = float(np.atleast_1d(kw["snr_db"])[0])
        else:
            kw.pop("snr_db", None)
    return builder(**kw)
