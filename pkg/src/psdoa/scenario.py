"""Key-value scenario files.

Example::

    # single LoS path, main setup
    D_m = 0.2
    fc_hz = 60e9
    B_hz = 10e9
    pilots = 40            # count, or an explicit comma list of Hz
    Tp_s = 1e-6
    Brf_hz = 100e6
    paths = 60:0:0, 30:2e-8:15   # doa_deg:delay_s:sir_db, LoS first
    snr_db = 20
    seed = 1

Optional keys: ``slots``, ``L_m``, ``detectors``, ``trials``.
"""
from __future__ import annotations

import math
from pathlib import Path

from .model import (FrequencyCodebook, MultipathScenario, NoiseModel, PiaGeometry,
                    PropagationPath, Setup)

REQUIRED = ("D_m", "paths")
DEFAULTS = {
    "fc_hz": "60e9",
    "B_hz": "10e9",
    "pilots": "40",
    "Tp_s": "1e-6",
    "Brf_hz": "100e6",
    "snr_db": "inf",
    "seed": "0",
}
OPTIONAL = ("slots", "L_m", "detectors", "trials")


class ScenarioError(ValueError):
    """Invalid scenario; ``key`` names the offending entry."""

    def __init__(self, key, message, source=None):
        self.key = key
        self.message = message
        self.source = source
        super().__init__(key, message, source)

    def __str__(self):
        where = f"{self.source}: " if self.source else ""
        return f"{where}{self.key}: {self.message}"


def _float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ScenarioError(key, f"expected a number, got {value!r}") from None


def _int(key, value):
    try:
        f = float(value)
    except ValueError:
        raise ScenarioError(key, f"expected an integer, got {value!r}") from None
    if not f.is_integer():
        raise ScenarioError(key, f"expected an integer, got {value!r}")
    return int(f)


def parse_paths(text: str) -> list[PropagationPath]:
    paths = []
    for i, item in enumerate(t for t in text.split(",") if t.strip()):
        parts = item.strip().split(":")
        if len(parts) != 3:
            raise ScenarioError("paths", f"entry {item.strip()!r} is not doa_deg:delay_s:sir_db")
        doa, delay, sir = (_float("paths", p) for p in parts)
        amp = 1.0 if i == 0 else 10 ** (-sir / 20)
        try:
            paths.append(PropagationPath(doa, delay, amp))
        except ValueError as exc:
            raise ScenarioError("paths", str(exc)) from None
    if not paths:
        raise ScenarioError("paths", "no paths given")
    return paths


def parse_scenario(text: str, source=None) -> Setup:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}", f"expected 'key = value', got {line!r}", source)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in REQUIRED and key not in DEFAULTS and key not in OPTIONAL:
            raise ScenarioError(key, "unknown key", source)
        raw[key] = value
    for key in REQUIRED:
        if key not in raw:
            raise ScenarioError(key, "missing required key", source)
    values = {**DEFAULTS, **raw}
    try:
        geometry = _build(PiaGeometry, "D_m", _float("D_m", values["D_m"]))
        fc = _float("fc_hz", values["fc_hz"])
        band = _float("B_hz", values["B_hz"])
        tp = _float("Tp_s", values["Tp_s"])
        brf = _float("Brf_hz", values["Brf_hz"])
        pilots_text = values["pilots"]
        if "," in pilots_text:
            pilots = [_float("pilots", p) for p in pilots_text.split(",") if p.strip()]
            codebook = _build(FrequencyCodebook, "pilots", tuple(pilots), tp, brf, fc, band)
        else:
            count = _int("pilots", pilots_text)
            codebook = _build(FrequencyCodebook.uniform, "pilots", fc, band, count, tp, brf)
        paths = parse_paths(values["paths"])
        scenario = _build(MultipathScenario, "paths", tuple(paths))
        snr = _float("snr_db", values["snr_db"])
        if math.isnan(snr):
            raise ScenarioError("snr_db", "must not be NaN")
        noise = NoiseModel(snr, _int("seed", values["seed"]))
        extras = {}
        for key, conv in (("slots", _int), ("L_m", _float), ("detectors", _int),
                          ("trials", _int)):
            if key in raw:
                extras[key] = conv(key, raw[key])
                if extras[key] <= 0:
                    raise ScenarioError(key, "must be > 0")
    except ScenarioError as exc:
        exc.source = exc.source or source
        raise
    return Setup(geometry, codebook, scenario, noise, extras)


def _build(factory, key, *args):
    try:
        return factory(*args)
    except ValueError as exc:
        raise ScenarioError(key, str(exc)) from None


def load_scenario(path) -> Setup:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError("file", f"cannot read {path}: {exc.strerror}", path) from None
    return parse_scenario(text, source=path)
