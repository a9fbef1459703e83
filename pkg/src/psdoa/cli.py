"""Command-line front end.

Every subcommand writes CSV to ``--out`` (standard output by default).
Configuration errors exit with status 2 and a one-line diagnostic.
"""
from __future__ import annotations

import argparse
import contextlib
import math
import sys

from . import bounds, figures
from .figures import Table
from .harness import PER_SLOT, ULTRAFAST, ExperimentConfig, run_monte_carlo, run_trial, run_uplink_sim
from .model import MultipathScenario
from .scenario import ScenarioError, load_scenario
from .waveguide import WaveguideConfig


class CliError(Exception):
    """Configuration problem reported as ``error: <message>`` with exit 2."""


def parse_float_list(text: str) -> list[float]:
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            v = float(item)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {item!r}") from None
        if math.isnan(v):
            raise argparse.ArgumentTypeError("NaN is not allowed")
        values.append(v)
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    g.add_argument("--seed", type=int, default=None, help="master seed")
    g.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials per SNR point")
    g.add_argument("--snr-db", type=parse_float_list, default=None,
                   help="input SNR in dB: one value, a comma list, or inf")
    g.add_argument("--ultrafast", action="store_true",
                   help="all pilots observed in one slot by a cascade of receivers")
    g.add_argument("--grid-step", type=float, default=None, help="DoA grid step in degrees")
    g.add_argument("--threshold-db", type=float, default=None,
                   help="peak threshold relative to the maximum, in dB")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="psdoa", description="Phase-spectrometry DoA simulator.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    b = sub.add_parser("bounds", parents=[common], help="closed-form bounds as one CSV row")
    b.add_argument("--d", type=float, required=True, help="antenna gap D in metres")
    b.add_argument("--lambda", dest="wavelength", type=float, required=True,
                   help="carrier wavelength in metres")
    b.add_argument("--theta", type=float, required=True, help="DoA in degrees")
    b.add_argument("--band", type=float, default=10e9, help="code-book band B in Hz")
    b.add_argument("--brf", type=float, default=100e6, help="RF bandwidth B_rf in Hz")
    b.add_argument("--tp", type=float, default=1e-6, help="slot duration T_p in s")
    b.add_argument("--pilots", type=int, default=40, help="pilot count S_f")

    for name, text in (("spectrum", "matched-filter spectrum of one trial"),
                       ("resolve", "detected DoAs of one trial"),
                       ("mc", "Monte-Carlo RMSE per SNR")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("scenario", help="scenario file")
        if name == "mc":
            s.add_argument("--cdf-out", default=None, help="also write the error CDF here")

    u = sub.add_parser("uplink", parents=[common], help="N_rf devices on separate sub-bands")
    u.add_argument("scenario", help="scenario file (band, code-book; its paths are ignored)")
    u.add_argument("--devices", type=parse_float_list, required=True,
                   help="comma list of device DoAs in degrees")
    u.add_argument("--subbands", type=int, required=True, help="number of sub-bands N_rf")

    f = sub.add_parser("figures", parents=[common], help="plot-ready data for a reference run")
    f.add_argument("name", choices=figures.FIGURES)
    f.add_argument("--table", default=None,
                   help="which table to write when a figure yields several (default: first)")
    return parser


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise CliError(f"--out: cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _check_common(args):
    if args.trials is not None and args.trials < 1:
        raise CliError("--trials: must be >= 1")
    if args.grid_step is not None and not 0 < args.grid_step <= 1:
        raise CliError("--grid-step: must be in (0, 1] degrees")


def config_from_scenario(args) -> ExperimentConfig:
    setup = load_scenario(args.scenario)
    extras = setup.extras
    wg_kw = {}
    if "L_m" in extras:
        wg_kw["length_m"] = extras["L_m"]
    if "detectors" in extras:
        wg_kw["detector_count"] = extras["detectors"]
    snr = args.snr_db if args.snr_db is not None else [setup.noise.input_snr_db]
    kw = dict(
        scenario=setup.scenario, codebook=setup.codebook, geometry=setup.geometry,
        waveguide=WaveguideConfig(**wg_kw), snr_db=tuple(snr),
        trials=args.trials or extras.get("trials", 1000),
        slots=extras.get("slots"),
        mode=ULTRAFAST if args.ultrafast else PER_SLOT,
        seed=setup.noise.rng_seed if args.seed is None else args.seed,
    )
    if args.grid_step is not None:
        kw["grid_step_deg"] = args.grid_step
    if args.threshold_db is not None:
        kw["threshold_db"] = args.threshold_db
    try:
        return ExperimentConfig(**kw)
    except ValueError as exc:
        raise CliError(f"{args.scenario}: {exc}") from None


def cmd_bounds(args, out):
    if args.snr_db is None or len(args.snr_db) != 1:
        raise CliError("--snr-db: bounds needs exactly one value")
    if not (args.d > 0 and args.wavelength > 0):
        raise CliError("--d/--lambda: must be > 0")
    snr_db = args.snr_db[0]
    report = bounds.bound_report(10 ** (snr_db / 10), args.d, args.wavelength, args.theta,
                                 args.band, args.brf, args.tp, args.pilots)
    row = {"D_m": args.d, "lambda_m": args.wavelength, "snr_db": snr_db, "theta_deg": args.theta,
           "crlb_pia": report.crlb_rad2,
           "equivalent_m": report.equivalent_ula_elements,
           "crlb_ula_equivalent": bounds.crlb_ula(10 ** (snr_db / 10),
                                                  max(2.0, report.equivalent_ula_elements),
                                                  args.theta),
           "resolution_deg": math.degrees(report.resolution_rad),
           "processing_gain_db": report.processing_gain_db}
    Table(list(row), [list(row.values())]).write(out, meta=False)


def cmd_spectrum(args, out):
    cfg = config_from_scenario(args)
    result = run_trial(cfg, cfg.seed)
    spec = result.spectrum
    Table(["theta_deg", "magnitude"], [list(r) for r in zip(spec.grid_deg, spec.magnitude)],
          {**cfg.describe(), "argmax_deg": spec.argmax_deg,
           "integration_time_s": result.integration_time_s}).write(out)


def cmd_resolve(args, out):
    cfg = config_from_scenario(args)
    result = run_trial(cfg, cfg.seed)
    Table(["doa_deg", "rel_power"], [list(p) for p in result.doas],
          {**cfg.describe(), "integration_time_s": result.integration_time_s}).write(out)


def _rmse_table(stats, cfg, extra_cols=(), extra=()):
    rows = [[s, cfg.codebook.band_hz, cfg.geometry.antenna_gap_m, r, stats.trials, m, *extra]
            for s, r, m in zip(stats.snr_db, stats.rmse_deg, stats.misses)]
    return Table(["snr_db", "B_hz", "D_m", "rmse_deg", "trials", "misses", *extra_cols], rows,
                 {**cfg.describe(), "integration_time_s": cfg.integration_time_s})


def cmd_mc(args, out):
    cfg = config_from_scenario(args)
    stats = run_monte_carlo(cfg)
    _rmse_table(stats, cfg).write(out)
    if args.cdf_out:
        cdf = Table(["snr_db", "err_deg", "cum_prob"], [], cfg.describe())
        for i, s in enumerate(stats.snr_db):
            err, prob = stats.cdf(i)
            cdf.rows.extend([s, e, p] for e, p in zip(err, prob))
        with _output(args.cdf_out) as fh:
            cdf.write(fh)


def cmd_uplink(args, out):
    cfg = config_from_scenario(args)
    devices = []
    for doa in args.devices:
        try:
            devices.append(MultipathScenario.single(doa))
        except ValueError as exc:
            raise CliError(f"--devices: {exc}") from None
    try:
        results = run_uplink_sim(devices, cfg.codebook.band_hz, args.subbands, cfg)
    except ValueError as exc:
        raise CliError(f"--subbands: {exc}") from None
    table = Table(["device", "doa_deg", "snr_db", "B_hz", "D_m", "rmse_deg", "trials"], [],
                  {**cfg.describe(), "subbands": args.subbands, "devices": args.devices})
    sub_band = cfg.codebook.band_hz / args.subbands
    for i, (doa, stats) in enumerate(zip(args.devices, results)):
        table.rows.extend([i, doa, s, sub_band, cfg.geometry.antenna_gap_m, r, stats.trials]
                          for s, r in zip(stats.snr_db, stats.rmse_deg))
    table.write(out)


def cmd_figures(args, out):
    kw = {"seed": 0 if args.seed is None else args.seed, "ultrafast": args.ultrafast,
          "grid_step_deg": args.grid_step, "threshold_db": args.threshold_db,
          "snr_db": args.snr_db}
    if args.trials is not None:
        kw["trials"] = args.trials
    tables = figures.figure_suite(args.name, **kw)
    key = args.table or next(iter(tables))
    if key not in tables:
        raise CliError(f"--table: {args.name} has tables {', '.join(tables)}")
    tables[key].write(out)


COMMANDS = {"bounds": cmd_bounds, "spectrum": cmd_spectrum, "resolve": cmd_resolve,
            "mc": cmd_mc, "uplink": cmd_uplink, "figures": cmd_figures}


def parse_and_dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits 2 on unknown flags
    try:
        _check_common(args)
        with _output(args.out) as out:
            COMMANDS[args.command](args, out)
    except (ScenarioError, CliError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
