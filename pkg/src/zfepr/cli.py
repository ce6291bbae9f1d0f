"""Command-line front end.

Subcommands: predict | simulate | mc-average | fit | kinetics.
Exit codes: 0 success, 1 I/O error, 2 validation error, 3 numerical
failure (fit non-convergence under --strict).

All emitted files are deterministic for a given (config, seed, inputs),
independent of --workers: wall-clock timing goes to the console only,
never into a report file.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time as _time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_config
from .ensemble import mc_ensemble_rate
from .fitting import (
    FitError,
    fit_double_lorentzian,
    fit_gaussian_peaks_slanted,
    fit_powerlaw_loglog,
    kinetics_series,
)
from .spectra import (
    BaselineKind,
    BaselineModel,
    read_spectrum_csv,
    subtract_blank,
    synthesize_spectrum,
    write_spectrum_csv,
    write_spectrum_sidecar,
)
from .spinmodel import transitions

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _load_run_config(args) -> RunConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = parse_config({"system": {"preset": "tempo_n15"}})
    if args.seed is not None:
        cfg = _replace(cfg, seed=args.seed)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = _replace(cfg, workers=args.workers)
    return cfg


def _replace(cfg: RunConfig, **kw) -> RunConfig:
    from dataclasses import replace
    return replace(cfg, **kw)


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _member_label(member) -> str:
    def level(l):
        return f"{l.branch.value}(m={l.m_t_twice}/2)"
    return f"{level(member.lower)}->{level(member.upper)}"


def cmd_predict(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    rows = []
    for tr in transitions(cfg.system):
        if not tr.observable:
            continue
        assignment = ";".join(_member_label(m) for m in tr.members)
        rows.append((tr.freq, tr.xi_total, assignment))
    path = out / f"{cfg.output_prefix}_predict.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["freq_mhz", "xi_total", "assignment"])
        for freq, xi, assignment in rows:
            writer.writerow([repr(float(freq)), repr(float(xi)), assignment])
    for freq, xi, assignment in rows:
        print(f"{freq:12.6f} MHz  xi={xi:10.6f}  {assignment}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    baseline = BaselineModel(
        kind=(BaselineKind.SLANTED if cfg.baseline_kind == "slanted"
              else BaselineKind.NONE),
        slope=cfg.baseline_slope_per_mhz,
        offset=cfg.baseline_offset,
    )
    spec = synthesize_spectrum(
        cfg.system, cfg.ensemble_params(xi=1.0), cfg.sensor,
        cfg.sweep.frequencies(), baseline=baseline,
        noise_sigma=cfg.noise_sigma, seed=cfg.seed)
    csv_path = out / f"{cfg.output_prefix}_spectrum.csv"
    json_path = out / f"{cfg.output_prefix}_spectrum.json"
    write_spectrum_csv(spec, csv_path)
    write_spectrum_sidecar(spec, json_path)
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_mc_average(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    trs = transitions(cfg.system)
    idx = cfg.mc_transition_index
    if not 0 <= idx < len(trs):
        raise ConfigError(
            f"mc.transition_index: {idx} out of range, system has "
            f"{len(trs)} transitions")
    params = cfg.ensemble_params(xi=trs[idx].xi_total)
    t0 = _time.perf_counter()
    est = mc_ensemble_rate(params, cfg.system, idx, cfg.mc_n_samples,
                           cfg.seed, workers=cfg.workers)
    elapsed = _time.perf_counter() - t0
    report = {
        "transition_index": idx,
        "transition_freq_mhz": trs[idx].freq,
        "mean_per_ms": est.mean,
        "standard_error_per_ms": est.standard_error,
        "n_samples": est.n_samples,
        "seed": est.seed,
    }
    path = out / f"{cfg.output_prefix}_mc.json"
    _write_json(path, report)
    print(f"mean = {est.mean:.6e} ms^-1  se = {est.standard_error:.2e}  "
          f"n = {est.n_samples}  seed = {est.seed}  "
          f"wall = {elapsed:.2f} s")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    spec = read_spectrum_csv(args.input)
    subtracted_path = None
    if args.blank:
        blank = read_spectrum_csv(args.blank)
        spec = subtract_blank(spec, blank)
        subtracted_path = out / f"{cfg.output_prefix}_subtracted.csv"
        write_spectrum_csv(spec, subtracted_path)
    centers = ([float(c) for c in args.centers.split(",")]
               if args.centers else None)
    if args.model == "gaussian":
        result = fit_gaussian_peaks_slanted(spec, args.n_peaks,
                                            init_centers=centers)
    else:
        result = fit_double_lorentzian(spec)
    if args.strict and not result.converged:
        print(f"fit did not converge: {result.message}", file=sys.stderr)
        return EXIT_NUMERICAL
    # record file names only, so reports are location-independent
    report = result.to_dict()
    report["input"] = Path(args.input).name
    report["blank"] = Path(args.blank).name if args.blank else None
    path = out / f"{cfg.output_prefix}_fit.json"
    _write_json(path, report)
    for p in result.peaks:
        print(f"peak at {p.center:10.4f} +/- {p.center_err:.4f} MHz  "
              f"fwhm {p.fwhm:8.4f} +/- {p.fwhm_err:.4f}  "
              f"area {p.area:.4e} +/- {p.area_err:.1e}")
    if subtracted_path:
        print(f"wrote {subtracted_path}")
    print(f"wrote {path}")
    return EXIT_OK


def _read_manifest(path: Path):
    entries = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["time_h", "path"]:
            raise ConfigError(
                f"{path}: manifest header must be time_h,path")
        for row in reader:
            if not row:
                continue
            entries.append((float(row[0]), path.parent / row[1]))
    if not entries:
        raise ConfigError(f"{path}: manifest is empty")
    return entries


def _read_powerlaw_table(path: Path):
    power, t_d, t_d_err = [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["power", "t_d"]:
            raise ConfigError(f"{path}: header must be power,t_d[,t_d_err]")
        has_err = len(header) > 2 and header[2] == "t_d_err"
        for row in reader:
            if not row:
                continue
            power.append(float(row[0]))
            t_d.append(float(row[1]))
            if has_err:
                t_d_err.append(float(row[2]))
    if not power:
        raise ConfigError(f"{path}: table is empty")
    return power, t_d, (t_d_err if has_err else None)


def cmd_kinetics(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args)
    if args.powerlaw:
        power, t_d, t_d_err = _read_powerlaw_table(Path(args.powerlaw))
        result = fit_powerlaw_loglog(power, t_d, t_d_err)
        if args.strict and not result.converged:
            print(f"fit did not converge: {result.message}", file=sys.stderr)
            return EXIT_NUMERICAL
        report = result.to_dict()
        report["input"] = Path(args.powerlaw).name
        path = out / f"{cfg.output_prefix}_powerlaw.json"
        _write_json(path, report)
        a, b = result.params
        ea, eb = result.param_errors
        print(f"log t_d = a log power + b: a = {a:.4f} +/- {ea:.4f}, "
              f"b = {b:.4f} +/- {eb:.4f}")
        print(f"wrote {path}")
        return EXIT_OK

    if not args.manifest:
        raise ConfigError("kinetics needs --manifest or --powerlaw")
    entries = _read_manifest(Path(args.manifest))
    series = [(time, read_spectrum_csv(p)) for time, p in entries]
    centers = ([float(c) for c in args.centers.split(",")]
               if args.centers else None)
    result = kinetics_series(series, n_peaks=args.n_peaks,
                             init_centers=centers, workers=cfg.workers)
    if args.strict and not result.decay.converged:
        print(f"decay fit did not converge: {result.decay.message}",
              file=sys.stderr)
        return EXIT_NUMERICAL
    report = {
        "rows": [
            {"time_h": r.time, "total_area": r.total_area,
             "areas": list(r.areas), "fwhms": list(r.fwhms),
             "failed": r.failed}
            for r in result.rows
        ],
        "n_failed": result.n_failed,
        "decay": result.decay.to_dict(),
    }
    path = out / f"{cfg.output_prefix}_kinetics.json"
    _write_json(path, report)
    amp, t_d, y0 = result.decay.params
    print(f"decay time t_d = {t_d:.3f} h "
          f"(+/- {result.decay.param_errors[1]:.3f})  "
          f"failed spectra: {result.n_failed}/{len(result.rows)}")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zfepr",
        description="Zero-field EPR via NV cross-relaxation: prediction, "
                    "simulation and analysis.")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="override config seed")
    common.add_argument("--workers", type=int, help="worker pool size")
    common.add_argument("--out", help="output directory (default: cwd)")
    common.add_argument("--strict", action="store_true",
                        help="treat fit non-convergence as an error (exit 3)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", parents=[common],
                       help="stick spectrum from hyperfine constants")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", parents=[common],
                       help="synthesize a spectrum (CSV + JSON sidecar)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mc-average", parents=[common],
                       help="Monte Carlo ensemble-averaged rate")
    p.set_defaults(func=cmd_mc_average)

    p = sub.add_parser("fit", parents=[common],
                       help="fit a spectrum CSV (optional blank subtraction)")
    p.add_argument("input", help="spectrum CSV")
    p.add_argument("--blank", help="blank-trace CSV to subtract")
    p.add_argument("--model", choices=["gaussian", "lorentzian"],
                   default="gaussian")
    p.add_argument("--n-peaks", type=int, default=3)
    p.add_argument("--centers", help="comma-separated initial centers, MHz")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("kinetics", parents=[common],
                       help="kinetics series or power-law analysis")
    p.add_argument("--manifest", help="CSV manifest: time_h,path")
    p.add_argument("--powerlaw", help="CSV table: power,t_d[,t_d_err]")
    p.add_argument("--n-peaks", type=int, default=3)
    p.add_argument("--centers", help="comma-separated initial centers, MHz")
    p.set_defaults(func=cmd_kinetics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FitError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, FileNotFoundError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
