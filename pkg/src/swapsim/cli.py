"""``swapsim`` command line.

Exit codes: 0 success, 2 configuration or input error, 3 runtime or fit failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bsm import Signature, swapped_state
from .chsh import NoDataError, Variant, analytic_chsh
from .config import OUTPUT_DIR_ENV, ConfigError, ExperimentConfig, config_summary, load_config
from .io import (
    CsvFormatError,
    chsh_record,
    dump_report,
    read_counts_csv,
    rows_to_csv,
    write_counts_csv,
    write_hom_csv,
)
from .mcsim import SIGNATURES, FitError, hom_scan, simulate_run
from .sources import coherence_time_fs, emit_state
from .syncbudget import DISTANCE_CAVEAT, SyncBudget, max_distance_km, visibility_penalty

log = logging.getLogger("swapsim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _out_dir(cfg: ExperimentConfig, override: str | None) -> Path:
    out = Path(override) if override else cfg.resolved_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def swap_demo_report(cfg: ExperimentConfig) -> tuple[dict, object]:
    """Analytic and (if pulses are configured) simulated CHSH for a config."""
    run = cfg.run_config()
    model = run.bsm_model()
    rho12, rho34 = emit_state(cfg.source_a), emit_state(cfg.source_b)
    analytic = {}
    for sig in SIGNATURES:
        state = swapped_state(rho12, rho34, model, sig)
        analytic[sig] = analytic_chsh(state, Variant.for_signature(sig), cfg.settings)

    table = None
    mc = None
    if run.n_pulses > 0:
        table = simulate_run(run, workers=cfg.workers)
        mc = {"seed": run.rng_seed, "pulses_per_setting": run.n_pulses, "raw": {}, "normalized": {}}
        for sig in SIGNATURES:
            for key, norm in (("raw", False), ("normalized", True)):
                try:
                    mc[key][sig.value] = chsh_record(table.chsh(sig, normalized=norm), cfg.settings)
                except (NoDataError, ValueError) as exc:
                    log.warning("no %s estimate for %s: %s", key, sig.value, exc)

    rows = []
    for sig in SIGNATURES:
        est = mc["raw"].get(sig.value) if mc else None
        for i, (a, b) in enumerate(cfg.settings.pairs()):
            rows.append({
                "signature": sig.value,
                "a_deg": a,
                "b_deg": b,
                "E_analytic": analytic[sig].estimates[i].E,
                "E_estimated": est["correlations"][i]["E"] if est else None,
                "std_error": est["correlations"][i]["std_error"] if est else None,
            })
    report = {
        "kind": "swap_demo",
        "config": config_summary(cfg),
        "v_mode": model.v_mode,
        "settings": dict(cfg.settings.__dict__),
        "analytic": {sig.value: chsh_record(r, cfg.settings) for sig, r in analytic.items()},
        "monte_carlo": mc,
        "table": rows,
    }
    return report, table


def cmd_swap_demo(args) -> int:
    cfg = load_config(args.config)
    report, table = swap_demo_report(cfg)
    out = _out_dir(cfg, args.out)
    dump_report(report, out / "swap_report.json")
    if table is not None and "csv" in cfg.formats:
        write_counts_csv(table, out / "counts.csv")
    print(f"V_mode = {report['v_mode']:.4f}")
    for name, rec in report["analytic"].items():
        print(f"analytic   S_{name} = {rec['S']:.6f}")
    if report["monte_carlo"]:
        for name, rec in report["monte_carlo"]["raw"].items():
            print(f"simulated  S_{name} = {rec['S']:.3f} +- {rec['std_error']:.3f}"
                  f"  ({rec['significance']:.2f} sigma above 2)")
    print(f"report written to {out / 'swap_report.json'}")
    return EXIT_OK


def cmd_hom_scan(args) -> int:
    cfg = load_config(args.config)
    run = cfg.hom_run_config()
    delays = cfg.hom.delays()
    result = hom_scan(run, delays, workers=cfg.workers)
    out = _out_dir(cfg, args.out)
    write_hom_csv(result.delays_fs, result.fourfolds, result.errors, out / "hom_scan.csv")
    fit = result.fit
    report = {
        "kind": "hom_scan",
        "config": config_summary(cfg),
        "points": int(delays.size),
        "pulses_per_point": run.n_pulses,
        "visibility": fit.visibility,
        "visibility_error": fit.visibility_error,
        "fit": {
            "baseline": fit.baseline,
            "visibility": fit.visibility,
            "center_fs": fit.center,
            "width_fs": fit.width,
            "errors": list(fit.errors),
            "chi2_reduced": fit.chi2_reduced,
        },
    }
    dump_report(report, out / "hom_fit.json")
    print(f"visibility = {fit.visibility:.4f} +- {fit.visibility_error:.4f}"
          f"  (reduced chi2 {fit.chi2_reduced:.2f}, {delays.size} points)")
    return EXIT_OK


def cmd_chsh_from_counts(args) -> int:
    table = read_counts_csv(args.counts)
    if args.variant == "both":
        # a file may hold data for one signature only
        sigs = tuple(s for s in SIGNATURES if table.total_fourfolds(s) > 0)
        if not sigs:
            raise NoDataError("no data: all four-fold counts are zero")
    else:
        sigs = (Signature(args.variant),)
    results = {}
    for sig in sigs:
        results[sig.value] = chsh_record(table.chsh(sig, normalized=args.normalize), table.settings)
    report = {"kind": "chsh", "normalized": bool(args.normalize), "results": results}
    text = dump_report(report, args.out)
    if args.out is None:
        print(text)
    return EXIT_OK


def sync_rows(budget: SyncBudget) -> list[list]:
    rows = [["point", budget.feedback_bandwidth_hz, budget.max_distance_km,
             budget.jitter_fs, budget.filter_fwhm_nm, budget.visibility]]
    for bw in (1e2, 1e3, 5e3, 1e4, 1e5, 1e6):
        rows.append(["bandwidth_sweep", bw, max_distance_km(bw), "", "", ""])
    for j in (0.0, 100.0, 260.0, 500.0, 1000.0, 2000.0, 5000.0):
        v = visibility_penalty(j, budget.filter_fwhm_nm, budget.center_nm)
        rows.append(["jitter_sweep", "", "", j, budget.filter_fwhm_nm, v])
    return rows


SYNC_COLUMNS = ("kind", "bandwidth_hz", "max_distance_km", "jitter_fs", "filter_fwhm_nm", "visibility")


def cmd_sync_budget(args) -> int:
    base = load_config(args.config).sync if args.config else SyncBudget()
    budget = SyncBudget(
        feedback_bandwidth_hz=args.bandwidth if args.bandwidth is not None else base.feedback_bandwidth_hz,
        jitter_fs=args.jitter if args.jitter is not None else base.jitter_fs,
        filter_fwhm_nm=args.filter if args.filter is not None else base.filter_fwhm_nm,
        center_nm=args.center if args.center is not None else base.center_nm,
    )
    tau = coherence_time_fs(budget.filter_fwhm_nm, budget.center_nm)
    print(f"feedback bandwidth   {budget.feedback_bandwidth_hz:12.6g} Hz")
    print(f"max source distance  {budget.max_distance_km:12.2f} km")
    print(f"coherence time       {tau:12.1f} fs  ({budget.filter_fwhm_nm} nm at {budget.center_nm} nm)")
    print(f"jitter               {budget.jitter_fs:12.1f} fs")
    print(f"mode overlap         {budget.visibility:12.4f}")
    print(f"warning: {DISTANCE_CAVEAT}")
    rows = sync_rows(budget)
    print()
    print(f"{'bandwidth [Hz]':>15} {'distance [km]':>14}")
    for r in rows:
        if r[0] == "bandwidth_sweep":
            print(f"{r[1]:>15.6g} {r[2]:>14.2f}")
    print()
    print(f"{'jitter [fs]':>15} {'overlap':>14}")
    for r in rows:
        if r[0] == "jitter_sweep":
            print(f"{r[3]:>15.1f} {r[5]:>14.4f}")
    if args.csv:
        Path(args.csv).write_text(
            "# swapsim sync budget\n" + rows_to_csv(SYNC_COLUMNS, rows), encoding="utf-8"
        )
    if args.json:
        dump_report({
            "kind": "sync_budget",
            "feedback_bandwidth_hz": budget.feedback_bandwidth_hz,
            "max_distance_km": budget.max_distance_km,
            "jitter_fs": budget.jitter_fs,
            "filter_fwhm_nm": budget.filter_fwhm_nm,
            "center_nm": budget.center_nm,
            "coherence_time_fs": tau,
            "visibility": budget.visibility,
            "warning": DISTANCE_CAVEAT,
        }, args.json)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swapsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("swap-demo", help="analytic and simulated CHSH of the swapped pairs")
    p.add_argument("config")
    p.add_argument("--out", help=f"output directory (default: config, then ${OUTPUT_DIR_ENV})")
    p.set_defaults(func=cmd_swap_demo)

    p = sub.add_parser("hom-scan", help="simulated HOM delay scan with Gaussian fit")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_hom_scan)

    p = sub.add_parser("chsh-from-counts", help="CHSH value from a counts CSV")
    p.add_argument("counts")
    p.add_argument("--variant", choices=["psi-", "psi+", "both"], default="both")
    p.add_argument("--normalize", action="store_true",
                   help="correct four-folds by the product of two-fold counts")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_chsh_from_counts)

    p = sub.add_parser("sync-budget", help="distance and visibility budget of the synchronization")
    p.add_argument("--config")
    p.add_argument("--bandwidth", type=float, help="PLL feedback bandwidth in Hz")
    p.add_argument("--jitter", type=float, help="timing jitter in fs")
    p.add_argument("--filter", type=float, help="filter FWHM in nm")
    p.add_argument("--center", type=float, help="center wavelength in nm")
    p.add_argument("--csv", help="also write the tables as CSV")
    p.add_argument("--json", help="also write a JSON summary")
    p.set_defaults(func=cmd_sync_budget)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, CsvFormatError, NoDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FitError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
