"""Command-line front end.

    phaseconc fig2  [--config PATH] [--out DIR] [--dim N] [--quad-nodes K] [--threads T]
    phaseconc fig3  [...same flags...]
    phaseconc sweep [...same flags...]
    phaseconc state --alpha A --mode {coherent,addsub,ideal,feasible} [--nth X] [--M M] [--T T] [--eta E]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys

from . import __version__
from .amplifier import add_then_subtract, thermal_subtracted_matrix
from .config import ExperimentConfig, load_config
from .errors import ConfigError, PhaseConcError
from .fock import mean_photon, suggest_dim
from .optimizer import AmplifierReport, SweepConfig, SweepMode, optimize_nth, report_for, run_sweep
from .phase import PhaseKind, coherent_mu_closed, coherent_variance, first_moment, holevo_variance, small_n_variance
from .wigner import crescent_metric, fwhm_contour, wigner_of

log = logging.getLogger("phaseconc")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def fmt(x) -> str:
    """12 significant digits; ``inf``/``nan`` spelled in lowercase."""
    if isinstance(x, str):
        return x
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _comment(cfg: ExperimentConfig | None, extra: dict | None = None) -> str:
    payload = cfg.as_dict() if cfg is not None else {}
    if extra:
        payload.update(extra)
    return f"phaseconc {__version__} config={json.dumps(payload, sort_keys=True)}"


def write_csv(path, header, rows, comment: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


REPORT_FIELDS = [f.name for f in dataclasses.fields(AmplifierReport) if f.name != "flags"]


def _report_row(r: AmplifierReport):
    return [getattr(r, k) for k in REPORT_FIELDS] + [";".join(r.flags)]


# -- figure commands ------------------------------------------------------------------------------


def _summary(label: str, reports, N: float) -> str:
    pick = next((r for r in reports if r.M == 4), reports[-1])
    return (f"{label} M={pick.M}: <N>/N = {fmt(pick.effective_gain)}, equivalent coherent N = "
            f"{fmt(pick.equivalent_coherent_N)} (N_eq/N = {fmt(pick.equivalent_coherent_N / N)})")


def cmd_fig2(cfg: ExperimentConfig, out: str) -> int:
    ideal = run_sweep(cfg.sweep(SweepMode.IDEAL), cfg.threads)
    feas = run_sweep(cfg.sweep(SweepMode.FEASIBLE), cfg.threads)
    N = cfg.input_N
    com = _comment(cfg)
    ms = [r.M for r in ideal]

    write_csv(os.path.join(out, "fig2a.csv"),
              ["M", "v_c_ideal", "v_c_feasible", "v_c_noiseless_small_n", "v_c_noiseless_gain"],
              [[m, i.v_canonical, f.v_canonical, small_n_variance(PhaseKind.CANONICAL, (m + 1) ** 2 * N),
                coherent_variance(PhaseKind.CANONICAL, i.mean_photon_out)]
               for m, i, f in zip(ms, ideal, feas)], com)
    write_csv(os.path.join(out, "fig2b.csv"),
              ["M", "mean_pre_ideal", "mean_out_ideal", "mean_pre_feasible", "mean_out_feasible"],
              [[m, i.mean_photon_pre_subtraction, i.mean_photon_out, f.mean_photon_pre_subtraction, f.mean_photon_out]
               for m, i, f in zip(ms, ideal, feas)], com)
    write_csv(os.path.join(out, "fig2c.csv"), ["M", "nth_ideal", "nth_feasible"],
              [[m, i.nth_opt, f.nth_opt] for m, i, f in zip(ms, ideal, feas)], com)
    write_csv(os.path.join(out, "fig2d.csv"), ["M", "success_feasible", "norm_ideal"],
              [[m, f.success_prob, i.success_prob] for m, i, f in zip(ms, ideal, feas)], com)
    write_csv(os.path.join(out, "fig2_ideal.csv"), REPORT_FIELDS + ["flags"], [_report_row(r) for r in ideal], com)
    write_csv(os.path.join(out, "fig2_feasible.csv"), REPORT_FIELDS + ["flags"], [_report_row(r) for r in feas], com)

    by_m = {r.M: r for r in ideal}
    ideal_cfg = cfg.sweep(SweepMode.IDEAL)
    contour_rows = []
    for k in cfg.wigner_orders:
        nth = by_m[k].nth_opt if k in by_m else optimize_nth(ideal_cfg, k).nth
        rho, _ = thermal_subtracted_matrix(ideal_cfg.alpha, nth, k, cfg.dim)
        w = wigner_of(rho, cfg.grid())
        w.to_csv(os.path.join(out, f"fig2e_M{k}.csv"), _comment(cfg, {"M": k, "nth": nth}))
        c = fwhm_contour(w)
        cx, cp = c.centroid()
        contour_rows.append([k, nth, crescent_metric(c), cx, cp, c.area(), w.integral()])
    write_csv(os.path.join(out, "fig2e_contours.csv"),
              ["M", "nth", "crescent_metric", "centroid_x", "centroid_p", "area", "wigner_integral"], contour_rows, com)

    from .plotting import plot_fig2

    plot_fig2(out, cfg.wigner_orders)
    print(_summary("ideal", ideal, N))
    print(_summary("feasible", feas, N))
    return 0


def cmd_fig3(cfg: ExperimentConfig, out: str) -> int:
    reports = run_sweep(cfg.sweep(), cfg.threads)
    write_csv(os.path.join(out, "fig3.csv"), ["M", "v_canonical", "v_heterodyne"],
              [[r.M, r.v_canonical, r.v_heterodyne] for r in reports], _comment(cfg))
    from .plotting import plot_fig3

    plot_fig3(out)
    return 0


def cmd_sweep(cfg: ExperimentConfig, out: str) -> int:
    reports = run_sweep(cfg.sweep(), cfg.threads)
    write_csv(os.path.join(out, "sweep.csv"), REPORT_FIELDS + ["flags"], [_report_row(r) for r in reports],
              _comment(cfg))
    return 0


# -- single state ------------------------------------------------------------------------------------

STATE_FIELDS = ["mode", "alpha", "nth", "M", "v_canonical", "v_heterodyne", "mean_photon", "success_prob"]


def state_row(args) -> list:
    alpha = args.alpha
    if args.mode == "coherent":
        vc = holevo_variance(coherent_mu_closed(PhaseKind.CANONICAL, alpha))
        vh = holevo_variance(coherent_mu_closed(PhaseKind.HETERODYNE, alpha))
        return ["coherent", alpha, 0.0, 0, vc, vh, alpha * alpha, 1.0]
    if args.mode == "addsub":
        dim = args.dim or suggest_dim(alpha * alpha, 0.0, 0) + 2 * args.M + 20
        rho = add_then_subtract(alpha, args.M, dim)
        vc = holevo_variance(first_moment(rho, PhaseKind.CANONICAL))
        vh = holevo_variance(first_moment(rho, PhaseKind.HETERODYNE))
        return ["addsub", alpha, 0.0, args.M, vc, vh, mean_photon(rho), 1.0]
    cfg = SweepConfig(
        input_N=alpha * alpha, mode=SweepMode(args.mode), M_range=(args.M,), T=args.T, eta=args.eta,
        detector=args.detector, dim=args.dim or 60, quad_nodes=args.quad_nodes or 48,
    )
    r = report_for(cfg, args.M, args.nth)
    return [args.mode, alpha, args.nth, args.M, r.v_canonical, r.v_heterodyne, r.mean_photon_out, r.success_prob]


def cmd_state(args) -> int:
    if args.mode in ("ideal", "feasible") and args.nth is None:
        raise ConfigError("--nth is required for ideal and feasible modes")
    if args.alpha < 0:
        raise ConfigError("--alpha must be >= 0 (the phase reference is real)")
    row = state_row(args)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(STATE_FIELDS)
    w.writerow([fmt(v) for v in row])
    return 0


# -- entry point ---------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phaseconc", description="Coherent-state phase concentration simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("fig2", "variance, photon number, noise, success rate and Wigner contours vs M"),
                        ("fig3", "canonical vs heterodyne variance vs M"),
                        ("sweep", "full amplifier reports for the configured mode")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="YAML experiment file (defaults reproduce N=0.04, T=0.9, eta=0.4)")
        s.add_argument("--out", default=".", help="output directory")
        s.add_argument("--dim", type=int)
        s.add_argument("--quad-nodes", type=int)
        s.add_argument("--threads", type=int)
    s = sub.add_parser("state", help="one state, one CSV row on stdout")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--mode", choices=["coherent", "addsub", "ideal", "feasible"], default="coherent")
    s.add_argument("--nth", type=float)
    s.add_argument("--M", "--M0", dest="M", type=int, default=0)
    s.add_argument("--T", type=float, default=0.9)
    s.add_argument("--eta", type=float, default=0.4)
    s.add_argument("--detector", choices=["threshold", "pnr"], default="threshold")
    s.add_argument("--dim", type=int)
    s.add_argument("--quad-nodes", type=int)
    return p


def _resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.dim is not None:
        overrides["dim"] = args.dim
    if args.quad_nodes is not None:
        overrides["quad_nodes"] = args.quad_nodes
    if args.threads is not None:
        overrides["threads"] = args.threads
    cfg = dataclasses.replace(cfg, **overrides)
    try:
        cfg.sweep()
    except ValueError as exc:
        raise ConfigError(f"{cfg.source}: {exc}") from exc
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "state":
            return cmd_state(args)
        cfg = _resolve_config(args)
        os.makedirs(args.out, exist_ok=True)
        return {"fig2": cmd_fig2, "fig3": cmd_fig3, "sweep": cmd_sweep}[args.command](cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PhaseConcError, ValueError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
