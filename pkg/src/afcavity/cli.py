"""Command-line front end.

Subcommands print ``key=value`` lines on stdout; data files go to ``--out``.
Errors are printed as a single ``error code=... message=...`` line on stderr
with a nonzero exit status.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

from . import __version__, analytic, model, sweep
from .comb import build_comb, dephasing_factor
from .config import load_config
from .dynamics import RegimeWarning, calibrate_coupling, extract_efficiency, simulate
from .errors import AFCError, ConfigurationError


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def _emit(pairs, stream=None):
    stream = stream or sys.stdout
    for k, v in pairs:
        stream.write(f"{k}={_fmt(v)}\n")


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_analytic(cfg, args):
    comb = cfg.comb_params()
    d = model.averaged_depth(comb)
    r2 = cfg["cavity"]["r2"]
    r1 = cfg.r1()
    cav = cfg.cavity_params()
    br = analytic.total_efficiency(r1, r2, d, comb.finesse_a)
    refl = analytic.reflection_exact(r1, r2, d)
    derived = model.derive_cavity(cav)
    pairs = [
        ("r1", r1),
        ("r2", r2),
        ("d_tilde", d),
        ("finesse_a", comb.finesse_a),
        ("eta_total", br.eta_total),
        ("eta_dephasing", br.eta_dephasing),
        ("eta_cavity", br.eta_cavity),
        ("echo_amplitude_ratio", br.echo_amplitude_ratio),
        ("reflection_amplitude", refl),
        ("reflection_intensity", refl * refl),
        ("matched_r1", model.matched_r1(r2, d)),
        ("finesse_c", derived.finesse_c),
        ("free_spectral_range_hz", derived.free_spectral_range),
        ("linewidth_hz", derived.linewidth),
        ("kappa", derived.kappa),
        ("cooperativity", model.cooperativity(d, cav.t1) if cav.t1 > 0 else math.inf),
        ("single_pass_efficiency", analytic.single_pass_efficiency(d, br.eta_dephasing)),
    ]
    _emit(pairs)
    if args.format == "report":
        _write(_out_path(args, "analytic.json"), json.dumps(dict(pairs), indent=2) + "\n")
    return 0


def cmd_simulate(cfg, args):
    comb_params = cfg.comb_params()
    sim = cfg.simulation_config()
    comb = build_comb(comb_params, sim.resolution)
    pulse = cfg.pulse()
    cav = cfg.mode_cavity()
    c = cfg["simulation"]["cooperativity"]
    g = calibrate_coupling(comb, cav.kappa, c)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RegimeWarning)
        rec = simulate(cav, comb, pulse, sim, coupling=g)
    for w in caught:
        sys.stderr.write(f"warning message=\"{w.message}\"\n")
    rep = extract_efficiency(rec, comb_params.delta, pulse)
    rec.to_text(_out_path(args, "fields.txt"))
    rec.to_binary(_out_path(args, "fields.bin"))
    report = rep.as_dict()
    report.update(
        kappa=cav.kappa,
        coupling=g,
        cooperativity=c,
        time_step=rec.config["time_step"],
        dephasing_factor=dephasing_factor(comb) if comb_params.num_teeth >= 3 else float("nan"),
    )
    _write(_out_path(args, "report.json"), json.dumps(report, indent=2, sort_keys=True) + "\n")
    _emit(
        [
            ("echo_efficiency", rep.echo_efficiency),
            ("echo_time", rep.echo_time),
            ("echo_delay", rep.echo_delay),
            ("reflected_during_input", rep.reflected_during_input),
            ("energy_in_atoms_at_end", rep.energy_in_atoms_at_end),
            ("integrator_loss", rep.integrator_loss),
        ]
    )
    return 0


def _fixed_from_config(cfg):
    comb = cfg.comb_params()
    return {
        "r1": cfg.r1(),
        "r2": cfg["cavity"]["r2"],
        "d_tilde": model.averaged_depth(comb),
        "finesse_a": comb.finesse_a,
    }


def cmd_sweep(cfg, args):
    fixed = _fixed_from_config(cfg)
    scenario = None
    if args.engine == "time_domain":
        scenario = sweep.TimeDomainScenario(
            comb=cfg.comb_params(),
            pulse=cfg.pulse(),
            kappa=cfg.mode_cavity().kappa,
            cooperativity=cfg["simulation"]["cooperativity"],
            config=cfg.simulation_config(),
        )
    spec = sweep.SweepSpec(args.variable, args.lo, args.hi, args.count, fixed, args.engine, scenario)
    res = sweep.run_sweep(spec, threads=args.threads)
    if args.format == "csv":
        _write(_out_path(args, f"sweep_{args.variable}.csv"), res.to_csv())
    else:
        _write(_out_path(args, f"sweep_{args.variable}.json"), res.to_json() + "\n")
    best = max((p for p in res.points if p.valid), key=lambda p: p.eta_total, default=None)
    _emit(
        [
            ("variable", args.variable),
            ("points", len(res.points)),
            ("invalid_points", sum(not p.valid for p in res.points)),
            ("argmax", res.argmax if res.argmax is not None else "none"),
            ("eta_max", best.eta_total if best else "none"),
        ]
    )
    return 0


def cmd_match(cfg, args):
    f = _fixed_from_config(cfg)
    m = sweep.find_matched_point(f["r2"], f["d_tilde"], f["finesse_a"])
    length = cfg["cavity"]["length"]
    pairs = [("r1", m.r1), ("r1_numeric", m.r1_numeric), ("eta", m.eta), ("finesse_c", m.finesse_c)]
    if math.isfinite(m.finesse_c) and m.finesse_c > 0:
        fsr = model.C_LIGHT / (2 * length)
        pairs.append(("linewidth_hz", fsr / m.finesse_c))
    _emit(pairs)
    return 0


def cmd_losses(cfg, args):
    f = _fixed_from_config(cfg)
    r2_values = args.r2 or [f["r2"], 0.998, 0.995, 0.99, 0.98, 0.95]
    rematch = {"rematch": True, "fixed": False, "both": None}[args.mode]
    rows = sweep.loss_sensitivity(r2_values, f["d_tilde"], f["finesse_a"], rematch=rematch)
    text = sweep.loss_table_csv(rows)
    _write(_out_path(args, "losses.csv"), text)
    for r in rows:
        _emit(
            [
                ("r2", r.r2),
                ("eta_rematched", r.eta_rematched if r.eta_rematched is not None else "none"),
                ("eta_fixed_r1", r.eta_fixed if r.eta_fixed is not None else "none"),
            ]
        )
    return 0


def cmd_figure2(cfg, args):
    curves = sweep.figure2_curves(threads=args.threads)
    for fa, res in curves.items():
        _write(_out_path(args, f"figure2_FA{fa:g}.csv"), res.to_csv())
        best = max(res.points, key=lambda p: p.eta_total)
        _emit([(f"eta_max_FA{fa:g}", best.eta_total), (f"r1_at_max_FA{fa:g}", best.value)])
    ref = curves[sweep.FIGURE2_FINESSES[0]]
    lines = ["r1,reflection_intensity\n"]
    lines += [f"{p.value:.9g},{p.reflection_intensity:.9g}\n" for p in ref.points]
    _write(_out_path(args, "figure2_reflection.csv"), "".join(lines))
    rmin = min(ref.points, key=lambda p: p.reflection_intensity)
    _emit([("reflection_min", rmin.reflection_intensity), ("r1_at_reflection_min", rmin.value)])
    return 0


COMMANDS = {
    "analytic": cmd_analytic,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "match": cmd_match,
    "losses": cmd_losses,
    "figure2": cmd_figure2,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="scenario file (INI with unit suffixes)")
    common.add_argument("--out", metavar="DIR", default=".", help="directory for output files")
    common.add_argument("--format", choices=("csv", "report"), default="csv")
    common.add_argument("--seed", type=int, default=None, help="reserved; the solver is deterministic")
    common.add_argument("--threads", type=int, default=1, help="sweep parallelism")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE"
    )

    parser = argparse.ArgumentParser(prog="afcavity", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"afcavity {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analytic", parents=[common], help="closed-form efficiency report")
    sub.add_parser("simulate", parents=[common], help="time-domain run")
    sp = sub.add_parser("sweep", parents=[common], help="one-variable sweep")
    sp.add_argument("--variable", choices=sweep.VARIABLES, default="r1")
    sp.add_argument("--lo", type=float, default=0.6)
    sp.add_argument("--hi", type=float, default=0.999)
    sp.add_argument("--count", type=int, default=400)
    sp.add_argument("--engine", choices=sweep.ENGINES, default="analytic")
    sub.add_parser("match", parents=[common], help="impedance-matched operating point")
    lp = sub.add_parser("losses", parents=[common], help="back-mirror loss table")
    lp.add_argument("--r2", type=float, nargs="+")
    lp.add_argument("--mode", choices=("rematch", "fixed", "both"), default="both")
    sub.add_parser("figure2", parents=[common], help="efficiency and reflection vs r1 curves")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigurationError("--threads must be >= 1")
        cfg = load_config(args.config, args.overrides)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            return COMMANDS[args.command](cfg, args)
    except AFCError as exc:
        msg = str(exc).replace("\n", " ").replace('"', "'")
        sys.stderr.write(f'error code={exc.code} message="{msg}"\n')
        return 2


if __name__ == "__main__":
    sys.exit(main())
