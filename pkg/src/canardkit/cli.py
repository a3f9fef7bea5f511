"""Command-line front end: analyze, simulate, sweep, singular-orbit."""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

from canardkit import bifurcation, dynamics, manifold, model, normalform
from canardkit.config import RunConfig, load_config
from canardkit.errors import CanardkitError, GeometryError, NumericalError, ValidationError

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

# (flag, section, option, help)
OVERRIDES = {
    "common": [
        ("--delta", "model", "delta", "death-rate ratio delta"),
        ("--theta", "model", "theta", "Allee parameter theta"),
        ("--eta", "model", "eta", "half-saturation eta"),
        ("--epsilon", "model", "epsilon", "timescale ratio epsilon (required, never derived)"),
    ],
    "analyze": [
        ("--transversality-step", "analyze", "transversality_step", "central-difference step (default 1e-4)"),
        ("--dulac-samples", "analyze", "dulac_samples", "Dulac check samples (default 10000)"),
    ],
    "simulate": [
        ("--u0", "simulate", "u0", "initial prey density"),
        ("--v0", "simulate", "v0", "initial predator density"),
        ("--t-end", "simulate", "t_end", "final fast time (default 5000)"),
        ("--rtol", "simulate", "rtol", "relative tolerance (default 1e-9)"),
        ("--atol", "simulate", "atol", "absolute tolerance (default 1e-12)"),
        ("--method", "simulate", "method", "solve_ivp method (default LSODA)"),
        ("--detect-cycle", "simulate", "detect_cycle", "run return-map cycle detection (default true)"),
    ],
    "sweep": [
        ("--delta-min", "sweep", "delta_min", "lower end of the delta range (default 0.2)"),
        ("--delta-max", "sweep", "delta_max", "upper end, clamped to 1/(1+eta) (default 0.7)"),
        ("--step", "sweep", "step", "base grid step (default 0.01)"),
        ("--refine-levels", "sweep", "refine_levels", "geometric refinements around each delta_H (default 10)"),
        ("--reverse-near-hopf", "sweep", "reverse_near_hopf", "also search unstable cycles near delta_H (default false)"),
        ("--locate-snl", "sweep", "locate_snl", "locate the saddle-node of cycles (default false)"),
    ],
    "singular-orbit": [
        ("--points-per-segment", "singular_orbit", "points_per_segment", "samples per segment (default 200)"),
    ],
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="canardkit",
        description="Slow-fast predator-prey analysis: folds, Lyapunov coefficients, cycles, diagrams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analyze": "threshold report (equilibria, folds, A, B, theta_B, delta_C)",
        "simulate": "integrate one orbit and summarize any detected cycle",
        "sweep": "delta sweep producing a bifurcation-diagram CSV",
        "singular-orbit": "write the singular relaxation orbit as a tagged polyline",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", type=Path, help="INI config file")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (default .)")
        for flag, sec, opt, h in OVERRIDES["common"] + OVERRIDES[name]:
            p.add_argument(flag, dest=f"{sec}.{opt}", metavar=opt.upper(), help=h)
    return parser


def resolve_config(args) -> RunConfig:
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        cfg = load_config(text)
    else:
        cfg = RunConfig()
    for key, value in vars(args).items():
        if "." in key and value is not None:
            sec, opt = key.split(".", 1)
            cfg.set(sec, opt, value)
    return cfg


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write(path: Path, lines: Sequence[str], cfg: RunConfig) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# config-hash: {cfg.hash()}\n")
        for ln in lines:
            fh.write(ln + "\n")


def cmd_analyze(cfg: RunConfig, out: Path) -> list[str]:
    p = cfg.params(need_delta=False)
    th, eta, eps = p.theta, p.eta, p.epsilon
    lines = [f"theta = {th!r}", f"eta = {eta!r}", f"epsilon = {eps!r}"]
    lines.append(f"transcritical_threshold = {model.transcritical_threshold(eta)!r}")
    if cfg.model.delta is not None:
        lines.append(f"delta = {p.delta!r}")
        for e in model.equilibria(p):
            lines.append(f"equilibrium.{e.kind} = ({e.u!r}, {e.v!r}) {e.stability}" + (f" [{e.branch}]" if e.branch else ""))
    folds = manifold.fold_points(th, eta)
    region = manifold.classify_region(th, eta)
    lines.append(f"region = {region}")
    for fp in folds:
        lines.append(f"fold.{fp.label} = ({fp.u!r}, {fp.v!r}) {fp.kind}" + (" degenerate" if fp.degenerate else ""))
    good = [fp for fp in folds if not fp.degenerate]
    if len(good) != 2:
        lines.append("canard_analysis = skipped (fewer than two non-degenerate folds)")
        return lines
    for lab in ("P", "Q"):
        exp = normalform.expansion_at(th, eta, lab)
        L1, A = normalform.first_lyapunov(exp, eps)
        dH, dC = normalform.thresholds(exp, eps)
        lines += [
            f"{lab}.delta_star = {exp.delta_star!r}",
            f"{lab}.A = {A!r}",
            f"{lab}.criticality = {normalform.criticality(A)}",
            f"{lab}.L1 = {L1!r}",
            f"{lab}.delta_C = {dC!r}",
        ]
    exp = normalform.expansion_at(th, eta, "P")
    lines.append(f"P.theta_B_closed_form = {normalform.theta_bautin(exp.u_m, eta, exp.delta_star)!r}")
    try:
        tb = normalform.bautin_locus(eta)
    except CanardkitError as exc:
        lines.append(f"theta_B = unavailable ({exc})")
        return lines
    eb = normalform.expansion_at(tb, eta, "P")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        L2, B = normalform.second_lyapunov(eb, eps)
    det = normalform.bautin_transversality(
        normalform.chart_family(eta, eps), eb.delta_star, tb, cfg.analyze.transversality_step
    )
    lines += [
        f"theta_B = {tb!r}",
        f"bautin.delta_H = {eb.delta_star!r}",
        f"bautin.B = {B!r}",
        f"bautin.B_normal_form = {normalform.B_normal_form(eb)!r}",
        f"bautin.L2 = {L2!r}",
        f"bautin.transversality_det = {det!r}",
    ]
    if cfg.model.delta is not None:
        star = model.interior_equilibrium(p)
        if star is not None and star[0] > good[1].u:
            ok = manifold.dulac_region_check(p, good, cfg.analyze.dulac_samples)
            lines.append(f"dulac_no_cycles_right_of_Q = {ok}")
    return lines


def cmd_simulate(cfg: RunConfig, out: Path) -> list[str]:
    p = cfg.params()
    s = cfg.simulate
    for name in ("u0", "v0"):
        val = getattr(s, name)
        if val is None:
            raise ValidationError(f"missing required option '{name}' in [simulate]", field=name)
        if not (math.isfinite(val) and val >= 0):
            raise ValidationError(f"{name} must be non-negative, got {val}", field=name)
    ctl = dynamics.IntegratorControls(rtol=s.rtol, atol=s.atol, method=s.method)
    orbit = dynamics.integrate(p, (s.u0, s.v0), s.t_end, ctl)
    path = out / "orbit.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    orbit.to_csv(path, [f"config-hash: {cfg.hash()}"])
    lines = [f"orbit_file = {path}", f"samples = {len(orbit.t)}", f"final = ({float(orbit.u[-1])!r}, {float(orbit.v[-1])!r})"]
    if s.detect_cycle and model.interior_equilibrium(p) is not None:
        try:
            cyc = dynamics.poincare_cycle(p, controls=ctl)
        except NumericalError as exc:
            lines.append(f"cycle = not found ({exc})")
            cyc = None
        else:
            if cyc is None:
                lines.append("cycle = none")
        if cyc is not None:
            folds = manifold.fold_points(p.theta, p.eta)
            cyc.kind = dynamics.classify_cycle(cyc, folds, p.epsilon)
            if cyc.kind == "relaxation":
                cyc.hausdorff_to_singular = dynamics.cycle_vs_singular(cyc, manifold.singular_orbit(p.theta, p.eta))
            dynamics.write_cycle(cyc, out / "cycle.txt", [f"config-hash: {cfg.hash()}"])
            lines += [f"cycle.{ln}" for ln in cyc.to_text().splitlines()]
    return lines


def cmd_sweep(cfg: RunConfig, out: Path) -> list[str]:
    p = cfg.params(need_delta=False)
    s = cfg.sweep
    if not s.step > 0:
        raise ValidationError("step must be positive", field="step")
    lines = []
    hi = s.delta_max
    thr = model.transcritical_threshold(p.eta)
    if hi >= thr:
        lines.append(f"warning = delta_max {hi} clamped to transcritical threshold {thr!r}")
        hi = thr * (1 - 1e-9)
    opts = bifurcation.SweepOptions(refine_levels=s.refine_levels, reverse_near_hopf=s.reverse_near_hopf)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        branch = bifurcation.sweep((s.delta_min, hi), s.step, p, opts)
    snl = None
    if s.locate_snl:
        try:
            snl = bifurcation.locate_snl(p)
        except ValidationError as exc:
            lines.append(f"delta_SNL = not applicable ({exc})")
    summary = bifurcation.threshold_summary(p, snl)
    csv_path, side = bifurcation.export_diagram(branch, out / "diagram.csv", summary, [f"config-hash: {cfg.hash()}"])
    lines += [f"diagram_file = {csv_path}", f"meta_file = {side}", f"rows = {len(branch.rows)}"]
    gaps = sum(1 for r in branch.rows if r.note)
    lines.append(f"gaps = {gaps}")
    for lo, hi in branch.cycle_intervals():
        lines.append(f"stable_cycle_branch = ({lo!r}, {hi!r})")
    lines += [f"{k} = {_fmt(v)}" for k, v in summary.items()]
    return lines


def cmd_singular_orbit(cfg: RunConfig, out: Path) -> list[str]:
    p = cfg.params(need_delta=False)
    orb = manifold.singular_orbit(p.theta, p.eta)
    path = out / "singular_orbit.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"# config-hash: {cfg.hash()}\n")
        fh.write("segment,u,v\n")
        for tag, pts in orb.segments(cfg.singular_orbit.points_per_segment):
            for u, v in pts:
                fh.write(f"{tag},{float(u)!r},{float(v)!r}\n")
    return [
        f"orbit_file = {path}",
        f"u_l = {orb.u_l!r}",
        f"u_r = {orb.u_r!r}",
        f"u_m = {orb.u_m!r}",
        f"u_M = {orb.u_M!r}",
    ]


COMMANDS = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "singular-orbit": cmd_singular_orbit,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        lines = COMMANDS[args.command](cfg, args.out)
        report = args.out / f"{args.command}.txt"
        _write(report, lines, cfg)
    except (ValidationError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, CanardkitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for ln in lines:
        print(ln)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
