"""One-parameter sweeps in delta: Hopf points, cycle branches and the fold of cycles."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from canardkit.dynamics import IntegratorControls, classify_cycle, poincare_cycle
from canardkit.errors import CanardkitError, GeometryError, NumericalError, ValidationError
from canardkit.manifold import fold_points, phi
from canardkit.model import Params, equilibria, equilibrium_delta, interior_equilibrium, transcritical_threshold
from canardkit.normalform import expansion_at

RESOLUTION = 1e-6


@dataclass
class DiagramRow:
    delta: float
    u_eq: Optional[float]
    eq_stability: Optional[str]
    eq_branch: Optional[str] = None
    u_cycle_min: Optional[float] = None
    u_cycle_max: Optional[float] = None
    cycle_stability: Optional[str] = None
    cycle_kind: Optional[str] = None
    note: str = ""

    @property
    def has_cycle(self) -> bool:
        return self.u_cycle_min is not None


@dataclass
class DiagramBranch:
    rows: list
    meta: dict = field(default_factory=dict)

    def stable_cycle_deltas(self) -> list[float]:
        return [r.delta for r in self.rows if r.cycle_stability == "stable"]

    def cycle_intervals(self) -> list[tuple[float, float]]:
        """Estimated (start, end) of each maximal run of stable-cycle rows.

        Each end is the midpoint between the last row with a stable cycle
        and the neighbouring row without one.
        """
        rows = [r for r in self.rows if r.cycle_stability != "unstable"]
        flags = [r.cycle_stability == "stable" for r in rows]
        out = []
        i = 0
        while i < len(rows):
            if not flags[i]:
                i += 1
                continue
            j = i
            while j + 1 < len(rows) and flags[j + 1]:
                j += 1
            lo = rows[i].delta if i == 0 else 0.5 * (rows[i - 1].delta + rows[i].delta)
            hi = rows[j].delta if j == len(rows) - 1 else 0.5 * (rows[j].delta + rows[j + 1].delta)
            out.append((lo, hi))
            i = j + 1
        return out


@dataclass(frozen=True)
class SweepOptions:
    refine_levels: int = 10
    reverse_near_hopf: bool = False
    reverse_window: float = 1e-3
    controls: IntegratorControls = IntegratorControls()
    seed: bool = True


def hopf_deltas(theta: float, eta: float) -> dict[str, float]:
    """Closed-form delta_H at each fold: u_fold^2 / (u_fold^2 + eta)."""
    folds = fold_points(theta, eta)
    labels = ("P", "Q") if len(folds) == 2 else tuple(f"F{i}" for i in range(len(folds)))
    return {lab: equilibrium_delta(fp.u, eta) for lab, fp in zip(labels, folds)}


def locate_hopf(base: Params, bracket: tuple[float, float], fold: Literal["P", "Q"] = "P") -> float:
    """Root of u*(delta) = u_fold inside ``bracket``."""
    folds = fold_points(base.theta, base.eta)
    if len(folds) != 2:
        raise GeometryError("Hopf location needs two folds")
    uf = folds[0].u if fold == "P" else folds[1].u
    thr = transcritical_threshold(base.eta)
    lo, hi = bracket
    if not (0 < lo < hi < thr):
        raise ValidationError(f"bracket must satisfy 0 < lo < hi < {thr}", field="bracket")

    def g(d):
        return math.sqrt(d * base.eta / (1 - d)) - uf

    if g(lo) * g(hi) > 0:
        raise NumericalError(f"bracket {bracket} does not contain the fold crossing")
    return brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)


def _grid(lo, hi, step, hopf: Sequence[float], levels: int) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9))
    pts = set(np.round(lo + step * np.arange(n + 1), 12))
    pts.add(hi)
    for dh in hopf:
        if lo < dh < hi:
            for k in range(1, levels + 1):
                d = step * 0.5**k
                for x in (dh - d, dh + d):
                    if lo <= x <= hi:
                        pts.add(float(x))
    return np.array(sorted(pts))


def _left_start(params: Params, folds) -> Optional[float]:
    """Section point well outside any cycle: half the left-branch abscissa at v*."""
    star = interior_equilibrium(params)
    if star is None or len(folds) != 2:
        return None
    um = folds[0].u
    vs = star[1]
    f = lambda u: phi(u, params.theta, params.eta) - vs
    if f(um) >= 0 or star[0] <= um:
        return None
    return 0.5 * brentq(f, 1e-12, um)


def sweep(
    delta_range: tuple[float, float],
    step: float,
    base: Params,
    options: SweepOptions = SweepOptions(),
) -> DiagramBranch:
    """Equilibrium and cycle data on a delta grid refined near both Hopf points."""
    if not step > 0:
        raise ValidationError("step must be positive", field="step")
    lo, hi = delta_range
    thr = transcritical_threshold(base.eta)
    if lo <= 0 or hi <= lo:
        raise ValidationError("delta range must satisfy 0 < lo < hi", field="delta_range")
    if hi >= thr:
        warnings.warn(f"delta range clamped to the transcritical threshold {thr:.6f}", stacklevel=2)
        hi = thr * (1 - 1e-9)
    hopf = hopf_deltas(base.theta, base.eta)
    grid = _grid(lo, hi, step, list(hopf.values()), options.refine_levels)
    folds = fold_points(base.theta, base.eta)
    rows = []
    seed_u = None
    for d in grid:
        p = base.replace(delta=float(d))
        star = [e for e in equilibria(p) if e.kind == "E*"]
        row = DiagramRow(float(d), None, None)
        if star:
            row.u_eq, row.eq_stability, row.eq_branch = star[0].u, star[0].stability, star[0].branch
        try:
            start = seed_u if (options.seed and seed_u is not None and row.u_eq and seed_u < row.u_eq) else None
            cyc = poincare_cycle(p, start_u=start, controls=options.controls)
        except CanardkitError as exc:
            cyc = None
            row.note = f"gap: {type(exc).__name__}"
        if cyc is not None:
            row.u_cycle_min, row.u_cycle_max = cyc.u_min, cyc.u_max
            row.cycle_stability = "stable"
            row.cycle_kind = classify_cycle(cyc, folds, base.epsilon)
            seed_u = cyc.section_u
        else:
            seed_u = None
        rows.append(row)
        if options.reverse_near_hopf and star and any(abs(d - h) < options.reverse_window for h in hopf.values()):
            try:
                rc = poincare_cycle(p, direction="reverse", controls=options.controls)
            except CanardkitError:
                rc = None
            if rc is not None:
                rows.append(
                    DiagramRow(
                        float(d), row.u_eq, row.eq_stability, row.eq_branch, rc.u_min, rc.u_max,
                        "unstable", classify_cycle(rc, folds, base.epsilon),
                    )
                )  # fmt: skip
    meta = dict(
        delta_lo=lo,
        delta_hi=hi,
        step=step,
        refine_levels=options.refine_levels,
        epsilon=base.epsilon,
        theta=base.theta,
        eta=base.eta,
        rtol=options.controls.rtol,
        atol=options.controls.atol,
    )
    for lab, dh in hopf.items():
        meta[f"delta_H_{lab}"] = dh
    return DiagramBranch(rows, meta)


@dataclass(frozen=True)
class SNLResult:
    verdict: Literal["located", "below-resolution"]
    delta_snl: Optional[float]
    delta_h: float
    bracket: Optional[tuple[float, float]]
    evaluations: int

    def __str__(self):
        if self.verdict == "located":
            return f"{self.delta_snl!r}"
        return "below-resolution"


def cycle_count(params: Params, controls: IntegratorControls = IntegratorControls()) -> int:
    """Number of cycles found: unstable (reverse time from E*) plus stable (forward from outside)."""
    folds = fold_points(params.theta, params.eta)
    n = 0
    try:
        if poincare_cycle(params, direction="reverse", controls=controls) is not None:
            n += 1
    except CanardkitError:
        pass
    start = _left_start(params, folds)
    try:
        if poincare_cycle(params, start_u=start, controls=controls) is not None:
            n += 1
    except CanardkitError:
        pass
    return n


def locate_snl(
    base: Params,
    theta: Optional[float] = None,
    bracket: Optional[tuple[float, float]] = None,
    epsilon: Optional[float] = None,
    resolution: float = RESOLUTION,
    tol: float = 1e-12,
    controls: IntegratorControls = IntegratorControls(),
) -> SNLResult:
    """Saddle-node of cycles below the subcritical Hopf point at fold P.

    The distance below delta_H is halved from the bracket width until
    two cycles coexist; the crossover from two to fewer cycles is then
    bisected.  When no two-cycle point is seen down to ``resolution``
    the window is reported as below resolution.
    """
    p = base.replace(**{k: v for k, v in (("theta", theta), ("epsilon", epsilon)) if v is not None})
    exp = expansion_at(p.theta, p.eta, "P")
    if exp.A <= 0:
        raise ValidationError(f"locate_snl needs a subcritical Hopf point (A > 0), got A={exp.A:.4g}", field="theta")
    dh = exp.delta_star
    if bracket is None:
        bracket = (max(dh - 0.05, 1e-6), dh)
    lo, hi = bracket
    if not lo < dh or hi > dh + 1e-15:
        raise ValidationError("bracket must lie below delta_H", field="bracket")
    count = lambda d: cycle_count(p.replace(delta=d), controls)
    evals = 0
    d = dh - lo
    outside = None
    inside = None
    while d >= resolution:
        evals += 1
        if count(dh - d) >= 2:
            inside = dh - d
            break
        outside = dh - d
        d *= 0.5
    if inside is None:
        return SNLResult("below-resolution", None, dh, None, evals)
    if outside is None:
        # the bracket's lower end already has two cycles
        return SNLResult("located", lo, dh, (lo, lo), evals)
    a, b = outside, inside
    while b - a > tol:
        mid = 0.5 * (a + b)
        evals += 1
        if count(mid) >= 2:
            b = mid
        else:
            a = mid
        if b - a <= max(tol, 4 * np.finfo(float).eps * b):
            break
    return SNLResult("located", 0.5 * (a + b), dh, (a, b), evals)


_ROW_FIELDS = [f.name for f in fields(DiagramRow)]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def export_diagram(
    branch: DiagramBranch,
    path,
    thresholds: Optional[dict] = None,
    header_lines: Sequence[str] = (),
) -> tuple[Path, Path]:
    """Write the rows as CSV and a ``.meta.txt`` sidecar with configuration and thresholds."""
    if not branch.rows:
        raise ValidationError("cannot export an empty branch")
    path = Path(path)
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(_ROW_FIELDS)
        for r in branch.rows:
            w.writerow([_fmt(getattr(r, k)) for k in _ROW_FIELDS])
    side = path.with_suffix(".meta.txt")
    with open(side, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        for k, v in branch.meta.items():
            fh.write(f"{k} = {_fmt(v)}\n")
        for k, v in (thresholds or {}).items():
            fh.write(f"{k} = {_fmt(v)}\n")
    return path, side


def _parse(name, text):
    if text == "":
        return None
    if name in ("delta", "u_eq", "u_cycle_min", "u_cycle_max"):
        return float(text)
    return text


def read_diagram(path) -> DiagramBranch:
    path = Path(path)
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    rows = []
    for rec in reader:
        vals = {k: _parse(k, rec[k]) for k in _ROW_FIELDS}
        if vals["note"] is None:
            vals["note"] = ""
        rows.append(DiagramRow(**vals))
    meta = {}
    side = path.with_suffix(".meta.txt")
    if side.exists():
        for ln in side.read_text().splitlines():
            if ln.startswith("#") or " = " not in ln:
                continue
            k, v = ln.split(" = ", 1)
            try:
                meta[k] = float(v) if k != "refine_levels" else int(v)
            except ValueError:
                meta[k] = v
    return DiagramBranch(rows, meta)


def threshold_summary(base: Params, snl: Optional[SNLResult] = None) -> dict:
    """delta_H at both folds, A at both folds, theta_B, B and the delta_SNL verdict."""
    from canardkit.normalform import B_printed, bautin_locus

    out: dict = {}
    for lab in ("P", "Q"):
        try:
            e = expansion_at(base.theta, base.eta, lab)
        except CanardkitError:
            continue
        out[f"delta_H_{lab}"] = e.delta_star
        out[f"A_{lab}"] = e.A
    try:
        tb = bautin_locus(base.eta)
        out["theta_B"] = tb
        out["B"] = B_printed(expansion_at(tb, base.eta, "P"))
    except CanardkitError:
        pass
    if snl is not None:
        out["delta_SNL"] = str(snl)
    return out


def row_dicts(branch: DiagramBranch) -> list[dict]:
    return [asdict(r) for r in branch.rows]
