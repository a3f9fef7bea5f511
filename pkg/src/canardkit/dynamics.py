"""Integration of the slow-fast system, limit-cycle detection and cycle geometry."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.integrate import RK45, solve_ivp
from scipy.spatial.distance import directed_hausdorff

from canardkit.errors import (
    IntegrationError,
    InvariantViolation,
    NoCycleError,
    SectionMissError,
    ValidationError,
)
from canardkit.manifold import FoldPoint, SingularOrbit
from canardkit.model import Params, interior_equilibrium, jacobian

CYCLE_TOL = 1e-8
MAX_RETURNS = 200
SMALL_CANARD_C = 5.0
EQUILIBRIUM_SNAP = 1e-5

Direction = Literal["forward", "reverse"]


@dataclass(frozen=True)
class IntegratorControls:
    rtol: float = 1e-9
    atol: float = 1e-12
    method: str = "LSODA"
    max_step: float = math.inf
    # boundedness guard: no state component may exceed this value
    bound: float = 1e3

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValidationError("tolerances must be positive", field="rtol")
        if not self.bound > 0:
            raise ValidationError("bound must be positive", field="bound")


@dataclass
class Orbit:
    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    params: Params
    meta: dict = field(default_factory=dict)

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack([self.t, self.u, self.v])

    @property
    def final(self) -> tuple[float, float]:
        return float(self.u[-1]), float(self.v[-1])

    def to_csv(self, path, header_lines: Sequence[str] = ()) -> None:
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            w.writerow(["t", "u", "v"])
            for row in self.samples:
                w.writerow([repr(float(x)) for x in row])


def _rhs(params: Params, sign: float = 1.0):
    th, eta, d, eps = params.theta, params.eta, params.delta, params.epsilon

    def f(t, s):
        u, v = s
        return [
            sign * (u * (1 - u) * (u + th) * (u * u + eta) - u * u * v),
            sign * eps * v * (u * u - d * (u * u + eta)),
        ]

    def jac(t, s):
        return sign * jacobian(s, params)

    return f, jac


def _check_invariants(y: np.ndarray, t: np.ndarray, positive: np.ndarray, bound: float) -> None:
    # components that start on an invariant axis stay there; all others must stay > 0
    for i, name in enumerate(("u", "v")):
        if positive[i]:
            bad = np.nonzero(y[i] <= 0)[0]
            if bad.size:
                k = bad[0]
                raise InvariantViolation(
                    f"positivity violated: {name}={y[i, k]:.3e} at t={t[k]:.6g}; tolerance too loose?"
                )
    bad = np.nonzero(np.abs(y) > bound)
    if bad[0].size:
        k = bad[1][0]
        raise InvariantViolation(f"boundedness violated at t={t[k]:.6g}: state exceeds {bound:g}")


def _validate_initial(initial) -> np.ndarray:
    y0 = np.asarray(initial, dtype=float)
    if y0.shape != (2,) or not np.all(np.isfinite(y0)):
        raise ValidationError("initial state must be a finite pair (u, v)", field="initial")
    if np.any(y0 < 0):
        raise ValidationError("initial state must be non-negative", field="initial")
    return y0


def integrate(
    params: Params,
    initial,
    t_end: float,
    controls: IntegratorControls = IntegratorControls(),
    t_eval: Optional[np.ndarray] = None,
    direction: Direction = "forward",
) -> Orbit:
    """Integrate from ``initial`` over [0, t_end].

    ``direction="reverse"`` integrates the time-reversed field -F, so
    repelling objects of the original flow become attracting.  Every
    accepted step is checked for positivity and boundedness.
    """
    y0 = _validate_initial(initial)
    if not t_end > 0:
        raise ValidationError("t_end must be positive", field="t_end")
    f, jac = _rhs(params, 1.0 if direction == "forward" else -1.0)
    kw = dict(jac=jac) if controls.method in ("LSODA", "Radau", "BDF") else {}
    sol = solve_ivp(
        f,
        (0.0, t_end),
        y0,
        method=controls.method,
        rtol=controls.rtol,
        atol=controls.atol,
        max_step=controls.max_step,
        **kw,
    )
    if sol.status != 0:
        raise IntegrationError(f"integration failed at t={sol.t[-1]:.6g}: {sol.message}")
    _check_invariants(sol.y, sol.t, y0 > 0, controls.bound)
    steps = np.diff(sol.t)
    meta = dict(
        method=controls.method,
        steps=int(steps.size),
        nfev=int(sol.nfev),
        min_step=float(steps.min()) if steps.size else 0.0,
        direction=direction,
    )
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        sol2 = solve_ivp(
            f, (0.0, t_end), y0, method=controls.method, rtol=controls.rtol, atol=controls.atol,
            t_eval=t_eval, **kw,
        )  # fmt: skip
        return Orbit(sol2.t, sol2.y[0], sol2.y[1], params, meta)
    return Orbit(sol.t, sol.y[0], sol.y[1], params, meta)


@dataclass
class BatchResult:
    final: np.ndarray
    state_min: np.ndarray
    state_max: np.ndarray
    violations: int
    steps: int


def _batch_rhs(y, params: Params):
    u, v = y[:, 0], y[:, 1]
    th, eta, d, eps = params.theta, params.eta, params.delta, params.epsilon
    out = np.empty_like(y)
    out[:, 0] = u * (1 - u) * (u + th) * (u * u + eta) - u * u * v
    out[:, 1] = eps * v * (u * u - d * (u * u + eta))
    return out


def integrate_batch(
    params: Params,
    starts: np.ndarray,
    t_end: float,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    bound: float = 1e3,
) -> BatchResult:
    """Vectorized Dormand-Prince 5(4) over many initial states.

    Each trajectory keeps its own step size.  Positivity and boundedness
    are checked after every accepted step; ``violations`` counts the
    trajectories that ever broke either.
    """
    A, B, E = RK45.A, RK45.B, RK45.E
    y = np.array(starts, dtype=float)
    if y.ndim != 2 or y.shape[1] != 2:
        raise ValidationError("starts must have shape (n, 2)", field="starts")
    n = y.shape[0]
    t = np.zeros(n)
    h = np.full(n, 1e-3)
    f = _batch_rhs(y, params)
    ymin, ymax = y.copy(), y.copy()
    bad = np.zeros(n, bool)
    active = np.ones(n, bool)
    steps = 0
    while active.any():
        idx = np.nonzero(active)[0]
        yy = y[idx]
        hh = np.minimum(h[idx], t_end - t[idx])[:, None]
        K = np.empty((7, idx.size, 2))
        K[0] = f[idx]
        for s in range(1, 6):
            K[s] = _batch_rhs(yy + hh * np.tensordot(A[s, :s], K[:s], axes=(0, 0)), params)
        ynew = yy + hh * np.tensordot(B, K[:6], axes=(0, 0))
        K[6] = _batch_rhs(ynew, params)
        err = hh * np.tensordot(E, K, axes=(0, 0))
        scale = atol + rtol * np.maximum(np.abs(yy), np.abs(ynew))
        en = np.sqrt(np.mean((err / scale) ** 2, axis=1))
        ok = en < 1
        with np.errstate(divide="ignore"):
            fac = np.where(en == 0, 10.0, np.clip(0.9 * en**-0.2, 0.2, 10.0))
        acc = idx[ok]
        y[acc] = ynew[ok]
        f[acc] = K[6][ok]
        t[acc] += hh[ok, 0]
        ymin[acc] = np.minimum(ymin[acc], ynew[ok])
        ymax[acc] = np.maximum(ymax[acc], ynew[ok])
        bad[acc] |= np.any(ynew[ok] <= 0, axis=1) | np.any(np.abs(ynew[ok]) > bound, axis=1)
        h[idx] = hh[:, 0] * np.where(ok, fac, np.minimum(fac, 1.0))
        if np.any(h[idx] < 1e-14 * np.maximum(1.0, t[idx])):
            raise IntegrationError("step size underflow in batch integration")
        active[idx] = t[idx] < t_end * (1 - 1e-14)
        steps += 1
    return BatchResult(y, ymin, ymax, int(bad.sum()), steps)


@dataclass
class CycleRecord:
    period: float
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    stability: Literal["stable", "unstable"]
    kind: Optional[str] = None
    hausdorff_to_singular: Optional[float] = None
    section_u: float = math.nan
    section_v: float = math.nan
    iterations: int = 0
    gaps: list = field(default_factory=list, repr=False)
    points: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def amplitude(self) -> float:
        return self.u_max - self.u_min

    def to_text(self) -> str:
        keys = ("period", "u_min", "u_max", "v_min", "v_max", "stability", "kind", "hausdorff_to_singular")
        return "".join(f"{k} = {getattr(self, k)}\n" for k in keys)


def poincare_cycle(
    params: Params,
    section: Optional[float] = None,
    direction: Direction = "forward",
    max_transient: int = MAX_RETURNS,
    start_u: Optional[float] = None,
    controls: IntegratorControls = IntegratorControls(),
    tol: float = CYCLE_TOL,
    max_return_time: Optional[float] = None,
    n_points: int = 4000,
    accelerate: bool = True,
) -> Optional[CycleRecord]:
    """Find a limit cycle as a fixed point of the return map to ``v = section``.

    The section is the horizontal line through the interior equilibrium
    by default, restricted to u < u*, where every orbit encircling E*
    crosses once per turn (downward in forward time, upward in reverse).
    Forward runs find stable cycles, reverse runs unstable ones.

    With ``accelerate`` a slowly converging sequence of hits (ratio of
    successive gaps steady above 0.5) is extrapolated by Aitken's delta
    squared, which keeps near-Hopf cycles within the iteration budget.

    Returns None when the iterates collapse onto E* or, in reverse time,
    escape towards the axes.  Raises NoCycleError when ``max_transient``
    returns are exhausted and SectionMissError when an orbit stops
    returning to the section for another reason.
    """
    star = interior_equilibrium(params)
    if star is None:
        return None
    us, vs = star
    v_sec = vs if section is None else float(section)
    sign = 1.0 if direction == "forward" else -1.0
    f, jac = _rhs(params, sign)
    kw = dict(jac=jac) if controls.method in ("LSODA", "Radau", "BDF") else {}
    if max_return_time is None:
        max_return_time = 100.0 / params.epsilon + 1000.0
    u = us - 0.05 * us if start_u is None else float(start_u)
    if not 0 < u < us:
        raise ValidationError("start_u must lie in (0, u*)", field="start_u")

    def crossing(t, s):
        return s[1] - v_sec

    crossing.direction = -sign
    crossing.terminal = True

    # u > 1 is never reached by a cycle; in reverse time it blows up in finite time
    def escaped(t, s):
        return min(s[0] - 1e-9, 1.5 - s[0], controls.bound - s[1])

    escaped.terminal = True

    def run(t0, y0, t1, events):
        sol = solve_ivp(
            f, (t0, t1), y0, method=controls.method, rtol=controls.rtol, atol=controls.atol,
            events=events, **kw,
        )  # fmt: skip
        if sol.status == -1:
            raise IntegrationError(f"integration failed at t={sol.t[-1]:.6g}: {sol.message}")
        return sol

    def one_return(u0):
        # leave the section without event detection, then wait for the next crossing
        t0, y0 = 0.0, [u0, v_sec]
        while True:
            sol = run(t0, y0, t0 + 1.0, None)
            t0, y0 = sol.t[-1], sol.y[:, -1]
            sol = run(t0, y0, max_return_time, (crossing, escaped))
            if sol.t_events[1].size:
                return None, None
            if sol.t_events[0].size:
                t0, y0 = float(sol.t_events[0][0]), sol.y_events[0][0]
                if y0[0] < us:
                    return float(y0[0]), t0
                continue
            end = sol.y[:, -1]
            if math.hypot(end[0] - us, end[1] - vs) < 1e-6:
                return "equilibrium", None
            raise SectionMissError(f"no return to v={v_sec:.6g} within t={max_return_time:g}")

    gaps = []
    hits = [u]
    period = None
    for it in range(1, max_transient + 1):
        nxt, period = one_return(u)
        if nxt is None:
            return None
        if nxt == "equilibrium" or abs(nxt - us) < 1e-7:
            return None
        gap = abs(nxt - u)
        gaps.append(gap)
        hits.append(nxt)
        u = nxt
        if gap < tol:
            break
        if accelerate and len(hits) >= 4:
            limit = _aitken(hits)
            if limit is not None:
                if abs(limit - us) < EQUILIBRIUM_SNAP:
                    return None
                if 0 < limit < us:
                    u = limit
                    hits = [u]
    else:
        raise NoCycleError(f"return map did not converge in {max_transient} iterations (last gap {gaps[-1]:.3e})")

    rec = _measure_cycle(f, kw, u, v_sec, period, controls, n_points)
    rec.stability = "stable" if direction == "forward" else "unstable"
    rec.section_u, rec.section_v, rec.iterations, rec.gaps = u, v_sec, it, gaps
    return rec


def _aitken(hits):
    x0, x1, x2 = hits[-3:]
    d1, d2 = x1 - x0, x2 - x1
    if d1 == 0 or d2 == 0:
        return None
    r = d2 / d1
    r_prev = (x1 - x0) / (x0 - hits[-4]) if x0 != hits[-4] else 0.0
    if not (0.5 < r < 1.0 and abs(r - r_prev) < 0.1 * r):
        return None
    return x2 + d2 * r / (1 - r)


def _measure_cycle(f, kw, u0, v0, period, controls, n_points) -> CycleRecord:
    def du(t, s):
        return f(t, s)[0]

    def dv(t, s):
        return f(t, s)[1]

    t_eval = np.linspace(0.0, period, n_points)
    sol = solve_ivp(
        f, (0.0, period), [u0, v0], method=controls.method, rtol=controls.rtol, atol=controls.atol,
        events=(du, dv), dense_output=True, **kw,
    )  # fmt: skip
    # solver steps cluster in the fast jumps; uniform samples cover the slow drift
    pts = np.vstack([sol.y.T, sol.sol(t_eval).T, *[e for e in sol.y_events if e.size]])
    u_ext = [u0, *sol.y_events[0][:, 0]] if sol.y_events[0].size else [u0]
    v_ext = [v0, *sol.y_events[1][:, 1]] if sol.y_events[1].size else [v0]
    u_all = np.concatenate([pts[:, 0], u_ext])
    v_all = np.concatenate([pts[:, 1], v_ext])
    return CycleRecord(
        period=float(period),
        u_min=float(u_all.min()),
        u_max=float(u_all.max()),
        v_min=float(v_all.min()),
        v_max=float(v_all.max()),
        stability="stable",
        points=pts,
    )


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.size == 0 or b.size == 0:
        raise ValidationError("Hausdorff distance needs non-empty point sets")
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def cycle_vs_singular(cycle, gamma0, n: int = 2000) -> float:
    """Discrete Hausdorff distance between a sampled cycle and the singular orbit."""
    pts = cycle.points if isinstance(cycle, CycleRecord) else cycle
    if pts is None:
        raise ValidationError("cycle carries no sample points")
    ref = gamma0.points(n) if isinstance(gamma0, SingularOrbit) else gamma0
    return hausdorff(pts, ref)


def classify_cycle(
    cycle: CycleRecord, folds: Sequence[FoldPoint], epsilon: float, C: float = SMALL_CANARD_C
) -> str:
    if cycle.amplitude < C * math.sqrt(epsilon):
        return "small-canard"
    if len(folds) == 2 and cycle.u_max > folds[1].u and cycle.u_min < folds[0].u:
        return "relaxation"
    return "canard"


def write_cycle(cycle: CycleRecord, path, header_lines: Sequence[str] = ()) -> None:
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write(cycle.to_text())
