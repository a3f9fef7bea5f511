"""Acceptance gate: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from _oracles import richardson_derivative  # noqa: E402
from canardkit.bifurcation import SweepOptions, hopf_deltas, locate_snl, sweep  # noqa: E402
from canardkit.dynamics import cycle_vs_singular, integrate, integrate_batch, poincare_cycle  # noqa: E402
from canardkit.manifold import dulac_region_check, fold_points, singular_orbit  # noqa: E402
from canardkit.model import Params, interior_equilibrium, vector_field  # noqa: E402
from canardkit.normalform import (  # noqa: E402
    B_printed,
    bautin_locus,
    blowup_chart,
    canard_delta,
    expansion_at,
    first_lyapunov,
    first_lyapunov_pipeline,
    g_coefficients,
    h_and_c,
    l2_compact,
)

THETA, ETA, EPS = 0.05, 0.176, 0.005


def _rel(a, b):
    return abs(a - b) / abs(b)


def _two_fold_pairs(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        th, eta = rng.uniform(0.005, 0.5), rng.uniform(0.01, 0.6)
        fps = fold_points(th, eta)
        if len(fps) == 2 and not any(f.degenerate for f in fps) and fps[1].u - fps[0].u > 1e-3:
            out.append((th, eta))
    return out


def c01_folds():
    P, Q = fold_points(THETA, ETA)
    err = max(abs(P.u - 0.2375), abs(P.v - 0.2145), abs(Q.u - 0.5359), abs(Q.v - 0.235))
    return err <= 5e-4, f"P=({P.u:.6f}, {P.v:.6f}) Q=({Q.u:.6f}, {Q.v:.6f}) max dev {err:.1e}"


def c02_delta_star():
    ds = canard_delta(fold_points(THETA, ETA)[0].u, ETA)
    return abs(ds - 0.2426879409) <= 1e-6, f"delta*={ds:.12f}"


def c03_first_lyapunov_A():
    aP = expansion_at(THETA, ETA, "P").A
    aQ = expansion_at(THETA, ETA, "Q").A
    ok = _rel(aP, 2.796e-7) <= 0.05 and abs(aQ + 0.1055) <= 1e-3
    return ok, f"A(P)={aP:.4e} A(Q)={aQ:.5f}"


def c04_second_lyapunov_B():
    tb = bautin_locus(ETA)
    e = expansion_at(tb, ETA, "P")
    B = B_printed(e)
    return _rel(B, -0.004) <= 0.15, f"theta_B={tb:.9f} delta_H={e.delta_star:.9f} B={B:.6f}"


def c05_dual_paths():
    rng = np.random.default_rng(21)
    worst1 = 0.0
    pairs = _two_fold_pairs(24, seed=21)
    for th, eta in pairs:
        e = expansion_at(th, eta, "P")
        eps = rng.uniform(1e-4, 0.05)
        worst1 = max(worst1, _rel(first_lyapunov_pipeline(e, eps), first_lyapunov(e, eps)[0]))
    worst2, n2 = 0.0, 0
    while n2 < 24:
        eta = rng.uniform(0.02, 0.3)
        e = expansion_at(bautin_locus(eta), eta, "P")
        nf = h_and_c(g_coefficients(blowup_chart(e, rng.uniform(1e-4, 0.05))))
        worst2 = max(worst2, _rel(nf.c2.real / nf.beta, l2_compact(nf)))
        n2 += 1
    ok = worst1 <= 1e-8 and worst2 <= 1e-8
    return ok, f"L1 worst rel {worst1:.1e} over {len(pairs)}; L2 worst rel {worst2:.1e} over {n2}"


A_ORDERS = {"a10": (1, 0), "a01": (0, 1), "a20": (2, 0), "a11": (1, 1), "a30": (3, 0), "a21": (2, 1),
            "a40": (4, 0), "a50": (5, 0)}  # fmt: skip
B_ORDERS = {"b10": (1, 0), "b01": (0, 1), "b20": (2, 0), "b11": (1, 1), "b21": (2, 1)}
STEPS = {1: 1e-5, 2: 1e-3, 3: 1e-2, 4: 3e-2, 5: 5e-2}


def c06_coefficient_oracle():
    worst, n = 0.0, 0
    for th, eta in _two_fold_pairs(12, seed=6):
        for which in ("P", "Q"):
            e = expansion_at(th, eta, which)
            p = Params(e.delta_star, th, eta, 0.05)
            x0 = np.array([e.u_m, e.v_m])
            f = lambda u, v: vector_field((u, v), p)[0]
            g = lambda u, v: vector_field((u, v), p)[1] / p.epsilon
            for fun, orders in ((f, A_ORDERS), (g, B_ORDERS)):
                for name, order in orders.items():
                    ref = richardson_derivative(fun, x0, order, STEPS[sum(order)])
                    val = getattr(e, name)
                    if val == 0.0:
                        if abs(ref) > 1e-9:
                            return False, f"{name} vanishes in closed form but fd gives {ref:.2e}"
                    else:
                        worst = max(worst, _rel(val, ref))
            n += 1
    return n >= 20 and worst <= 1e-6, f"{n} canard points, worst rel {worst:.1e}"


def c07_diagram():
    base = Params(0.4, THETA, ETA, EPS)
    br = sweep((0.2, 0.7), 0.01, base, SweepOptions())
    iv = br.cycle_intervals()
    if len(iv) != 1:
        return False, f"expected one stable-cycle interval, got {iv}"
    lo, hi = iv[0]
    h = hopf_deltas(THETA, ETA)
    outside_ok = all(
        r.eq_stability == "stable focus/node" and not r.has_cycle for r in br.rows if r.delta < h["P"] or r.delta > h["Q"]
    )
    inside_ok = all(r.eq_stability == "unstable" for r in br.rows if lo < r.delta < hi)
    gaps = sum(1 for r in br.rows if r.note)
    ok = abs(lo - 0.24268) <= 2e-3 and abs(hi - 0.62) <= 2e-3 and outside_ok and inside_ok
    return ok, f"branch ({lo:.6f}, {hi:.6f}), {len(br.rows)} rows, {gaps} gap rows, E* stable outside: {outside_ok}"


def c08_relaxation_convergence():
    g0 = singular_orbit(THETA, ETA)
    d = []
    for eps in (0.01, 0.005, 0.001):
        cyc = poincare_cycle(Params(0.4, THETA, ETA, eps))
        if cyc is None:
            return False, f"no cycle at epsilon={eps}"
        d.append(cycle_vs_singular(cyc, g0))
    ok = d[0] > d[1] > d[2]
    return ok, "Hausdorff " + ", ".join(f"{x:.5f}" for x in d)


def c09_global_stability():
    p = Params(0.7, THETA, ETA, EPS)
    us, vs = interior_equilibrium(p)
    rng = np.random.default_rng(9)
    worst = 0.0
    for x0 in rng.uniform(1e-3, 2.0, (100, 2)):
        orb = integrate(p, x0, 1e5)
        worst = max(worst, abs(orb.u[-1] - us), abs(orb.v[-1] - vs))
    dulac = dulac_region_check(p, fold_points(THETA, ETA))
    return worst <= 1e-4 and dulac, f"worst distance {worst:.1e} over 100 starts, Dulac check {dulac}"


def c10_snl():
    base = Params(0.2, THETA, ETA, EPS)
    near = locate_snl(base, theta=THETA)
    far = locate_snl(base, theta=0.02)
    ok = near.verdict == "below-resolution" and far.verdict == "located" and far.delta_snl < far.delta_h
    return ok, (
        f"theta=0.05: {near.verdict}; theta=0.02: delta_SNL={far.delta_snl!r} < delta_H={far.delta_h!r}"
    )


def c11_positivity():
    p = Params(0.4, THETA, ETA, EPS)
    starts = np.random.default_rng(11).uniform(1e-3, 2.0, (10_000, 2))
    res = integrate_batch(p, starts, 1e4)
    ok = res.violations == 0 and res.state_min.min() > 0
    return ok, f"{res.violations} violations, min state {res.state_min.min():.2e}, max {res.state_max.max():.3f}"


CRITERIA = [
    (1, "fold points", 1, c01_folds),
    (2, "canard threshold", 1, c02_delta_star),
    (3, "first Lyapunov leading coefficient", 1, c03_first_lyapunov_A),
    (4, "second Lyapunov leading coefficient", 1, c04_second_lyapunov_B),
    (5, "dual-path identities", 10, c05_dual_paths),
    (6, "coefficient oracle", 10, c06_coefficient_oracle),
    (7, "bifurcation diagram structure", 300, c07_diagram),
    (8, "relaxation convergence", 120, c08_relaxation_convergence),
    (9, "global stability regime", 120, c09_global_stability),
    (10, "saddle-node of cycles", 300, c10_snl),
    (11, "positivity and boundedness", 300, c11_positivity),
]


def run(num, title, budget, fn):
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure, reported like one
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    dt = time.perf_counter() - t0
    ok = ok and dt < budget
    line = f"{'PASS' if ok else 'FAIL'} {num:2d} {title}: {detail} [{dt:.2f} s / {budget} s]"
    return ok, line


@pytest.mark.slow
@pytest.mark.parametrize("num,title,budget,fn", CRITERIA, ids=[f"c{c[0]:02d}" for c in CRITERIA])
def test_criterion(num, title, budget, fn):
    from conftest import ACCEPTANCE_LINES

    ok, line = run(num, title, budget, fn)
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [run(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
