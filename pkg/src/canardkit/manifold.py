"""Critical manifold v = phi(u), its fold points and the singular relaxation orbit."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from canardkit.errors import GeometryError, ValidationError
from canardkit.model import FOLD_TOL, Params, interior_equilibrium

DEGENERATE_FOLD_TOL = 1e-8
ROOT_RESIDUAL_TOL = 1e-10


def phi(u, theta, eta):
    """Graph of the nontrivial critical manifold M20."""
    return (1.0 - u) * (u + theta) * (u * u + eta) / u


def dphi(u, theta, eta):
    return -fold_quartic(u, theta, eta) / (u * u)


def d2phi(u, theta, eta):
    # phi' = -F/u^2  =>  phi'' = (2F - u F')/u^3
    return (2.0 * fold_quartic(u, theta, eta) - u * fold_quartic_prime(u, theta, eta)) / u**3


def quartic_coefficients(theta, eta) -> np.ndarray:
    """Coefficients (highest power first) of F(u) = -u^2 phi'(u)."""
    return np.array([3.0, -2.0 * (1.0 - theta), -(theta - eta), 0.0, eta * theta])


def fold_quartic(u, theta, eta):
    return 3 * u**4 - 2 * (1 - theta) * u**3 - (theta - eta) * u**2 + eta * theta


def fold_quartic_prime(u, theta, eta):
    return 12 * u**3 - 6 * (1 - theta) * u**2 - 2 * (theta - eta) * u


def gamma_cap(theta, eta):
    return 9 * theta**2 + 6 * theta + 9 - 24 * eta


def lambda1(theta, eta):
    return eta / 8 * (theta**2 + 22 / 3 * theta + 1) - (3 * (1 + theta**4) + 2 * (theta**2 + 4 * eta**2)) / 96


def lambda2(theta, eta):
    return (1 - theta) / 288 * (3 * theta**2 + 2 * theta + 3 - 8 * eta)


@dataclass(frozen=True)
class FoldPoint:
    u: float
    v: float
    kind: Literal["min", "max", "inflection"]
    degenerate: bool = False

    @property
    def label(self) -> str:
        return {"min": "P", "max": "Q"}.get(self.kind, "?")


@dataclass(frozen=True)
class ManifoldGeometry:
    """Closed-form quantities of the critical manifold for fixed (theta, eta)."""

    theta: float
    eta: float
    folds: tuple[FoldPoint, ...]

    def phi(self, u):
        return phi(u, self.theta, self.eta)

    def F(self, u):
        return fold_quartic(u, self.theta, self.eta)

    @property
    def gamma_cap(self) -> float:
        return gamma_cap(self.theta, self.eta)

    @property
    def lambda1(self) -> float:
        return lambda1(self.theta, self.eta)

    @property
    def lambda2(self) -> float:
        return lambda2(self.theta, self.eta)

    @property
    def F0(self) -> float:
        return self.eta * self.theta

    @property
    def F1(self) -> float:
        return (1 + self.theta) * (1 + self.eta)

    @property
    def branches(self) -> dict[str, tuple[float, float]]:
        if len(self.folds) != 2:
            return {}
        um, uM = self.folds[0].u, self.folds[1].u
        return {"S0^l": (0.0, um), "S0^m": (um, uM), "S0^r": (uM, 1.0)}

    # the trivial manifold M10 is the line u = 0
    trivial_manifold: float = field(default=0.0, init=False)


def geometry(theta: float, eta: float) -> ManifoldGeometry:
    return ManifoldGeometry(theta, eta, tuple(fold_points(theta, eta)))


def _newton_polish(u, theta, eta, iters=8):
    for _ in range(iters):
        d = fold_quartic_prime(u, theta, eta)
        if d == 0:
            break
        step = fold_quartic(u, theta, eta) / d
        u -= step
        if abs(step) < 1e-16:
            break
    return u


def fold_points(theta: float, eta: float) -> list[FoldPoint]:
    """Roots of F in (0, 1) paired with v = phi(u), sorted by u.

    Candidates come from the companion-matrix eigenvalues of F; each real
    candidate in (0, 1) is polished by Newton.  A root with
    ``|F'(u)| < 1e-8`` is flagged degenerate (a fold pair about to merge).
    """
    if theta <= 0 or eta <= 0:
        raise ValidationError("theta and eta must be positive")
    roots = np.roots(quartic_coefficients(theta, eta))
    found: list[float] = []
    for r in roots:
        # near-double roots can pick up a small spurious imaginary part
        if abs(r.imag) > 1e-6 or not (0.0 < r.real < 1.0):
            continue
        u = _newton_polish(float(r.real), theta, eta)
        if not (0.0 < u < 1.0) or abs(fold_quartic(u, theta, eta)) > 1e-10:
            continue
        if all(abs(u - w) > 1e-9 for w in found):
            found.append(u)
    found.sort()
    out = []
    for u in found:
        degenerate = abs(fold_quartic_prime(u, theta, eta)) < DEGENERATE_FOLD_TOL
        curv = d2phi(u, theta, eta)
        kind = "inflection" if degenerate else ("min" if curv > 0 else "max")
        out.append(FoldPoint(u, phi(u, theta, eta), kind, degenerate))
    return out


def count_sign_changes(theta, eta, step=1e-5) -> int:
    """Brute-force count of sign changes of F on a uniform grid over (0, 1)."""
    u = np.arange(step, 1.0, step)
    s = np.sign(fold_quartic(u, theta, eta))
    s = s[s != 0]
    return int(np.count_nonzero(np.diff(s)))


Region = Literal["R1", "R2", "R3", "two-folds-outside-closed-forms", "fewer-than-two-folds"]


def closed_form_region(theta: float, eta: float) -> Optional[str]:
    """Evaluate the printed R1/R2/R3 membership tests; None if none applies."""
    G = gamma_cap(theta, eta)
    if G <= 0:
        return None
    sg = math.sqrt(G)
    l1, l2 = lambda1(theta, eta), lambda2(theta, eta)
    ratio2 = (l1 / l2) ** 2 if l2 != 0 else math.inf
    if 0 < eta < theta <= 1 and sg / 3 - 3 < theta < 1 + sg / 3 and G > ratio2:
        return "R1"
    if 0 < eta < 1 < theta and sg / 3 - 3 < theta < 1 + sg / 3 and G < ratio2:
        return "R2"
    if 0 < theta < 1 < eta and sg / 3 - 3 < theta < 1 and G > ratio2:
        return "R3"
    return None


def classify_region(theta: float, eta: float) -> Region:
    """Region tag for (theta, eta).

    The numeric root count of F is authoritative.  A closed-form tag is
    returned only when its test fires and the count confirms two folds.
    """
    if gamma_cap(theta, eta) <= 0:
        return "fewer-than-two-folds"
    n = len([fp for fp in fold_points(theta, eta) if not fp.degenerate])
    region = closed_form_region(theta, eta)
    if n == 2:
        return region or "two-folds-outside-closed-forms"
    return "fewer-than-two-folds"


def branch_of(u: float, folds: Sequence[FoldPoint]) -> str:
    if len(folds) != 2:
        raise GeometryError(f"branch classification needs exactly two folds, got {len(folds)}")
    um, uM = folds[0].u, folds[1].u
    if abs(u - um) < FOLD_TOL or abs(u - uM) < FOLD_TOL:
        return "fold"
    if u < um:
        return "S0^l"
    if u < uM:
        return "S0^m"
    return "S0^r"


def _require_two_folds(theta, eta, folds=None, what="singular orbit") -> tuple[FoldPoint, FoldPoint]:
    if folds is None:
        folds = fold_points(theta, eta)
    folds = list(folds)
    if len(folds) != 2 or any(fp.degenerate for fp in folds):
        raise GeometryError(f"{what} undefined: need exactly two non-degenerate folds")
    return folds[0], folds[1]


@dataclass(frozen=True)
class SingularOrbit:
    """Closed singular loop: fast jump l1, slow c_r, fast jump l2, slow c_l."""

    theta: float
    eta: float
    u_m: float
    v_m: float
    u_M: float
    v_M: float
    u_l: float
    u_r: float

    def segments(self, n: int = 200) -> list[tuple[str, np.ndarray]]:
        """The four pieces as (tag, points) with points of shape (n, 2)."""
        th, eta = self.theta, self.eta
        l1 = np.column_stack([np.linspace(self.u_m, self.u_r, n), np.full(n, self.v_m)])
        ur = np.linspace(self.u_r, self.u_M, n)
        c_r = np.column_stack([ur, phi(ur, th, eta)])
        c_r[0, 1], c_r[-1, 1] = self.v_m, self.v_M
        l2 = np.column_stack([np.linspace(self.u_M, self.u_l, n), np.full(n, self.v_M)])
        ul = np.linspace(self.u_l, self.u_m, n)
        c_l = np.column_stack([ul, phi(ul, th, eta)])
        c_l[0, 1], c_l[-1, 1] = self.v_M, self.v_m
        return [("l1", l1), ("c_r", c_r), ("l2", l2), ("c_l", c_l)]

    def points(self, n: int = 200) -> np.ndarray:
        return np.vstack([p for _, p in self.segments(n)])


def singular_orbit(theta: float, eta: float, folds: Optional[Sequence[FoldPoint]] = None) -> SingularOrbit:
    P, Q = _require_two_folds(theta, eta, folds)
    f = lambda u, v: phi(u, theta, eta) - v
    try:
        u_l = brentq(f, 1e-14, P.u, args=(Q.v,), xtol=1e-15)
        u_r = brentq(f, Q.u, 1.0 - 1e-15, args=(P.v,), xtol=1e-15)
    except ValueError as exc:
        raise GeometryError(f"landing point bracket failed: {exc}") from exc
    for u, v in ((u_l, Q.v), (u_r, P.v)):
        if abs(phi(u, theta, eta) - v) > ROOT_RESIDUAL_TOL:
            raise GeometryError("landing point residual too large")
    return SingularOrbit(theta, eta, P.u, P.v, Q.u, Q.v, u_l, u_r)


def slow_flow(u: float, params: Params, folds: Optional[Sequence[FoldPoint]] = None) -> float:
    """du/dtau of the reduced flow on M20 (slow time tau = epsilon t)."""
    th, eta = params.theta, params.eta
    if folds is None:
        folds = fold_points(th, eta)
    for fp in folds:
        if abs(u - fp.u) < FOLD_TOL:
            raise GeometryError(f"u={u} lies within {FOLD_TOL} of a fold; the reduced flow is singular")
    v = phi(u, th, eta)
    g = (u * u - params.delta * (u * u + eta)) * v
    return g / dphi(u, th, eta)


def dulac_region_check(
    params: Params,
    folds: Sequence[FoldPoint],
    n_samples: int = 10_000,
    u_range: Optional[tuple[float, float]] = None,
) -> bool:
    """True iff phi' < 0 at every sample of the region right of fold Q.

    With the Dulac weight 1/(u^2 v) the divergence of the vector field is
    phi'(u), so a negative sign rules out periodic orbits in u > u_M.  The
    default samples the open interval (u_M, 1); an explicit ``u_range`` is
    sampled including its endpoints.
    """
    if n_samples <= 0:
        raise ValidationError("n_samples must be positive", field="n_samples")
    _, Q = _require_two_folds(params.theta, params.eta, folds, "Dulac region")
    star = interior_equilibrium(params)
    if star is None or star[0] <= Q.u:
        raise ValidationError("Dulac check requires an interior equilibrium with u* > u_M")
    if u_range is None:
        u = np.linspace(Q.u, 1.0, n_samples + 2)[1:-1]
    else:
        u = np.linspace(u_range[0], u_range[1], n_samples)
    d = -fold_quartic(u, params.theta, params.eta) / (u * u)
    return bool(np.all(d < 0))


def export_manifold_csv(path, theta: float, eta: float, n: int = 1000) -> None:
    """Write (u, phi(u), branch) samples on (0, 1) for plotting."""
    folds = fold_points(theta, eta)
    u = np.linspace(0, 1, n + 2)[1:-1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "phi", "branch"])
        for x in u:
            tag = branch_of(x, folds) if len(folds) == 2 else ""
            w.writerow([repr(float(x)), repr(float(phi(x, theta, eta))), tag])
