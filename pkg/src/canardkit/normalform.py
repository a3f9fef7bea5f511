"""Canard-point expansion, blow-up chart K2 and Lyapunov coefficients.

The pipeline is::

    fold point --taylor_coefficients--> CanardExpansion
               --blowup_chart---------> BlowupChart (eigen-data, primed coefficients)
               --g_coefficients-------> NormalFormCoeffs (g_kl)
               --h_and_c--------------> h_kl, c1, c2

and the closed forms ``A`` and ``B`` give the leading coefficients of
``L1 = -a01 A sqrt(eps) / (4 beta0 b10)`` and ``L2 = B eps^(3/2)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Literal, Optional

import numpy as np
from scipy.optimize import brentq

from canardkit.errors import DegenerateFoldError, GeometryError, SmallDenominatorError, ValidationError
from canardkit.manifold import FoldPoint, fold_points
from canardkit.model import equilibrium_delta

SMALL_DENOMINATOR = 1e-12
DEGENERATE_A20 = 1e-8
CANARD_TOL = 1e-8
CRITICALITY_TOL = 1e-10
BAUTIN_TOL = 1e-6

G_KEYS = (
    "20", "11", "02",
    "30", "21", "12", "03",
    "40", "31", "22", "13", "04",
    "50", "41", "32", "23", "14", "05",
)  # fmt: skip
H_KEYS = ("20", "11", "02", "30", "12", "03", "40", "31", "22", "13", "04")


@dataclass(frozen=True)
class CanardExpansion:
    """Taylor coefficients of f and g at a canard point (u_m, v_m, delta*).

    ``a_ij`` is the (i, j) partial derivative of f in (u, v); ``b_ij``
    likewise for g.  The fold itself is kept so the chart series, which
    also involve u_m, v_m and eta, can be evaluated.
    """

    u_m: float
    v_m: float
    theta: float
    eta: float
    delta_star: float
    a10: float
    a01: float
    a20: float
    a11: float
    a30: float
    a21: float
    a40: float
    a50: float
    b10: float
    b01: float
    b20: float
    b11: float
    b21: float

    @property
    def beta0(self) -> float:
        return math.sqrt(-self.a01 * self.b10)

    @property
    def A(self) -> float:
        """Leading coefficient of the first Lyapunov coefficient."""
        return self.a01 * self.a20 * self.b20 - self.a01 * self.a30 * self.b10 + self.a11 * self.a20 * self.b10

    @property
    def g_lambda(self) -> float:
        # d g / d delta at the canard point, the coefficient of lambda
        return -self.v_m * (self.u_m**2 + self.eta)


def canard_delta(u_fold: float, eta: float) -> float:
    """delta* placing the interior equilibrium on the fold, u*(delta*) = u_fold."""
    return equilibrium_delta(u_fold, eta)


def taylor_coefficients(
    fold: FoldPoint, theta: float, eta: float, delta_star: Optional[float] = None
) -> CanardExpansion:
    if fold.degenerate or fold.kind == "inflection":
        raise DegenerateFoldError(f"fold at u={fold.u} is degenerate")
    um, vm = fold.u, fold.v
    if delta_star is None:
        delta_star = canard_delta(um, eta)
    elif not 0 < delta_star < 1:
        raise ValidationError("delta_star must lie in (0, 1)", field="delta_star")
    else:
        u_star = math.sqrt(delta_star * eta / (1 - delta_star))
        if abs(u_star - um) > CANARD_TOL:
            raise GeometryError(
                f"canard condition violated: u*(delta*)={u_star:.12g} but fold at u={um:.12g}"
            )
    ds = delta_star
    k = ds * eta / (1 - ds)
    s = 1 - ds
    a20 = 4 * k * (3 - 3 * theta - 5 * um) + 2 * eta * (1 - 3 * um - theta) + 6 * theta * um - 2 * vm
    if abs(a20) < DEGENERATE_A20:
        raise DegenerateFoldError(f"a20={a20:.3e} vanishes; fold is not a non-degenerate canard point")
    exp = CanardExpansion(
        u_m=um,
        v_m=vm,
        theta=theta,
        eta=eta,
        delta_star=ds,
        a10=0.0,
        a01=-um * um,
        a20=a20,
        a11=-2 * um,
        a30=24 * (1 - theta) * um + 6 * (theta - eta) - 60 * k,
        a21=-2.0,
        a40=24 * (1 - theta) - 120 * um,
        a50=-120.0,
        b10=2 * s * um * vm,
        b01=0.0,
        b20=2 * s * vm,
        b11=2 * s * um,
        b21=2 * s,
    )
    if exp.b10 == 0:
        raise DegenerateFoldError("b10 vanishes")
    return exp


def expansion_at(theta: float, eta: float, which: Literal["P", "Q"] = "P") -> CanardExpansion:
    """Expansion at fold P (local minimum) or Q (local maximum) of M20."""
    folds = fold_points(theta, eta)
    if len(folds) != 2:
        raise GeometryError(f"need two folds for a canard point, found {len(folds)}")
    return taylor_coefficients(folds[0] if which == "P" else folds[1], theta, eta)


@dataclass(frozen=True)
class BlowupChart:
    """Quantities of the rescaled system in chart K2 at one (epsilon, lambda2)."""

    r2: float
    lambda2: float
    u2e: float
    v2e: float
    alpha11: float
    alpha12: float
    alpha21: float
    alpha22: float
    mu: complex
    beta0: float
    p: tuple[complex, complex]
    q: tuple[complex, complex]
    primed: dict = field(default_factory=dict)

    @property
    def epsilon(self) -> float:
        return self.r2 * self.r2

    @property
    def alpha(self) -> float:
        return self.mu.real

    @property
    def beta(self) -> float:
        return self.mu.imag

    @property
    def trace(self) -> float:
        return self.alpha11 + self.alpha22


def blowup_chart(exp: CanardExpansion, epsilon: float, lambda2: float = 0.0) -> BlowupChart:
    """Equilibrium P2, its Jacobian and eigenvectors, truncated at O(4).

    ``lambda2 = (delta - delta*) / sqrt(epsilon)``.  At ``lambda2 == 0``
    the eigenvectors take their simplified Hopf-point form.
    """
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive", field="epsilon")
    e = exp
    r, l2 = math.sqrt(epsilon), float(lambda2)
    w = e.v_m * (e.u_m**2 + e.eta)  # v_m (u_m^2 + eta)
    sq = 2 * e.u_m * e.v_m**2 * (e.u_m**2 + e.eta) - e.b20 / (2 * e.b10) * w * w
    u2e = w / e.b10 * l2 + sq / e.b10**2 * r * l2 * l2
    v2e = -e.a20 / (2 * e.a01 * e.b10**2) * w * w * l2 * l2
    a11_ = (
        e.a20 / e.b10 * w * l2
        + e.a20 / e.b10**2 * sq * r * l2 * l2
        + (e.a30 - e.a20 * e.a11 / e.a01) * w * w / (2 * e.b10**2) * r * l2 * l2
    )
    a12_ = e.a01 + e.a11 / e.b10 * w * r * l2
    a21_ = e.b10 - 2 * e.u_m * e.v_m * r * l2 + e.b20 / e.b10 * w * r * l2
    a22_ = e.b11 / e.b10 * w * r * r * l2 - (e.u_m**2 + e.eta) * r * r * l2
    tr = a11_ + a22_
    disc = 4 * (a11_ * a22_ - a12_ * a21_) - tr * tr
    if disc <= 0:
        raise GeometryError("chart Jacobian has real eigenvalues; outside the oscillatory regime")
    mu = complex(tr / 2, 0.5 * math.sqrt(disc))
    beta0 = e.beta0
    if l2 == 0.0:
        q = (complex(e.a01), 1j * beta0)
        p = (complex(1 / (2 * e.a01)), 1j / (2 * beta0))
    else:
        q = (complex(a12_), mu - a11_)
        den = a12_ * (2 * mu.conjugate() - tr)
        p = ((mu.conjugate() - a22_) / den, a12_ / den)
    primed = dict(
        a20=e.a20 + e.a30 / e.b10 * w * r * l2,
        a11=e.a11 * r + e.a21 / e.b10 * w * r * l2,
        a30=e.a30 * r + e.a40 / e.b10 * w * r * l2,
        a21=e.a21 * r * r,
        a40=e.a40 * r * r,
        a50=e.a50 * r**3,
        b20=e.b20 * r - 2 * e.v_m * r * l2,
        b11=e.b11 * r * r,
        b21=e.b21 * r**3,
    )
    return BlowupChart(r, l2, u2e, v2e, a11_, a12_, a21_, a22_, mu, beta0, p, q, primed)


@dataclass(frozen=True)
class NormalFormCoeffs:
    """Complex coefficients of the Poincare normal form pipeline.

    The complex coordinate is ``z = conj(p1) x + conj(p2) y`` and the
    near-identity change ``z = w + sum h_kl w^k conj(w)^l / (k! l!)``
    reduces ``z' = mu z + sum g_kl z^k conj(z)^l / (k! l!)`` to
    ``w' = mu w + c1 w^2 conj(w) + c2 w^3 conj(w)^2``.
    """

    mu: complex
    g: dict
    h: dict = field(default_factory=dict)
    c1: Optional[complex] = None
    c2: Optional[complex] = None

    @property
    def beta(self) -> float:
        return self.mu.imag


def g_coefficients(chart: BlowupChart) -> NormalFormCoeffs:
    a = chart.primed
    q1, q2 = chart.q
    P1, P2 = chart.p[0].conjugate(), chart.p[1].conjugate()
    Q1, Q2 = q1.conjugate(), q2.conjugate()
    A20, A11, A30, A21 = a["a20"], a["a11"], a["a30"], a["a21"]
    A40, A50 = a["a40"], a["a50"]
    B20, B11, B21 = a["b20"], a["b11"], a["b21"]
    g = {}
    g["20"] = P1 * (A20 * q1**2 + 2 * A11 * q1 * q2) + P2 * (B20 * q1**2 + 2 * B11 * q1 * q2)
    g["11"] = P1 * (A20 * q1 * Q1 + A11 * (q1 * Q2 + q2 * Q1)) + P2 * (B20 * q1 * Q1 + B11 * (q1 * Q2 + q2 * Q1))
    g["02"] = P1 * (A20 * Q1**2 + 2 * A11 * Q1 * Q2) + P2 * (B20 * Q1**2 + 2 * B11 * Q1 * Q2)
    g["30"] = P1 * (A30 * q1**3 + 3 * A21 * q1**2 * q2) + 3 * B21 * P2 * q1**2 * q2
    g["21"] = P1 * (A30 * q1**2 * Q1 + A21 * (q1**2 * Q2 + 2 * q1 * Q1 * q2)) + B21 * P2 * (
        q1**2 * Q2 + 2 * q1 * Q1 * q2
    )
    g["12"] = P1 * (A30 * q1 * Q1**2 + A21 * (Q1**2 * q2 + 2 * q1 * Q1 * Q2)) + B21 * P2 * (
        Q1**2 * q2 + 2 * q1 * Q1 * Q2
    )
    g["03"] = P1 * (A30 * Q1**3 + 3 * A21 * Q1**2 * Q2) + 3 * B21 * P2 * Q1**2 * Q2
    for k in range(5):
        g[f"{k}{4 - k}"] = A40 * P1 * q1**k * Q1 ** (4 - k)
    for k in range(6):
        g[f"{k}{5 - k}"] = A50 * P1 * q1**k * Q1 ** (5 - k)
    return NormalFormCoeffs(mu=chart.mu, g={k: complex(g[k]) for k in G_KEYS})


def _div(num, den, label):
    if abs(den) < SMALL_DENOMINATOR:
        raise SmallDenominatorError(f"denominator of {label} is {abs(den):.3e}")
    return num / den


def h_and_c(
    nf: NormalFormCoeffs,
    mu: Optional[complex] = None,
    variant: Literal["corrected", "printed"] = "corrected",
) -> NormalFormCoeffs:
    """Solve the homological equations for h_kl (k + l <= 4), c1 and c2.

    ``variant="printed"`` reproduces the recursion exactly as typeset in
    the source, including three misprints: a missing factor 2 on
    ``g02 conj(h11)`` in h12, ``g11 h31 / 3`` instead of ``/ 6`` in c2,
    and a dropped ``g12 conj(h02) conj(h20) / 4`` term in c2.  The default
    ``"corrected"`` variant agrees with a generic order-by-order solver.
    """
    if mu is None:
        mu = nf.mu
    mu = complex(mu)
    mb = mu.conjugate()
    C = np.conj
    g = nf.g
    g20, g11, g02, g30, g21, g12, g03 = (g[k] for k in ("20", "11", "02", "30", "21", "12", "03"))
    g40, g31, g22, g13, g04, g32 = (g[k] for k in ("40", "31", "22", "13", "04", "32"))
    fixed = variant == "corrected"

    c1 = (
        _div(g20 * g11 * (2 * mu + mb), 2 * abs(mu) ** 2, "c1")
        + _div(abs(g11) ** 2, mu, "c1")
        + _div(abs(g02) ** 2, 2 * (2 * mu - mb), "c1")
        + g21 / 2
    )
    h20 = _div(g20, mu, "h20")
    h11 = _div(g11, mb, "h11")
    h02 = _div(g02, 2 * mb - mu, "h02")
    h30 = _div(3 * (g20 * h20 / 2 + g11 * C(h02) / 2 + g30 / 6), mu, "h30")
    h12 = _div(
        g20 * h02 + 2 * g11 * h11 + g11 * C(h20) + (2 if fixed else 1) * g02 * C(h11) + g12, 2 * mb, "h12"
    )
    h03 = _div(g03 + 3 * g11 * h02 + 3 * g02 * C(h20), 3 * mb - mu, "h03")
    h21 = 0.0  # resonant, absent from the transformation

    h40 = _div(
        8
        * (
            g20 / 2 * (h20**2 / 4 + h30 / 3)
            + g11 * (C(h03) / 6 + h20 * C(h02) / 4)
            + g02 * C(h02) ** 2 / 8
            + g30 * h20 / 4
            + g21 * C(h02) / 4
            + g40 / 24
        ),
        mu,
        "h40",
    )
    h31 = _div(
        6
        * (
            g20 / 2 * (h21 + h20 * h11)
            + g11 * (C(h12) / 2 + h20 * C(h11) / 2 + h11 * C(h02) / 2 + h30 / 6)
            + g02 / 2 * (C(h03) / 3 + C(h11) * C(h02))
            + g30 * h11 / 2
            + g21 / 2 * (h20 + C(h11))
            + g12 * C(h02) / 2
            + g31 / 6
            - c1 * h20
        ),
        2 * mu + mb,
        "h31",
    )
    h22 = _div(
        4
        * (
            g20 / 2 * (h11**2 + h12 + h20 * h02 / 2)
            + g11 * (abs(h20) ** 2 / 4 + abs(h11) ** 2 + abs(h02) ** 2 / 4)
            + g21 / 2 * (2 * h11 + C(h20) / 2)
            + g02 / 2 * (C(h20) * C(h02) / 2 + C(h11) ** 2 + C(h12))
            + g30 * h02 / 4
            + g12 / 2 * (2 * C(h11) + h20 / 2)
            + g03 * C(h02) / 4
            + g22 / 4
            - 2 * h11 * c1.real
        ),
        mu + 2 * mb,
        "h22",
    )
    h13 = _div(
        2
        * (
            g20 / 2 * (h11 * h02 + h03 / 3)
            + g11 * (C(h30) / 6 + h12 / 2 + h11 * C(h20) / 2 + C(h11) * h02 / 2)
            + g02 / 2 * (C(h21) + C(h11) * C(h20))
            + g21 * h02 / 2
            + g12 * (h11 + C(h20)) / 2
            + g03 * C(h11) / 2
            + g13 / 6
            - C(c1) * h02
        ),
        mb,
        "h13",
    )
    h04 = _div(
        24
        * (
            g20 * h02**2 / 8
            + g11 * (h03 / 6 + h02 * C(h20) / 4)
            + g02 / 2 * (C(h20) ** 2 / 4 + C(h30) / 3)
            + g12 * h02 / 4
            + g03 * C(h20) / 4
            + g04 / 24
        ),
        4 * mb - mu,
        "h04",
    )
    c2 = (
        g20 / 2 * (h20 * h12 / 2 + h22 / 2 + h30 * h02 / 6)
        + g11
        * (
            C(h22) / 4
            + h11 * C(h12) / 2
            + h02 * C(h03) / 12
            + h30 * C(h20) / 12
            + h12 * C(h02) / 4
            + h31 / (6 if fixed else 3)
        )
        + g02 / 2 * (C(h20) * C(h03) / 6 + C(h11) * C(h12) + C(h13) / 3)
        + g30 / 6 * (3 * h11**2 + 3 * h12 / 2 + 3 * h20 * h02 / 2)
        + g21 / 2 * (abs(h20) ** 2 / 2 + 2 * abs(h11) ** 2 + h20 * h11 + abs(h02) ** 2 / 2)
        + g12 / 2 * (h30 / 6 + C(h11) ** 2 + C(h11) * h20 + h11 * C(h02) + C(h12))
        + g03 / 6 * (C(h03) / 2 + 3 * C(h11) * C(h02))
        + g40 * h02 / 12
        + g31 / 6 * (3 * h11 + C(h20) / 2)
        + g22 / 4 * (2 * C(h11) + h20)
        + g13 * C(h02) / 4
        + g32 / 12
    )
    if fixed:
        c2 += g12 * C(h02) * C(h20) / 4
    h = dict(zip(H_KEYS, (h20, h11, h02, h30, h12, h03, h40, h31, h22, h13, h04)))
    return replace(nf, mu=mu, h={k: complex(v) for k, v in h.items()}, c1=complex(c1), c2=complex(c2))


def l2_compact(nf: NormalFormCoeffs, beta: Optional[float] = None) -> float:
    """Second Lyapunov coefficient from g_kl alone (valid where Re c1 = 0)."""
    b = nf.beta if beta is None else beta
    if b == 0:
        raise SmallDenominatorError("beta = 0")
    C = np.conj
    g = nf.g
    g20, g11, g02, g30, g21, g12, g03 = (g[k] for k in ("20", "11", "02", "30", "21", "12", "03"))
    g40, g31, g22, g13, g32 = (g[k] for k in ("40", "31", "22", "13", "32"))
    t1 = g32.real / b
    t2 = (g20 * C(g31) - g11 * (4 * g31 + 3 * C(g22)) - g02 * (g40 + C(g13)) / 3 - g30 * g12).imag / b**2
    t3 = (
        (
            g20 * (C(g11) * (3 * g12 - C(g30)) + g02 * (C(g12) - g30 / 3) + C(g02) * g03 / 3)
            + g11 * (C(g02) * (5 / 3 * C(g30) + 3 * g12) + g02 * C(g03) / 3 - 4 * g11 * g30)
        ).real
        + 3 * (g20 * g11).imag * g21.imag
    ) / b**3
    t4 = (
        (g11 * C(g02) * (C(g20) ** 2 - 3 * C(g20) * g11 - 4 * g11**2)).imag
        + (g20 * g11).imag * (3 * (g20 * g11).real - 2 * abs(g02) ** 2)
    ) / b**4
    return float((t1 + t2 + t3 + t4) / 12)


def first_lyapunov(exp: CanardExpansion, epsilon: float) -> tuple[float, float]:
    """(L1, A) from the closed form."""
    A = exp.A
    return -exp.a01 * A * math.sqrt(epsilon) / (4 * exp.beta0 * exp.b10), A


def first_lyapunov_pipeline(exp: CanardExpansion, epsilon: float, lambda2: float = 0.0) -> float:
    """Re(c1)/beta through the chart and the g/h/c recursion."""
    nf = h_and_c(g_coefficients(blowup_chart(exp, epsilon, lambda2)))
    return nf.c1.real / nf.beta


def criticality(A: float, tol: float = CRITICALITY_TOL) -> Literal["supercritical", "subcritical", "degenerate"]:
    if abs(A) < tol:
        return "degenerate"
    return "supercritical" if A < 0 else "subcritical"


def theta_bautin(u_m: float, eta: float, delta_star: float) -> float:
    """theta solving A = 0 with (u_m, delta*) held fixed."""
    d, u = delta_star, u_m
    num = u * ((-1 + d) * u**3 + (-5 * d + 5) * u**2 - eta * (-1 + d) * u - 6 * d * eta)
    den = (5 * d - 5) * u**3 + (-1 + d) * u**2 + 6 * d * eta * u - eta * (-1 + d)
    if abs(den) < SMALL_DENOMINATOR:
        raise SmallDenominatorError("theta_B denominator vanishes")
    return -num / den


def bautin_locus(eta: float, bracket: Optional[tuple[float, float]] = None, n_scan: int = 400) -> float:
    """theta with A(theta) = 0 at fold P, keeping the fold consistent with theta.

    Without a bracket, theta is scanned on a log grid over (1e-4, 1) and
    the first sign change of A is refined.
    """

    def A_of(th):
        return expansion_at(th, eta, "P").A

    if bracket is None:
        grid = np.geomspace(1e-4, 1.0, n_scan, endpoint=False)
        prev = None
        for th in grid:
            try:
                val = A_of(th)
            except GeometryError:
                prev = None
                continue
            if prev is not None and np.sign(val) != np.sign(prev[1]):
                bracket = (prev[0], th)
                break
            prev = (th, val)
        if bracket is None:
            raise GeometryError(f"no Bautin point found at eta={eta}")
    return brentq(A_of, *bracket, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def _B_bracket(e: CanardExpansion, c_b11: float, sign_a21: float) -> float:
    a01, a11, a20, a30, a40, a50, a21 = e.a01, e.a11, e.a20, e.a30, e.a40, e.a50, e.a21
    b10, b20, b11, b21 = e.b10, e.b20, e.b11, e.b21
    b0 = e.beta0
    return (
        a01**4
        * b10
        / (144 * b0**7)
        * (
            18 * a11**3 * a20 * b10**2
            + (27 * a20 * b20 - 2 * a30 * b10) * a01 * a11**2 * b10
            + (7 * a30 * b10 * b20 - 27 * b20**2 * a20 - 10 * b10**2 * a40) * a01**2 * a11
            + 2 * (10 * a40 * b20 - 3 * a50 * b10) * a01**3 * b10
            + (c_b11 * b20 * a20**2 * b11 + sign_a21 * 36 * a21 * a30 * b10**2 - 30 * a20**2 * b21 * b10) * a01**2
        )
    )


def B_printed(exp: CanardExpansion) -> float:
    """Leading coefficient of L2 as typeset."""
    return _B_bracket(exp, 48.0, 1.0)


def B_normal_form(exp: CanardExpansion) -> float:
    """Leading coefficient of L2 consistent with the normal-form pipeline.

    Differs from :func:`B_printed` in two terms: ``30 b20 a20^2 b11``
    instead of 48, and ``-36 a21 a30 b10^2`` instead of +36.
    """
    return _B_bracket(exp, 30.0, -1.0)


def second_lyapunov(
    exp: CanardExpansion,
    epsilon: float,
    tol: float = BAUTIN_TOL,
    variant: Literal["printed", "normal-form"] = "printed",
) -> tuple[float, float]:
    """(L2, B); warns when A is not on the Bautin locus within ``tol``."""
    if abs(exp.A) > tol:
        warnings.warn(f"A={exp.A:.3e} is off the Bautin locus; L2 is labeled off-locus", stacklevel=2)
    B = B_printed(exp) if variant == "printed" else B_normal_form(exp)
    return B * epsilon**1.5, B


def thresholds(exp: CanardExpansion, epsilon: float) -> tuple[float, float]:
    """(delta_H, delta_C) to the analysed order."""
    if exp.a20 == 0:
        raise DegenerateFoldError("a20 = 0")
    coef = exp.b10 / (2 * exp.a20**3 * exp.v_m * (exp.u_m**2 + exp.eta))
    return exp.delta_star, exp.delta_star - coef * exp.A * epsilon


Family = Callable[[float, float], tuple[float, float]]


def chart_family(eta: float, epsilon: float) -> Family:
    """(delta, theta) -> (alpha, L1) near the canard point at fold P.

    alpha is the real part of the chart eigenvalue at
    ``lambda2 = (delta - delta*(theta)) / sqrt(epsilon)`` and L1 is
    Re(c1)/beta from the full pipeline at that lambda2.
    """

    def fam(delta, theta):
        exp = expansion_at(theta, eta, "P")
        l2 = (delta - exp.delta_star) / math.sqrt(epsilon)
        nf = h_and_c(g_coefficients(blowup_chart(exp, epsilon, l2)))
        return nf.mu.real, nf.c1.real / nf.beta

    return fam


def bautin_transversality(family: Family, delta_H: float, theta_B: float, step: float = 1e-4) -> float:
    """det [[d alpha/d delta, d alpha/d theta], [d L1/d delta, d L1/d theta]] by central differences."""
    if not step > 0:
        raise ValidationError("step must be positive", field="step")
    ap, lp = family(delta_H + step, theta_B)
    am, lm = family(delta_H - step, theta_B)
    bp, mp = family(delta_H, theta_B + step)
    bm, mm = family(delta_H, theta_B - step)
    h2 = 2 * step
    return float(((ap - am) / h2) * ((mp - mm) / h2) - ((bp - bm) / h2) * ((lp - lm) / h2))


@dataclass(frozen=True)
class LyapunovResult:
    epsilon: float
    L1: float
    A: float
    L2: float
    B: float
    B_normal_form: float
    delta_H: float
    theta_B: Optional[float]
    delta_C: float
    delta_SNL: Optional[float] = None
    bautin_transversality: Optional[float] = None

    @property
    def criticality(self) -> str:
        return criticality(self.A)


def lyapunov_result(
    exp: CanardExpansion,
    epsilon: float,
    theta_B: Optional[float] = None,
    transversality: Optional[float] = None,
) -> LyapunovResult:
    L1, A = first_lyapunov(exp, epsilon)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        L2, B = second_lyapunov(exp, epsilon)
    dH, dC = thresholds(exp, epsilon)
    return LyapunovResult(
        epsilon=epsilon,
        L1=L1,
        A=A,
        L2=L2,
        B=B,
        B_normal_form=B_normal_form(exp),
        delta_H=dH,
        theta_B=theta_B,
        delta_C=dC,
        bautin_transversality=transversality,
    )


def report(exp: CanardExpansion, result: LyapunovResult, prefix: str = "") -> list[tuple[str, object]]:
    """Flat key -> value pairs for the text report."""
    items: list[tuple[str, object]] = [
        ("u_fold", exp.u_m),
        ("v_fold", exp.v_m),
        ("delta_star", exp.delta_star),
    ]
    for name in ("a01", "a20", "a11", "a30", "a21", "a40", "a50", "b10", "b20", "b11", "b21"):
        items.append((name, getattr(exp, name)))
    items += [
        ("beta0", exp.beta0),
        ("A", result.A),
        ("criticality", result.criticality),
        ("L1", result.L1),
        ("B", result.B),
        ("B_normal_form", result.B_normal_form),
        ("L2", result.L2),
        ("delta_H", result.delta_H),
        ("delta_C", result.delta_C),
    ]
    if result.theta_B is not None:
        items.append(("theta_B", result.theta_B))
    if result.bautin_transversality is not None:
        items.append(("bautin_transversality", result.bautin_transversality))
    if result.delta_SNL is not None:
        items.append(("delta_SNL", result.delta_SNL))
    return [(prefix + k, v) for k, v in items]
