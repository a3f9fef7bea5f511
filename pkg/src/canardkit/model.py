"""Dimensionless predator-prey vector field, equilibria and their stability.

The prey equation is fast and the predator equation slow.  After the time
rescaling ``dt -> (u^2 + eta) dt`` the system is polynomial::

    du/dt = u (1 - u)(u + theta)(u^2 + eta) - u^2 v            = f(u, v)
    dv/dt = epsilon (u^2 v - delta v (u^2 + eta))              = epsilon g(u, v)
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from canardkit.errors import ValidationError

EQUILIBRIUM_TOL = 1e-10
FOLD_TOL = 1e-9

Stability = Literal[
    "attracting saddle-node",
    "stable node",
    "saddle",
    "stable focus/node",
    "unstable",
    "undetermined-on-fold",
]


@dataclass(frozen=True)
class Params:
    """Dimensionless parameters (delta, theta, eta, epsilon).

    ``theta`` and ``eta`` only need to be positive: some fold regions use
    values above one.  ``epsilon`` must lie in (0, 1); values of 0.1 or more
    are accepted with a warning because every result here is asymptotic in
    epsilon.
    """

    delta: float
    theta: float
    eta: float
    epsilon: float

    def __post_init__(self):
        for name in ("delta", "theta", "eta", "epsilon"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {value!r}", field=name)
        if self.epsilon >= 1:
            raise ValidationError(f"epsilon must be < 1, got {self.epsilon}", field="epsilon")
        if self.epsilon >= 0.1:
            warnings.warn(
                f"epsilon={self.epsilon} is not small; slow-fast asymptotics may be inaccurate",
                stacklevel=3,
            )

    def replace(self, **changes) -> "Params":
        values = dict(delta=self.delta, theta=self.theta, eta=self.eta, epsilon=self.epsilon)
        values.update(changes)
        return Params(**values)


@dataclass(frozen=True)
class DimensionalParams:
    """Parameters of the dimensional model (growth r, capacity K, Allee m,
    conversion p, attack q, half-saturation c, death d)."""

    r: float
    K: float
    m: float
    p: float
    q: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("r", "K", "m", "p", "q", "c", "d"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be a positive finite number, got {value!r}", field=name)


@dataclass(frozen=True)
class Equilibrium:
    kind: Literal["E0", "E1", "E*"]
    u: float
    v: float
    stability: Stability
    branch: Optional[str] = None


def vector_field(state, params: Params):
    """Right-hand side of the time-rescaled polynomial system.

    ``state`` may be a pair of scalars or arrays; the result has the same
    shape as ``np.asarray(state)``.
    """
    u, v = state[0], state[1]
    f = u * (1.0 - u) * (u + params.theta) * (u * u + params.eta) - u * u * v
    g = u * u * v - params.delta * v * (u * u + params.eta)
    if np.ndim(u) == 0:
        return np.array([f, params.epsilon * g])
    return np.stack([f, params.epsilon * g])


def fast_rhs(u, v, theta, eta):
    """Fast component f(u, v)."""
    return u * (1.0 - u) * (u + theta) * (u * u + eta) - u * u * v


def slow_rhs(u, v, delta, eta):
    """Slow component g(u, v) (without the epsilon factor)."""
    return u * u * v - delta * v * (u * u + eta)


def jacobian(state, params: Params) -> np.ndarray:
    u, v = float(state[0]), float(state[1])
    th, eta, d, eps = params.theta, params.eta, params.delta, params.epsilon
    # d/du of u(1-u)(u+th)(u^2+eta), expanded
    dp = (1 - u) * (u + th) * (u * u + eta) + u * (
        -(u + th) * (u * u + eta) + (1 - u) * (u * u + eta) + 2 * u * (1 - u) * (u + th)
    )
    return np.array(
        [
            [dp - 2 * u * v, -u * u],
            [eps * (2 * u * v - 2 * d * u * v), eps * (u * u - d * (u * u + eta))],
        ]
    )


def nondimensionalize(dp: DimensionalParams, epsilon: float) -> Params:
    """Map dimensional parameters to (delta, theta, eta).

    ``epsilon`` is an independent input; it cannot be recovered from the
    dimensional parameters.
    """
    return Params(delta=dp.d / dp.p, theta=dp.m / dp.K, eta=dp.c / dp.K**2, epsilon=epsilon)


def to_dimensional(u, v, t, dp: DimensionalParams):
    """Convert a dimensionless state and fast time to (x, y, T)."""
    return dp.K * u, dp.r * dp.K**2 / dp.q * v, t / (dp.r * dp.K)


def transcritical_threshold(eta: float) -> float:
    """delta at which the interior equilibrium collides with E1."""
    if eta < 0:
        raise ValidationError("eta must be non-negative", field="eta")
    return 1.0 / (1.0 + eta)


def interior_equilibrium(params: Params) -> Optional[tuple[float, float]]:
    """(u*, v*) or None when delta >= 1/(1+eta)."""
    d, eta, th = params.delta, params.eta, params.theta
    if d >= transcritical_threshold(eta):
        return None
    u = math.sqrt(d * eta / (1.0 - d))
    v = (1.0 - u) * (u + th) * (u * u + eta) / u
    return u, v


def equilibrium_delta(u_star: float, eta: float) -> float:
    """Inverse of u*(delta): the delta placing the interior equilibrium at ``u_star``."""
    return u_star * u_star / (u_star * u_star + eta)


def _classify_interior(u: float, v: float, params: Params) -> tuple[Stability, Optional[str]]:
    from canardkit.manifold import branch_of, fold_points

    folds = [fp for fp in fold_points(params.theta, params.eta) if not fp.degenerate]
    for fp in folds:
        if abs(u - fp.u) < FOLD_TOL:
            return "undetermined-on-fold", "fold"
    branch = branch_of(u, folds) if len(folds) == 2 else None
    eig = np.linalg.eigvals(jacobian((u, v), params))
    if np.all(eig.real < 0):
        return "stable focus/node", branch
    if np.prod(eig).real < 0:
        return "saddle", branch
    return "unstable", branch


def equilibria(params: Params) -> list[Equilibrium]:
    """All equilibria in the closed positive quadrant."""
    thr = transcritical_threshold(params.eta)
    out = [Equilibrium("E0", 0.0, 0.0, "attracting saddle-node")]
    if math.isclose(params.delta, thr, rel_tol=1e-12, abs_tol=0.0):
        e1: Stability = "attracting saddle-node"
    elif params.delta > thr:
        e1 = "stable node"
    else:
        e1 = "saddle"
    out.append(Equilibrium("E1", 1.0, 0.0, e1))
    star = interior_equilibrium(params)
    if star is not None and not math.isclose(params.delta, thr, rel_tol=1e-12, abs_tol=0.0):
        u, v = star
        stability, branch = _classify_interior(u, v, params)
        out.append(Equilibrium("E*", u, v, stability, branch))
    return out
