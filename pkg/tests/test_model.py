from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from canardkit.errors import ValidationError
from canardkit.model import (
    DimensionalParams,
    Params,
    equilibria,
    interior_equilibrium,
    jacobian,
    nondimensionalize,
    to_dimensional,
    transcritical_threshold,
    vector_field,
)

pos = st.floats(min_value=1e-3, max_value=3.0)
small_eps = st.floats(min_value=1e-4, max_value=0.09)


class TestParams:
    def test_rejects_nonpositive(self):
        for bad in (dict(delta=0), dict(theta=-1), dict(eta=float("nan")), dict(epsilon=0)):
            kw = dict(delta=0.3, theta=0.05, eta=0.176, epsilon=0.01) | bad
            with pytest.raises(ValidationError) as ei:
                Params(**kw)
            assert ei.value.field == next(iter(bad))

    def test_epsilon_must_be_below_one(self):
        with pytest.raises(ValidationError):
            Params(0.3, 0.05, 0.176, 1.0)

    def test_large_epsilon_warns_but_is_accepted(self):
        with pytest.warns(UserWarning, match="not small"):
            p = Params(0.3, 0.05, 0.176, 0.2)
        assert p.epsilon == 0.2

    def test_theta_above_one_allowed(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            Params(0.3, 2.0, 0.5, 0.01)

    def test_dimensional_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            DimensionalParams(r=1, K=100, m=5, p=1, q=1, c=-1, d=1)


class TestVectorField:
    def test_v_axis(self):
        p = Params(0.3, 0.05, 0.176, 0.01)
        f = vector_field((0.0, 1.0), p)
        assert f[0] == 0.0
        assert f[1] == pytest.approx(-p.epsilon * p.delta * p.eta)

    def test_e1_is_equilibrium(self):
        p = Params(0.3, 0.05, 0.176, 0.01)
        assert np.all(vector_field((1.0, 0.0), p) == 0.0)

    def test_fold_p_is_equilibrium_at_delta_star(self):
        p = Params(0.2426879409, 0.05, 0.176, 0.005)
        f = vector_field((0.2375, 0.2145), p)
        assert np.all(np.abs(f) < 1e-3)

    def test_array_input(self):
        p = Params(0.3, 0.05, 0.176, 0.01)
        u = np.linspace(0.1, 0.9, 5)
        out = vector_field((u, u), p)
        assert out.shape == (2, 5)
        assert out[0, 2] == pytest.approx(vector_field((u[2], u[2]), p)[0])

    def test_jacobian_matches_finite_differences(self):
        p = Params(0.4, 0.05, 0.176, 0.005)
        x = np.array([0.31, 0.22])
        J = jacobian(x, p)
        h = 1e-6
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            col = (vector_field(x + e, p) - vector_field(x - e, p)) / (2 * h)
            assert np.allclose(J[:, j], col, rtol=1e-7, atol=1e-12)


class TestNondimensionalize:
    def test_theta_and_eta(self):
        dp = DimensionalParams(r=1, K=100, m=5, p=2, q=1, c=1760, d=1)
        prm = nondimensionalize(dp, epsilon=0.01)
        assert prm.theta == pytest.approx(0.05)
        assert prm.eta == pytest.approx(0.176)
        assert prm.delta == pytest.approx(0.5)
        assert prm.epsilon == 0.01

    def test_delta_one_when_d_equals_p(self):
        dp = DimensionalParams(r=1, K=100, m=5, p=3, q=1, c=1760, d=3)
        # delta = 1 is a valid positive input; the interior equilibrium is simply infeasible
        prm = nondimensionalize(dp, epsilon=0.01)
        assert prm.delta == 1.0
        assert interior_equilibrium(prm) is None

    def test_to_dimensional(self):
        dp = DimensionalParams(r=2, K=10, m=1, p=1, q=4, c=1, d=1)
        x, y, T = to_dimensional(0.5, 0.1, 20.0, dp)
        assert (x, y, T) == (5.0, 2 * 100 / 4 * 0.1, 1.0)


class TestEquilibria:
    def test_threshold_values(self):
        assert transcritical_threshold(0.0) == 1.0
        assert transcritical_threshold(1.0) == 0.5
        assert transcritical_threshold(0.176) == pytest.approx(0.850340136, abs=1e-9)

    def test_above_threshold_no_interior(self):
        eqs = equilibria(Params(0.9, 0.05, 0.176, 0.01))
        assert [e.kind for e in eqs] == ["E0", "E1"]
        assert eqs[1].stability == "stable node"
        assert eqs[0].stability == "attracting saddle-node"
        assert (eqs[0].u, eqs[0].v, eqs[1].u, eqs[1].v) == (0.0, 0.0, 1.0, 0.0)

    def test_at_threshold(self):
        eqs = equilibria(Params(1 / 1.176, 0.05, 0.176, 0.01))
        assert [e.kind for e in eqs] == ["E0", "E1"]
        assert eqs[1].stability == "attracting saddle-node"

    def test_canard_point_is_on_fold(self):
        eqs = equilibria(Params(0.2426879409, 0.05, 0.176, 0.005))
        star = eqs[2]
        assert star.kind == "E*"
        assert (star.u, star.v) == pytest.approx((0.2375, 0.2145), abs=1e-4)
        assert star.stability == "undetermined-on-fold"
        assert star.branch == "fold"

    @pytest.mark.parametrize(
        "delta,stability,branch",
        [(0.15, "stable focus/node", "S0^l"), (0.4, "unstable", "S0^m"), (0.7, "stable focus/node", "S0^r")],
    )
    def test_branch_stability(self, delta, stability, branch):
        star = equilibria(Params(delta, 0.05, 0.176, 0.005))[2]
        assert (star.stability, star.branch) == (stability, branch)

    @given(delta=st.floats(0.01, 0.84), theta=pos, eta=st.floats(1e-3, 0.17), eps=small_eps)
    @settings(max_examples=60, deadline=None)
    def test_equilibria_are_zeros(self, delta, theta, eta, eps):
        p = Params(delta, theta, eta, eps)
        for e in equilibria(p):
            r = vector_field((e.u, e.v), p)
            scale = max(1.0, abs(e.v))
            assert np.all(np.abs(r) < 1e-10 * scale)

    @given(delta=st.floats(0.01, 0.99), theta=pos, eta=pos, eps=small_eps, frac=st.floats(0.01, 0.99))
    @settings(max_examples=60, deadline=None)
    def test_feasibility_monotone(self, delta, theta, eta, eps, frac):
        p = Params(delta, theta, eta, eps)
        if interior_equilibrium(p) is not None:
            star = interior_equilibrium(p.replace(delta=delta * frac))
            assert star is not None
            assert star[0] > 0 and star[1] > 0 and math.isfinite(star[1])
