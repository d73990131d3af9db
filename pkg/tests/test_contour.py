import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraccim.contour import (
    ContourPlan, FractionalOrders, SectorHypothesisWarning, contour_point, default_epsilon,
    make_plan, nodes, optimize_eta, p_of_eta, strip_half_width,
)
from fraccim.errors import DomainError, NonPositiveStrip

orders_st = st.tuples(st.floats(0.05, 0.95), st.floats(0.05, 0.95))


# reference values computed independently with mpmath and bounded scalar minimization
ORACLE = dict(epsilon=0.7275, c_tilde=0.5013972450961725, eta=0.8717232905468816,
              q=0.4041183162288801, tau=0.11326107415668042, mu=3.5680336912682888)


def test_plan_matches_independent_oracle():
    plan = make_plan(FractionalOrders(0.2, 0.77), 0.6767, 0.1, 10.0, 60)
    assert plan.orders.epsilon == pytest.approx(ORACLE["epsilon"], abs=1e-15)
    assert plan.c_tilde == pytest.approx(ORACLE["c_tilde"], rel=1e-14)
    assert plan.c_work == plan.c_tilde
    assert plan.eta_star == pytest.approx(ORACLE["eta"], abs=1e-8)
    assert plan.q_star == pytest.approx(ORACLE["q"], rel=1e-12)
    assert plan.tau == pytest.approx(ORACLE["tau"], rel=1e-8)
    assert plan.mu == pytest.approx(ORACLE["mu"], rel=1e-8)
    assert plan.t1 == pytest.approx(1.0)


def test_strip_formula():
    o = FractionalOrders(0.5, 0.5, 0.75)
    assert strip_half_width(o, 0.6767) == pytest.approx(0.75 * math.pi / 2 - 0.6767)
    assert strip_half_width(o, 0.2) == 0.2


def test_nonpositive_strip_raises():
    with pytest.raises(NonPositiveStrip):
        strip_half_width(FractionalOrders(0.5, 0.5, 0.2), 0.6767)


@pytest.mark.parametrize("theta", [0.0, -0.1, math.pi / 2, 2.0])
def test_theta_domain(theta):
    with pytest.raises(DomainError):
        strip_half_width(FractionalOrders(0.5, 0.5), theta)


@pytest.mark.parametrize("a,b", [(0.0, 0.5), (1.0, 0.5), (0.5, -0.1), (0.5, 1.2)])
def test_order_domain(a, b):
    with pytest.raises(DomainError):
        FractionalOrders(a, b)


def test_sector_hypothesis_warns_but_constructs():
    with pytest.warns(SectorHypothesisWarning):
        o = FractionalOrders(0.75, 0.8)
    assert 0 < o.epsilon < 1
    assert strip_half_width(o, 0.6767) > 0


@given(orders_st)
def test_default_epsilon_yields_positive_strip(ab):
    a, b = ab
    eps = default_epsilon(a, b)
    assert 0 < eps < 1
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SectorHypothesisWarning)
        o = FractionalOrders(a, b)
    if a + b < 1.8:
        assert strip_half_width(o, 0.6767) > 0


def test_p_of_eta_domain():
    with pytest.raises(DomainError):
        p_of_eta(1.0, 10.0, 0.6767, 0.5)
    with pytest.raises(DomainError):
        p_of_eta(0.5, 10.0, 0.6767, 0.7)
    assert p_of_eta(0.5, 10.0, 0.6767, 0.5) == pytest.approx(
        math.acosh(10.0 / (0.5 * math.sin(0.6767 - 0.5))))


@given(st.floats(1.0, 1000.0), st.floats(0.1, 1.2), st.floats(0.05, 0.95))
@settings(max_examples=40, deadline=None)
def test_optimize_eta_beats_grid(lam, theta, frac):
    cw = frac * theta
    eta, q = optimize_eta(lam, theta, cw)
    grid = np.linspace(0.001, 0.999, 4096)
    qg = 2 * math.pi * cw * grid / p_of_eta(grid, lam, theta, cw)
    assert q >= qg.max() - 1e-15
    assert 0 < eta < 1


def test_plan_parameters_positive_and_scale_with_n():
    o = FractionalOrders(0.4, 0.25)
    p40, p80 = make_plan(o, n_nodes=40), make_plan(o, n_nodes=80)
    assert p40.mu > 0 and p40.tau > 0
    assert p80.mu == pytest.approx(2 * p40.mu)
    assert p80.tau == pytest.approx(p40.tau / 2)


def test_larger_lambda_gives_smaller_q():
    o = FractionalOrders(0.2, 0.77)
    assert make_plan(o, lam=20).q_star < make_plan(o, lam=5).q_star


@pytest.mark.parametrize("kw", [dict(n_nodes=0), dict(t0=0.0), dict(lam=0.5)])
def test_plan_rejects_bad_input(kw):
    with pytest.raises(DomainError):
        make_plan(FractionalOrders(0.5, 0.5), **kw)


@given(st.floats(0.1, 50.0), st.floats(0.05, 1.5), st.floats(-6, 6))
def test_hyperbola_identity(mu, theta, phi):
    z, dz = contour_point(mu, theta, phi)
    lhs = ((mu - z.real) / (mu * math.sin(theta))) ** 2 - (z.imag / (mu * math.cos(theta))) ** 2
    assert lhs == pytest.approx(1.0, abs=1e-12 * math.cosh(phi) ** 2)
    assert z == pytest.approx(mu * (1 + np.sin(1j * phi - theta)), rel=1e-12, abs=1e-12 * mu)
    h = 1e-6
    fd = (contour_point(mu, theta, phi + h)[0] - contour_point(mu, theta, phi - h)[0]) / (2 * h)
    assert dz == pytest.approx(fd, rel=1e-6, abs=1e-6 * mu)


def test_nodes_midpoints_and_read_only():
    plan = make_plan(FractionalOrders(0.5, 0.5), n_nodes=7)
    qn = nodes(plan)
    assert len(qn) == 7
    np.testing.assert_allclose(qn.phi, (np.arange(7) + 0.5) * plan.tau)
    assert np.all(qn.z.imag > 0)
    with pytest.raises(ValueError):
        qn.z[0] = 0


def test_contains_is_closed_window():
    plan = make_plan(FractionalOrders(0.5, 0.5))
    assert plan.contains(0.1) and plan.contains(1.0)
    assert not plan.contains(0.09) and not plan.contains(1.01)
    assert isinstance(plan, ContourPlan)


@given(orders_st, st.integers(1, 300), st.floats(1.5, 100.0), st.floats(0.01, 1.0))
@settings(max_examples=60, deadline=None)
def test_plan_identities_and_decay_ordering(ab, n, lam, t0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SectorHypothesisWarning)
        o = FractionalOrders(*ab)
    if o.epsilon * math.pi / (2 * o.order_sum) <= 0.6767:
        return
    plan = make_plan(o, t0=t0, lam=lam, n_nodes=n)
    assert plan.tau * n == pytest.approx(p_of_eta(plan.eta_star, lam, plan.theta, plan.c_work), rel=1e-13)
    assert 2 * math.pi * plan.c_work / (plan.mu * plan.tau * t0) == pytest.approx(
        lam / (1 - plan.eta_star), rel=1e-13)
    z = nodes(plan).z
    assert np.all(np.diff(z.real) < 0)
    assert np.all(np.abs(np.angle(z)) < o.sector_angle)
