import numpy as np
import pytest

import conecert as cc
from conecert.errors import DomainError

SPEC = cc.ConeSpec(a=0.25, b=0.75, c=0.25)


def bump(grid):
    return cc.GridFunction.from_callable(grid, lambda t: t * (1 - t))


def test_norm_examples(grid101):
    assert cc.norm_sup(cc.GridFunction.zeros(grid101)) == 0.0
    assert cc.norm_sup(bump(grid101)) == pytest.approx(0.25, abs=1e-15)
    neg = cc.GridFunction.from_callable(grid101, lambda t: -t)
    assert cc.norm_sup(neg) == pytest.approx(1.0)


def test_membership_examples(grid101):
    assert cc.cone_member(cc.GridFunction.zeros(grid101), SPEC)
    # min over [1/4,3/4] is 3/16, c * norm is 1/16
    assert cc.cone_member(bump(grid101), SPEC)
    shifted = cc.GridFunction.from_callable(grid101, lambda t: t - 0.5)
    assert not cc.cone_member(shifted, SPEC)


def test_membership_tolerance(grid101):
    u = cc.GridFunction.from_callable(grid101, lambda t: np.full_like(t, 1.0))
    wiggle = u.with_values(u.values - 5e-10 * (grid101.nodes == 0.5))
    # c = 1 forces constants; a dip at quadrature-noise scale must not flip it
    assert cc.cone_member(wiggle, cc.ConeSpec(a=0.0, b=1.0, c=1.0), tol=1e-9)


def test_min_on_interval_interpolates(grid101):
    u = cc.GridFunction.from_callable(grid101, lambda t: t)
    assert cc.min_on_interval(u, 0.303, 0.75) == pytest.approx(0.303, abs=1e-15)


def test_v_rho_boundary_examples(grid101):
    const = cc.GridFunction.from_callable(grid101,
                                          lambda t: np.full_like(t, 0.4))
    assert cc.v_rho_boundary_distance(const, SPEC, 0.4) == pytest.approx(0.0)
    assert cc.v_rho_boundary_distance(bump(grid101), SPEC, 3.0 / 16.0) == \
        pytest.approx(0.0, abs=1e-15)
    zero = cc.GridFunction.zeros(grid101)
    assert cc.v_rho_boundary_distance(zero, SPEC, 1.0) == pytest.approx(-1.0)


def test_v_rho_requires_membership(grid101):
    outside = cc.GridFunction.from_callable(grid101, lambda t: t - 0.5)
    with pytest.raises(DomainError):
        cc.v_rho_boundary_distance(outside, SPEC, 1.0)


def test_cone_axioms_on_random_members(step_problem):
    rng = np.random.default_rng(7)
    for _ in range(20):
        u = cc.random_cone_member(step_problem, rng)
        spec = step_problem.cone
        assert cc.cone_member(u, spec)
        for lam in (0.0, 0.5, 2.0):
            assert cc.cone_member(u.with_values(lam * u.values), spec)
        # u and -u both members forces u = 0
        if cc.cone_member(u.with_values(-u.values), spec, tol=1e-9):
            assert cc.norm_sup(u) <= 1e-9


def test_sandwich(step_problem):
    # members with norm below rho have interval minimum below rho, and
    # members of the sublevel set have norm at most rho / c
    rng = np.random.default_rng(11)
    spec = step_problem.cone
    rho = 2.0
    for _ in range(40):
        u = cc.random_cone_member(step_problem, rng)
        m = cc.min_on_interval(u, spec.a, spec.b)
        if cc.norm_sup(u) < rho:
            assert m <= cc.norm_sup(u) < rho
        if m < rho:
            assert cc.norm_sup(u) <= rho / spec.c + 1e-9
