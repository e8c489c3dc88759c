import numpy as np
import pytest

import conecert as cc
from conecert.errors import ConfigError, CoverageError, DomainError

from conftest import make_step_nonlinearity

SPEC = cc.ConeSpec(a=0.25, b=0.75, c=0.25)


def constant_nl(value=0.0):
    return cc.Nonlinearity(pieces=(
        cc.Piece(region=lambda t, u: np.ones_like(np.asarray(t), dtype=bool),
                 f=float(value)),
    ))


def test_f_eval_step_sides(step_nl):
    assert cc.f_eval(step_nl, 0.5, 1.0, "on") == 1.0
    assert cc.f_eval(step_nl, 0.5, 1.15, "above") == 81.0
    assert cc.f_eval(step_nl, 0.5, 1.15, "below") == 1.0
    # the closed region u >= 1.15 claims the curve itself
    assert cc.f_eval(step_nl, 0.5, 1.15, "on") == 81.0


def test_f_eval_zero():
    nl = constant_nl(0.0)
    assert cc.f_eval(nl, 0.3, 2.0) == 0.0


def test_f_eval_requires_nonnegative_u(step_nl):
    with pytest.raises(DomainError):
        cc.f_eval(step_nl, 0.5, -0.1)


def test_coverage_error():
    nl = cc.Nonlinearity(pieces=(
        cc.Piece(region=cc.parse_predicate("u < 1"), f=1.0),
    ))
    with pytest.raises(CoverageError, match="no piece claims"):
        cc.f_eval(nl, 0.5, 2.0)
    with pytest.raises(CoverageError):
        cc.f_upper(nl, 2.0, 0.5, density=16)


def test_f_upper_examples(step_nl):
    assert cc.f_upper(constant_nl(0.0), 1.0, 0.1).value == 0.0

    linear = cc.Nonlinearity(pieces=(
        cc.Piece(region=cc.parse_predicate("u >= 0"),
                 f=cc.parse_expression("u")),
    ))
    rep = cc.f_upper(linear, 1.0, 0.1)
    assert rep.value == pytest.approx(1.1, abs=1e-12)
    assert rep.method == "sampled"
    assert rep.sample_count >= 1

    # box top 1.1 stays below the jump at 1.15
    assert cc.f_upper(step_nl, 1.0, 0.1).value == pytest.approx(1.0, abs=1e-12)


def test_f_lower_examples(step_nl):
    rep = cc.f_lower(constant_nl(3.0), 2.0, 0.1, SPEC)
    assert rep.value == pytest.approx(1.5, abs=1e-12)

    # box [0.25 * 4.9, 20.1] sits entirely above the jump
    rep = cc.f_lower(step_nl, 5.0, 0.1, SPEC)
    assert rep.value == pytest.approx(16.2, abs=1e-9)

    linear = cc.Nonlinearity(pieces=(
        cc.Piece(region=cc.parse_predicate("u >= 0"),
                 f=cc.parse_expression("u")),
    ))
    rep = cc.f_lower(linear, 1.0, 0.0, SPEC)
    assert rep.value == pytest.approx(0.25, abs=1e-12)


def test_f_lower_empty_interval(step_nl):
    with pytest.raises(DomainError):
        cc.f_lower(step_nl, 1.0, 1.0, SPEC)


def test_bounds_preconditions(step_nl):
    with pytest.raises(DomainError):
        cc.f_upper(step_nl, 0.0, 0.1)
    with pytest.raises(DomainError):
        cc.f_upper(step_nl, 1.0, 0.0)


def test_user_supplied_bound_overrides():
    nl = cc.Nonlinearity(
        pieces=(cc.Piece(region=lambda t, u: np.ones_like(t, dtype=bool),
                         f=cc.parse_expression("u")),),
        sup_bound=lambda t0, t1, u0, u1: u1,
    )
    rep = cc.f_upper(nl, 2.0, 0.5)
    assert rep.method == "user_supplied"
    assert rep.value == pytest.approx(1.25)
    assert rep.sample_count == 0


def test_curve_samples_catch_one_sided_values(step_nl):
    # the sup over u <= 1.15 + eps must see the 81 branch exactly at the
    # jump even though no lattice point lands there
    rep = cc.f_upper(step_nl, 1.15, 0.001, density=64)
    assert rep.value == pytest.approx(81.0 / 1.15, abs=1e-9)


def test_nested_box_inequality(step_nl):
    upper = cc.f_upper(step_nl, 5.1 / 1.02, 0.1)  # box [0, ~5.1]
    lower = cc.f_lower(step_nl, 1.2, 0.05, cc.ConeSpec(a=0.25, b=0.75, c=0.5))
    # lower box [0.5*1.15, 2.45] nests inside the upper box
    assert upper.value * upper.rho >= lower.value * lower.rho


def test_density_refinement_monotone():
    wiggly = cc.Nonlinearity(pieces=(
        cc.Piece(region=cc.parse_predicate("u < 1.15"),
                 f=cc.parse_expression("exp(-u) * (1 + t)")),
        cc.Piece(region=cc.parse_predicate("u >= 1.15"),
                 f=cc.parse_expression("2 + t * u")),
    ), curves=(cc.Curve(domain=(0, 1), gamma=1.15),))
    sups = [cc.f_upper(wiggly, 3.0, 0.5, density=d).value
            for d in (32, 64, 128, 256)]
    infs = [cc.f_lower(wiggly, 3.0, 0.5, SPEC, density=d).value
            for d in (32, 64, 128, 256)]
    assert all(a <= b + 1e-15 for a, b in zip(sups, sups[1:]))
    assert all(a >= b - 1e-15 for a, b in zip(infs, infs[1:]))


def test_growth_bound(step_nl):
    assert cc.growth_bound_value(step_nl, 20.0) == pytest.approx(81.0)
    assert cc.growth_bound_value(step_nl, 1.0) == pytest.approx(1.0)
    nl = cc.Nonlinearity(pieces=(cc.Piece(region=lambda t, u: np.ones_like(
        t, dtype=bool), f=1.0),), growth_bound=lambda r: 7.0)
    assert cc.growth_bound_value(nl, 3.0) == 7.0


# --- curve classification -------------------------------------------------

def test_viable_affine(grid101, unit_weight):
    nl = constant_nl(0.0)
    curve = cc.Curve(domain=(0, 1), gamma=cc.parse_expression(
        "0.3 * t + 0.1", ("t",)))
    rep = cc.check_curve_viable(curve, nl, unit_weight, grid101)
    assert rep.passed
    assert rep.gamma2_source == "finite_difference"


def test_viable_parabola(grid101, unit_weight):
    nl = constant_nl(1.0)
    curve = cc.Curve(domain=(0, 1),
                     gamma=cc.parse_expression("t * (1 - t) / 2", ("t",)))
    rep = cc.check_curve_viable(curve, nl, unit_weight, grid101, tol=1e-8)
    assert rep.passed
    curve_user = cc.Curve(domain=(0, 1),
                          gamma=cc.parse_expression("t * (1 - t) / 2", ("t",)),
                          gamma2=-1.0)
    rep = cc.check_curve_viable(curve_user, nl, unit_weight, grid101, tol=1e-12)
    assert rep.passed
    assert rep.gamma2_source == "user"


def test_not_viable_constant(grid101, unit_weight):
    nl = constant_nl(1.0)
    curve = cc.Curve(domain=(0, 1), gamma=0.5)
    rep = cc.check_curve_viable(curve, nl, unit_weight, grid101)
    assert not rep.passed


def test_inviable_band(grid101, unit_weight, step_nl):
    curve = cc.Curve(domain=(0, 1), gamma=1.15, kind="inviable",
                     eps=0.05, psi=0.5)
    rep = cc.check_curve_inviable(curve, step_nl, unit_weight, grid101)
    assert rep.passed
    assert rep.inequality == "second"
    # both one-sided values are probed at the jump: min margin comes from
    # the f = 1 branch, -0.5 - (-1) = 0.5
    assert rep.worst_margin == pytest.approx(0.5, abs=1e-12)


def test_not_inviable_zero_f(grid101, unit_weight):
    curve = cc.Curve(domain=(0, 1), gamma=0.5, kind="inviable",
                     eps=0.1, psi=0.5)
    rep = cc.check_curve_inviable(curve, constant_nl(0.0), unit_weight, grid101)
    assert not rep.passed


def test_inviable_needs_band_data(grid101, unit_weight, step_nl):
    curve = cc.Curve(domain=(0, 1), gamma=1.15)
    with pytest.raises(ConfigError):
        cc.check_curve_inviable(curve, step_nl, unit_weight, grid101)


def test_viable_inviable_mutually_exclusive(grid101, unit_weight):
    # when g f is far above psi + tol on the curve, the defining conditions
    # conflict pointwise: the step threshold passes exactly one check
    nl = make_step_nonlinearity()
    curve = nl.curves[0]
    viable = cc.check_curve_viable(curve, nl, unit_weight, grid101)
    inviable = cc.check_curve_inviable(curve, nl, unit_weight, grid101)
    assert not viable.passed
    assert inviable.passed


def test_classify_respects_declaration(grid101, unit_weight, step_nl):
    rep = cc.classify_curve(step_nl.curves[0], step_nl, unit_weight, grid101)
    assert rep.checked == "inviable"
    assert rep.passed

    unknown = cc.Curve(domain=(0, 1),
                       gamma=cc.parse_expression("t * (1 - t) / 2", ("t",)),
                       kind="unknown")
    rep = cc.classify_curve(unknown, constant_nl(1.0), unit_weight, grid101)
    assert rep.checked == "viable"
    assert rep.passed
