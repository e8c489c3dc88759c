import numpy as np
import pytest

import conecert as cc
from conecert.errors import DegenerateWeightError, OrderingError

from conftest import make_step_nonlinearity


def test_compute_m_ones(ones_kernel, grid401, unit_weight):
    assert cc.compute_m(ones_kernel, unit_weight, grid401) == \
        pytest.approx(1.0, abs=1e-12)


def test_compute_m_green(dirichlet_kernel, grid401, unit_weight):
    assert cc.compute_m(dirichlet_kernel, unit_weight, grid401) == \
        pytest.approx(8.0, rel=1e-5)


def test_compute_m_degenerate(dirichlet_kernel, grid401):
    with pytest.raises(DegenerateWeightError):
        cc.compute_m(dirichlet_kernel, cc.Weight.constant(0.0), grid401)


def test_compute_M_ones(ones_kernel, grid401, unit_weight):
    spec = cc.ConeSpec(a=0.25, b=0.75, c=1.0)
    assert cc.compute_M(ones_kernel, unit_weight, spec, grid401) == \
        pytest.approx(2.0, abs=1e-12)
    full = cc.ConeSpec(a=0.0, b=1.0, c=1.0)
    assert cc.compute_M(ones_kernel, unit_weight, full, grid401) == \
        pytest.approx(1.0, abs=1e-12)


def test_compute_M_green(dirichlet_kernel, grid401, unit_weight):
    assert cc.compute_M(dirichlet_kernel, unit_weight, dirichlet_kernel.cone,
                        grid401) == pytest.approx(16.0, rel=1e-4)


def test_certify_step_example(step_certificate):
    cert = step_certificate
    assert cert.verdict == "certified"
    assert cert.branch == "b"
    assert cert.annulus == (1.0, 5.0)
    assert cert.m == pytest.approx(8.0, rel=1e-6)
    assert cert.M_ab == pytest.approx(16.0, rel=1e-6)
    assert cert.f_upper_at_rho.value == pytest.approx(1.0, abs=1e-6)
    assert cert.f_lower_at_rho.value == pytest.approx(16.2, abs=1e-6)
    names = {c.name: c for c in cert.conditions}
    assert names["f_upper_below_m_at_rho1"].passed
    assert names["f_upper_below_m_at_rho1"].margin == pytest.approx(7.0, rel=1e-6)
    assert names["f_lower_above_M_at_rho2"].passed
    assert names["f_lower_above_M_at_rho2"].margin == pytest.approx(0.2, rel=1e-5)
    assert names["curves_admissible"].passed
    assert len(cert.curve_reports) == 1
    assert cert.curve_reports[0].inequality == "second"


def test_certify_zero_f_fails(dirichlet_kernel, grid401, unit_weight):
    nl = cc.Nonlinearity(pieces=(
        cc.Piece(region=lambda t, u: np.ones_like(t, dtype=bool), f=0.0),))
    prob = cc.make_problem(dirichlet_kernel, unit_weight, nl, grid401)
    cert = cc.certify(prob, 1.0, 5.0, 0.1)
    assert cert.verdict == "not_certified"
    failing = [c for c in cert.conditions if not c.passed]
    assert any("f_lower" in c.name for c in failing)


def test_certify_equal_radii_rejected(step_problem):
    with pytest.raises(OrderingError):
        cc.certify(step_problem, 2.0, 2.0, 0.1)


def test_certify_no_admissible_ordering(step_problem):
    with pytest.raises(OrderingError):
        cc.certify(step_problem, 5.0, 1.0, 0.1)


def test_certify_branch_a_ordering(step_problem):
    # rho1/c = 4 < rho2 = 5 admits branch (a), but its lower condition at
    # rho1 = 1 fails: the certificate records the near-miss honestly
    cert = cc.certify(step_problem, 1.0, 5.0, 0.1, branch="a")
    assert cert.branch == "a"
    assert cert.verdict == "not_certified"


def test_certify_auto_branch_picks_b(step_problem):
    cert = cc.certify(step_problem, 1.0, 5.0, 0.1, branch=None)
    assert cert.branch == "b"
    assert cert.certified


def test_curve_misdeclaration_blocks_certificate(dirichlet_kernel, grid401,
                                                 unit_weight):
    nl = make_step_nonlinearity()
    bad_nl = cc.Nonlinearity(
        pieces=nl.pieces,
        curves=(cc.Curve(domain=(0, 1), gamma=1.15, kind="viable"),),
    )
    prob = cc.make_problem(dirichlet_kernel, unit_weight, bad_nl, grid401)
    cert = cc.certify(prob, 1.0, 5.0, 0.1, branch="b")
    assert cert.verdict == "not_certified"
    names = {c.name: c for c in cert.conditions}
    assert not names["curves_admissible"].passed


def test_scaling_halves_constants(dirichlet_kernel, grid401, unit_weight):
    m1 = cc.compute_m(dirichlet_kernel, unit_weight, grid401)
    M1 = cc.compute_M(dirichlet_kernel, unit_weight, dirichlet_kernel.cone,
                      grid401)
    double = cc.Weight.constant(2.0)
    m2 = cc.compute_m(dirichlet_kernel, double, grid401)
    M2 = cc.compute_M(dirichlet_kernel, double, dirichlet_kernel.cone, grid401)
    assert m2 == pytest.approx(m1 / 2.0, rel=1e-10)
    assert M2 == pytest.approx(M1 / 2.0, rel=1e-10)


def test_m_below_M(dirichlet_kernel, grid401):
    for wfn in (lambda s: np.ones_like(s), lambda s: 1.0 + s,
                lambda s: np.exp(-s)):
        w = cc.Weight(fn=wfn)
        m = cc.compute_m(dirichlet_kernel, w, grid401)
        M = cc.compute_M(dirichlet_kernel, w, dirichlet_kernel.cone, grid401)
        assert m <= M + 1e-12


def test_eps_growth_weakens_conditions(step_nl, step_problem):
    # enlarging eps can only raise the sup bound and lower the inf bound,
    # so a failing condition cannot flip to passing
    spec = step_problem.cone
    for r, e1, e2 in [(1.0, 0.05, 0.2), (5.0, 0.05, 0.2)]:
        assert cc.f_upper(step_nl, r, e2).value >= \
            cc.f_upper(step_nl, r, e1).value - 1e-15
        assert cc.f_lower(step_nl, r, e2, spec).value <= \
            cc.f_lower(step_nl, r, e1, spec).value + 1e-15
    low1 = cc.f_lower(step_nl, 1.0, 0.1, spec).value
    assert low1 < 16.0  # fails at eps = 0.1 ...
    assert cc.f_lower(step_nl, 1.0, 0.3, spec).value <= low1  # ... and stays failing


def test_certificate_json_deterministic(step_problem):
    a = cc.certificate_json(cc.certify(step_problem, 1.0, 5.0, 0.1, branch="b"))
    b = cc.certificate_json(cc.certify(step_problem, 1.0, 5.0, 0.1, branch="b"))
    assert a == b
    assert a.endswith("\n")


def test_certificate_dict_keys(step_certificate):
    d = cc.certificate_to_dict(step_certificate)
    for key in ("m", "M_ab", "rho1", "rho2", "eps", "branch", "conditions",
                "annulus", "verdict", "f_upper_at_rho", "f_lower_at_rho",
                "curve_reports", "margin"):
        assert key in d
    assert d["annulus"] == [1.0, 5.0]
    assert d["f_lower_at_rho"]["method"] == "sampled"
