import numpy as np
import pytest

import conecert as cc


@pytest.fixture(scope="session")
def grid401():
    return cc.uniform_grid(401)


@pytest.fixture(scope="session")
def grid101():
    return cc.uniform_grid(101)


@pytest.fixture(scope="session")
def unit_weight():
    return cc.Weight.constant(1.0)


@pytest.fixture(scope="session")
def dirichlet_bc():
    return cc.BoundaryParams(alpha=1.0, beta=0.0, gamma=1.0, delta=0.0)


@pytest.fixture(scope="session")
def dirichlet_kernel(dirichlet_bc):
    return cc.green_kernel(dirichlet_bc, 0.25, 0.75)


def make_step_nonlinearity():
    return cc.Nonlinearity(
        pieces=(
            cc.Piece(region=cc.parse_predicate("u < 1.15"),
                     f=cc.parse_expression("1"), label="low"),
            cc.Piece(region=cc.parse_predicate("u >= 1.15"),
                     f=cc.parse_expression("81"), label="high"),
        ),
        curves=(
            cc.Curve(domain=(0.0, 1.0), gamma=1.15, kind="inviable",
                     eps=0.05, psi=0.5, label="threshold"),
        ),
    )


@pytest.fixture(scope="session")
def step_nl():
    return make_step_nonlinearity()


@pytest.fixture(scope="session")
def step_problem(dirichlet_kernel, unit_weight, step_nl, grid401):
    return cc.make_problem(dirichlet_kernel, unit_weight, step_nl, grid401)


@pytest.fixture(scope="session")
def step_certificate(step_problem):
    return cc.certify(step_problem, 1.0, 5.0, 0.1, branch="b")


@pytest.fixture(scope="session")
def ones_kernel():
    """k ≡ 1 with envelope 1 and the full-interval cone at c = 1."""

    def ev(t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        return np.ones(np.broadcast_shapes(t.shape, s.shape))

    return cc.Kernel(
        eval=ev,
        phi=lambda s: np.ones_like(np.asarray(s, dtype=float)),
        cone=cc.ConeSpec(a=0.0, b=1.0, c=1.0),
        split_at_diagonal=False,
        label="ones",
    )


STEP_CONFIG = """\
[problem]
name = step-demo

[bc]
alpha = 1
beta = 0
gamma = 1
delta = 0

[cone]
a = 0.25
b = 0.75

[weight]
expr = 1

[grid]
n = 401

[piece.1]
region = u < 1.15
f = 1

[piece.2]
region = u >= 1.15
f = 81

[curve.1]
gamma = 1.15
domain = 0, 1
kind = inviable
eps = 0.05
psi = 0.5

[certify]
rho1 = 1
rho2 = 5
eps = 0.1
branch = b
margin = 1e-8

[solve]
theta = 0.5
tol = 1e-8
max_iter = 200
init = annulus
"""


@pytest.fixture()
def step_config_text():
    return STEP_CONFIG
