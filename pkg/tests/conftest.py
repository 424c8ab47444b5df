import numpy as np
import pytest

from mlfg import (
    FollowerSpec,
    GameSpec,
    HomotopyConfig,
    LeaderSpec,
    homotopy_solve,
    load_bundled,
)


@pytest.fixture(scope="session")
def ds1():
    return load_bundled(1)


@pytest.fixture(scope="session")
def ds2():
    return load_bundled(2)


@pytest.fixture(scope="session")
def trace1(ds1):
    return homotopy_solve(ds1)


@pytest.fixture(scope="session")
def trace2(ds2):
    return homotopy_solve(ds2)


@pytest.fixture(scope="session")
def trace1_no_predictor(ds1):
    return homotopy_solve(ds1, cfg=HomotopyConfig(taylor=False))


def make_game(Q_list, c_list, A_list, b_list, Qy, B, L, a) -> GameSpec:
    leaders = tuple(
        LeaderSpec(Q=Q, c=c, A=A, b=b) for Q, c, A, b in zip(Q_list, c_list, A_list, b_list)
    )
    return GameSpec(leaders=leaders, follower=FollowerSpec(Qy_diag=Qy, B=B, L=L, a=a))


@pytest.fixture
def quadratic_game():
    """Two leaders, zero response weights, constraints inactive everywhere
    relevant: the equilibrium is the unconstrained quadratic optimum."""
    Q1 = np.array([[2.0, 0.5], [0.5, 1.5]])
    Q2 = np.array([[3.0, 0.0], [0.0, 1.0]])
    c1 = np.array([1.0, -2.0])
    c2 = np.array([0.5, 0.5])
    A = np.array([[1.0, 0.0], [0.0, 1.0]])
    b = np.array([-50.0, -50.0])
    B = np.ones((4, 2))
    L = np.zeros((4, 2))
    return make_game(
        [Q1, Q2], [c1, c2], [A, A], [b, b], np.array([1.0, 2.0]), B, L, np.zeros(2)
    )
