import numpy as np
import pytest
from hypothesis import settings

from mpqp.problem import MpqpProblem

settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")

P1_JSON = '{"s":1,"m":1,"n":1,"H":[[1.0]],"G":[[-1.0]],"W":[0.0],"S":[[-1.0]]}'


def make_p1():
    """min 1/2 z^2 s.t. z >= x, so V(x) = 1/2 max(x, 0)^2."""
    return MpqpProblem(H=[[1.0]], G=[[-1.0]], W=[0.0], S=[[-1.0]])


def make_p2():
    """Separable 2D problem: z_i <= 1 + x_i."""
    return MpqpProblem(H=np.eye(2), G=np.eye(2), W=np.ones(2), S=np.eye(2))


def make_duplicated():
    """P2 with its first constraint repeated, so LICQ fails on a whole region."""
    G = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return MpqpProblem(H=np.eye(2), G=G, W=np.ones(3), S=G.copy())


def make_unconstrained(n=2):
    return MpqpProblem(H=np.eye(2), G=np.zeros((0, 2)), W=np.zeros(0), S=np.zeros((0, n)))


@pytest.fixture
def p1():
    return make_p1()


@pytest.fixture
def p2():
    return make_p2()


@pytest.fixture
def duplicated():
    return make_duplicated()


@pytest.fixture
def unconstrained():
    return make_unconstrained()


@pytest.fixture
def problem_files(tmp_path):
    from mpqp.problem import save_problem

    paths = {}
    for name, factory in (("p1", make_p1), ("p2", make_p2), ("dup", make_duplicated),
                          ("free", make_unconstrained)):
        path = tmp_path / f"{name}.json"
        path.write_text(save_problem(factory()))
        paths[name] = str(path)
    return paths
