import numpy as np
import pytest

from singmin.geometry import GraphFn


def _paraboloid():
    return GraphFn(
        lambda x: x[0] ** 2 + x[1] ** 2,
        2,
        grad=lambda x: np.array([2 * x[0], 2 * x[1]]),
        hess=lambda x: 2 * np.eye(2),
        name="paraboloid",
    )


def _scherk():
    return GraphFn(
        lambda x: np.log(np.cos(x[0]) / np.cos(x[1])),
        2,
        grad=lambda x: np.array([-np.tan(x[0]), np.tan(x[1])]),
        hess=lambda x: np.diag([-1 / np.cos(x[0]) ** 2, 1 / np.cos(x[1]) ** 2]),
        name="scherk",
    )


def _sphere(n, r=3.0):
    def f(x):
        return np.sqrt(r * r - x @ x)

    def g(x):
        return -x / f(x)

    def h(x):
        v = f(x)
        return -np.eye(n) / v - np.outer(x, x) / v**3

    return GraphFn(f, n, grad=g, hess=h, name=f"sphere{n}")


def _trig():
    return GraphFn(
        lambda x: np.sin(x[0]) * np.cos(x[1]) + x[0] * x[1],
        2,
        grad=lambda x: np.array([np.cos(x[0]) * np.cos(x[1]) + x[1], -np.sin(x[0]) * np.sin(x[1]) + x[0]]),
        hess=lambda x: np.array(
            [
                [-np.sin(x[0]) * np.cos(x[1]), -np.cos(x[0]) * np.sin(x[1]) + 1],
                [-np.cos(x[0]) * np.sin(x[1]) + 1, -np.sin(x[0]) * np.cos(x[1])],
            ]
        ),
        name="trig",
    )


def _exp3():
    a = np.array([0.5, -0.3, 0.2])
    return GraphFn(
        lambda x: np.exp(a @ x),
        3,
        grad=lambda x: a * np.exp(a @ x),
        hess=lambda x: np.outer(a, a) * np.exp(a @ x),
        name="exp3",
    )


def _cubic3():
    return GraphFn(
        lambda x: x[0] ** 3 + x[0] * x[1] * x[2] + x[2] ** 2,
        3,
        grad=lambda x: np.array([3 * x[0] ** 2 + x[1] * x[2], x[0] * x[2], x[0] * x[1] + 2 * x[2]]),
        hess=lambda x: np.array([[6 * x[0], x[2], x[1]], [x[2], 0.0, x[0]], [x[1], x[0], 2.0]]),
        name="cubic3",
    )


ANALYTIC = {
    "paraboloid": _paraboloid,
    "scherk": _scherk,
    "sphere3": lambda: _sphere(3),
    "trig": _trig,
    "exp3": _exp3,
    "cubic3": _cubic3,
}


@pytest.fixture(params=sorted(ANALYTIC))
def analytic_fn(request):
    return ANALYTIC[request.param]()


def probe_points(f, count, seed=0, radius=1.0):
    """Random probes inside a ball of the given radius (Scherk needs |x_i| < pi/2)."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-radius, radius, size=(count, f.n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
