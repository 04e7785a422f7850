import math

import numpy as np
import pytest

from oracles import error_measure, series_j, series_y
from phaseless_rtm.errors import DomainError, SingularityError
from phaseless_rtm.specfun import (
    bessel_j,
    bessel_j_orders,
    bessel_y,
    bessel_y_orders,
    fundamental_solution,
    fundamental_solution_gradient,
    hankel1,
    hankel1_01,
    hankel1_orders,
)

ORDERS = [0, 1, 2, 3, 7, 10, 25, 60, 119, 120]
ARGS = [1e-8, 1e-3, 0.3, 1.0, 2.5, 7.0, 11.9, 12.1, 19.99, 20.01, 33.3, 75.0, 100.0, 250.0, 640.0, 1000.0]


@pytest.fixture(scope="module")
def oracle_table():
    table = {}
    for n in ORDERS:
        for t in ARGS:
            table[n, t] = (series_j(n, t), series_y(n, t))
    return table


def test_j_at_origin():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j(7, 0.0) == 0.0


def test_j0_at_one_matches_power_series():
    # plain double-precision series, summed until the terms stop mattering
    total, term, m = 1.0, 1.0, 0
    while abs(term) > 1e-18:
        m += 1
        term *= -0.25 / (m * m)
        total += term
    assert abs(bessel_j(0, 1.0) - total) <= 1e-15


def test_j_accuracy_against_series(oracle_table):
    worst = 0.0
    for (n, t), (j_ref, y_ref) in oracle_table.items():
        val = bessel_j(n, t)
        if j_ref == 0.0:
            assert abs(val) < 1e-300
            continue
        worst = max(worst, error_measure(val, j_ref, y_ref, n, t))
    assert worst <= 1e-12, worst


def test_y_accuracy_against_series(oracle_table):
    worst = 0.0
    checked = 0
    for (n, t), (j_ref, y_ref) in oracle_table.items():
        if not math.isfinite(y_ref) or abs(y_ref) > 1e300:
            continue
        val = bessel_y(n, t)
        worst = max(worst, error_measure(val, y_ref, j_ref, n, t))
        checked += 1
    assert checked > 100
    assert worst <= 1e-10, worst


def test_y1_at_one_from_series():
    assert abs(bessel_y(1, 1.0) - series_y(1, 1.0)) <= 1e-10 * abs(series_y(1, 1.0))


def test_y0_log_singularity_is_bounded():
    ts = np.logspace(-8, -1, 30)
    rest = bessel_y(0, ts) - (2 / np.pi) * np.log(ts / 2)
    ref = np.array([series_y(0, t) for t in ts]) - (2 / np.pi) * np.log(ts / 2)
    assert np.all(np.abs(rest) < 1.0)
    np.testing.assert_allclose(rest, ref, rtol=0, atol=1e-12)
    # the bounded part tends to 2 gamma / pi
    assert abs(rest[0] - 2 * 0.5772156649015329 / np.pi) < 1e-12


def _derivatives(n, t):
    j = bessel_j_orders(n + 1, t)
    y = bessel_y_orders(n + 1, t)
    jp = n / t * j[n] - j[n + 1]
    yp = n / t * y[n] - y[n + 1]
    return j[n], jp, y[n], yp


def test_wronskian_at_two():
    j, jp, y, yp = _derivatives(0, 2.0)
    assert abs(j * yp - jp * y - 2 / (2 * np.pi)) <= 1e-12


def test_wronskian_identity_over_range():
    ts = np.concatenate([np.linspace(0.1, 100, 400), [19.999, 20.0, 20.001]])
    for n in range(11):
        j, jp, y, yp = _derivatives(n, ts)
        w = j * yp - jp * y
        expected = 2 / (np.pi * ts)
        assert np.max(np.abs(w / expected - 1)) <= 1e-10, n


def test_hankel_is_j_plus_iy():
    assert hankel1(0, 1.0) == complex(bessel_j(0, 1.0), bessel_y(0, 1.0))
    t = np.linspace(0.5, 60, 50)
    np.testing.assert_array_equal(hankel1(3, t), bessel_j(3, t) + 1j * bessel_y(3, t))
    h0, h1 = hankel1_01(t)
    np.testing.assert_allclose(h0, hankel1(0, t), rtol=1e-14)
    np.testing.assert_allclose(h1, hankel1(1, t), rtol=1e-14)


def test_orders_stack_consistent():
    t = np.array([0.7, 13.0, 42.0])
    h = hankel1_orders(12, t)
    assert h.shape == (13, 3)
    for n in (0, 5, 12):
        np.testing.assert_allclose(h[n], hankel1(n, t), rtol=1e-15)


def test_hankel0_upper_bound():
    t = np.logspace(-2, 2, 400)
    assert np.all(np.abs(hankel1(0, t)) <= np.sqrt(2 / (np.pi * t)))


def test_hankel0_log_lower_bound():
    t = np.linspace(1e-6, 1 - 1e-6, 500)
    assert np.all(np.abs(hankel1(0, t)) >= 2 / (5 * np.pi * np.e) * np.abs(np.log(t)))


def test_t_times_hankel_squared_increasing():
    t = np.linspace(1e-4, 100, 5000)
    g = t * np.abs(hankel1(0, t)) ** 2
    assert np.all(np.diff(g) >= 0)


def test_hankel1_bound():
    t = np.logspace(-2, 2, 400)
    assert np.all(np.abs(hankel1(1, t)) <= np.sqrt(2 / (np.pi * t)) + 2 / (np.pi * t))


def test_domain_errors():
    with pytest.raises(DomainError):
        bessel_j(0, -1.0)
    with pytest.raises(DomainError):
        bessel_j(121, 1.0)
    with pytest.raises(DomainError):
        bessel_j(1.5, 1.0)
    with pytest.raises(DomainError):
        bessel_y(0, 0.0)
    with pytest.raises(DomainError):
        bessel_y(0, -2.0)
    with pytest.raises(DomainError):
        hankel1(0, 0.0)
    # the ceiling is configurable
    assert np.isfinite(bessel_j(150, 200.0, max_order=200))


def test_fundamental_solution_at_unit_argument():
    k = 2.0
    val = fundamental_solution(k, (0.0, 0.0), (0.5, 0.0))
    assert abs(val.real - (-series_y(0, 1.0) / 4)) <= 1e-14
    assert abs(val.imag - series_j(0, 1.0) / 4) <= 1e-14


def test_fundamental_solution_symmetry_and_singularity():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(20, 2))
    y = rng.normal(size=(20, 2))
    np.testing.assert_array_equal(fundamental_solution(3.0, x, y), fundamental_solution(3.0, y, x))
    with pytest.raises(SingularityError):
        fundamental_solution(1.0, (0.3, 0.4), (0.3, 0.4))
    with pytest.raises(SingularityError):
        fundamental_solution_gradient(1.0, (0.3, 0.4), (0.3, 0.4))
    with pytest.raises(DomainError):
        fundamental_solution(0.0, (0.0, 0.0), (1.0, 0.0))


def test_gradient_antisymmetry():
    x, y = np.array([0.2, -1.0]), np.array([1.5, 0.7])
    gy = fundamental_solution_gradient(4.0, x, y)
    gx = fundamental_solution_gradient(4.0, y, x)
    np.testing.assert_allclose(gy, -gx, rtol=1e-15)


def test_gradient_against_finite_difference():
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(20):
        k = rng.uniform(0.5, 20)
        x = rng.uniform(-2, 2, 2)
        y = x + rng.uniform(0.3, 3) * np.array([np.cos(a := rng.uniform(0, 6.3)), np.sin(a)])
        grad = fundamental_solution_gradient(k, x, y)
        d = rng.normal(size=2)
        d /= np.linalg.norm(d)
        fd = (fundamental_solution(k, x, y + h * d) - fundamental_solution(k, x, y - h * d)) / (2 * h)
        exact = grad @ d
        assert abs(fd - exact) <= 1e-6 * max(abs(exact), np.linalg.norm(grad))


def test_gradient_magnitude_bound():
    k = 3.0
    r = np.logspace(-2, 2, 200) / k
    y = np.stack([r, np.zeros_like(r)], -1)
    g = np.linalg.norm(np.abs(fundamental_solution_gradient(k, np.zeros(2), y)), axis=-1)
    t = k * r
    assert np.all(g <= k / 4 * (np.sqrt(2 / (np.pi * t)) + 2 / (np.pi * t)) * (1 + 1e-14))


def test_helmholtz_five_point_laplacian():
    rng = np.random.default_rng(7)
    h = 1e-4
    for _ in range(25):
        k = rng.uniform(1, 15)
        y = rng.uniform(-1, 1, 2)
        r = rng.uniform(1 / k, 5)
        a = rng.uniform(0, 2 * np.pi)
        x = y + r * np.array([np.cos(a), np.sin(a)])
        pts = np.array([x, x + (h, 0), x - (h, 0), x + (0, h), x - (0, h)])
        v = fundamental_solution(k, pts, y)
        lap = (v[1] + v[2] + v[3] + v[4] - 4 * v[0]) / h**2
        assert abs(lap + k**2 * v[0]) <= 1e-4 * abs(v[0])


def test_vectorised_shapes():
    t = np.linspace(0.1, 30, 12).reshape(3, 4)
    assert bessel_j(2, t).shape == (3, 4)
    assert bessel_y(2, t).shape == (3, 4)
    assert isinstance(bessel_j(0, 1.0), float)
    assert isinstance(hankel1(0, 1.0), complex)
