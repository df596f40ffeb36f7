import math

import mpmath
import numpy as np
import pytest

from ablevinson.cylfn import bessel_j, bessel_y, eval_pair, wronskian_residual
from ablevinson.errors import DomainError

mpmath.mp.dps = 40


def _ref(order, x):
    nu, xx = mpmath.mpf(order), mpmath.mpf(x)
    return (
        float(mpmath.besselj(nu, xx)),
        float(mpmath.bessely(nu, xx)),
        float(mpmath.besselj(nu, xx, derivative=1)),
        float(mpmath.diff(lambda t: mpmath.bessely(nu, t), xx)),
    )


def _close(a, b, rel=1e-12, scale=1.0):
    return abs(a - b) <= rel * max(abs(b), scale)


@pytest.mark.parametrize("order", [0.0, 0.3, 0.5, 1.0, 2.0, 3.7, 7.0, 12.5])
@pytest.mark.parametrize("x", [1e-3, 0.1, 1.0, 1.99, 2.0, 5.0, 17.3, 24.9, 30.0, 300.0])
def test_matches_mpmath(order, x):
    e = eval_pair(order, x)
    j, y, jp, yp = _ref(order, x)
    # relative to the envelope of the pair, which is what matching relies on
    env = math.hypot(j, y)
    envp = math.hypot(jp, yp)
    assert abs(e.j - j) <= 1e-12 * env
    assert abs(e.y - y) <= 1e-12 * env
    assert abs(e.jp - jp) <= 1e-11 * envp
    assert abs(e.yp - yp) <= 1e-11 * envp


def test_known_values():
    # mpmath-derived references
    assert bessel_j(1, 1.0) == pytest.approx(0.44005058574493351596, rel=1e-14)
    assert bessel_y(0, 1.0) == pytest.approx(0.088256964215676957983, rel=1e-13)
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(2.5, 0.0) == 0.0


@pytest.mark.parametrize("x", [0.05, 0.7, 1.9, 2.1, 9.0, 26.0, 120.0])
def test_half_integer_closed_forms(x):
    amp = math.sqrt(2.0 / (math.pi * x))
    s, c = math.sin(x), math.cos(x)
    e = eval_pair(0.5, x)
    assert _close(e.j, amp * s, scale=amp)
    assert _close(e.y, -amp * c, scale=amp)
    j32 = amp * (s / x - c)
    y32 = -amp * (c / x + s)
    e = eval_pair(1.5, x)
    assert _close(e.j, j32, scale=amp)
    assert _close(e.y, y32, scale=amp * max(1.0, 1.0 / x))


def test_wronskian_random():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        order = rng.uniform(0.0, 20.0)
        x = 10.0 ** rng.uniform(-2.0, 3.0)
        worst = max(worst, wronskian_residual(order, x))
    assert worst <= 1e-10


@pytest.mark.parametrize("order", [0.0, 0.5, 1.0, 4.3, 15.0])
def test_continuity_across_regimes(order):
    # the series/Steed switch at x = 2 and the Hankel switch at x_asym
    for x0 in (2.0, max(25.0, 0.12 * order * order)):
        dx = 1e-9 * x0
        lo = eval_pair(order, x0 - dx)
        hi = eval_pair(order, x0)
        env = math.hypot(hi.j, hi.y)
        # first-order Taylor step across the switch; the remainder is O(dx^2)
        assert abs(lo.j - (hi.j - hi.jp * dx)) <= 1e-11 * env
        assert abs(lo.y - (hi.y - hi.yp * dx)) <= 1e-11 * env


def test_small_argument_log_growth():
    e = eval_pair(0.0, 1e-3)
    assert e.y < -4.0
    assert e.j == pytest.approx(1.0, abs=1e-6)


def test_large_argument_modulus():
    e = eval_pair(3.7, 40.0)
    assert e.j**2 + e.y**2 == pytest.approx(2.0 / (math.pi * 40.0), rel=1e-2)


def test_integer_order_limit_is_smooth():
    x = 0.8
    a = eval_pair(1.0, x).y
    b = eval_pair(1.0 + 1e-9, x).y
    assert abs(a - b) <= 1e-7 * abs(a)


@pytest.mark.parametrize("bad", [(-0.5, 1.0), (1.0, -1.0), (math.nan, 1.0), (1.0, math.inf)])
def test_domain_errors(bad):
    with pytest.raises(DomainError):
        eval_pair(*bad)


def test_y_singular_at_zero():
    with pytest.raises(DomainError):
        bessel_y(0.0, 0.0)
    with pytest.raises(DomainError):
        eval_pair(1.0, 0.0)
