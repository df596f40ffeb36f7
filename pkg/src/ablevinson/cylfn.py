"""Cylinder functions J_nu, Y_nu and their derivatives for real order nu >= 0.

Three regimes are used:

* ``x < 2``: the ascending power series for J, and Temme's series for Y at
  the order reduced to |mu| <= 1/2 (this evaluates the integer-order limit
  of the reflection formula without cancellation) followed by upward
  recurrence.
* ``2 <= x < x_asym(nu)``: Steed's method (two continued fractions closed by
  the Wronskian).
* ``x >= x_asym(nu)``: Hankel asymptotic expansion, with derivatives from
  ``C'_nu = C_{nu-1} - (nu/x) C_nu``.

All functions act on Python floats; use :func:`numpy.vectorize` for arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = ["CylEval", "bessel_j", "bessel_y", "eval_pair", "wronskian_residual"]

_EPS = 1e-16
_FPMIN = 1e-300
_BIG = 1e250
_MAXIT = 100000
_XMIN = 2.0

# Taylor coefficients of 1/Gamma(z) = sum_k c_k z^k, k >= 1.
_RGAMMA = (
    1.0,
    0.57721566490153286061,
    -0.65587807152025388108,
    -0.042002635034095235529,
    0.1665386113822914895,
    -0.042197734555544336748,
    -0.0096219715278769735621,
    0.0072189432466630995424,
    -0.0011651675918590651121,
    -0.00021524167411495097282,
    0.00012805028238811618615,
    -0.000020134854780788238656,
    -1.2504934821426706573e-6,
    1.1330272319816958824e-6,
    -2.0563384169776071035e-7,
    6.1160951044814158179e-9,
    5.0020076444692229301e-9,
    -1.1812745704870201446e-9,
    1.0434267116911005105e-10,
    7.782263439905071254e-12,
    -3.6968056186422057082e-12,
    5.100370287454475979e-13,
    -2.0583260535665067832e-14,
    -5.3481225394230179824e-15,
    1.2267786282382607902e-15,
    -1.1812593016974587695e-16,
)


@dataclass(frozen=True)
class CylEval:
    """J, Y and their x-derivatives at one (order, argument) pair."""

    j: float
    y: float
    jp: float
    yp: float


def _check(order: float, x: float) -> tuple[float, float]:
    order = float(order)
    x = float(x)
    if not (math.isfinite(order) and math.isfinite(x)):
        raise DomainError(f"non-finite argument (order={order}, x={x})")
    if order < 0.0:
        raise DomainError(f"order must be non-negative, got {order}")
    if x < 0.0:
        raise DomainError(f"argument must be non-negative, got {x}")
    return order, x


def _temme_gammas(mu: float) -> tuple[float, float, float, float]:
    """Return (gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu)) for |mu| <= 1/2."""
    mu2 = mu * mu
    odd = 0.0  # sum over odd k of c_k mu^(k-1)
    even = 0.0  # sum over even k of c_k mu^(k-2)
    for k in range(len(_RGAMMA), 0, -1):
        if k % 2:
            odd = odd * mu2 + _RGAMMA[k - 1]
        else:
            even = even * mu2 + _RGAMMA[k - 1]
    # 1/Gamma(1 +- mu) = odd +- mu * even
    return -even, odd, odd + mu * even, odd - mu * even


def _x_asym(order: float) -> float:
    return max(25.0, 0.12 * order * order)


def _hankel_pq(order: float, x: float) -> tuple[float, float]:
    """Hankel P, Q series, truncated at the smallest term past k ~ nu."""
    four_nu2 = 4.0 * order * order
    p = 1.0
    q = 0.0
    term = 1.0
    prev = math.inf
    k = 0
    while True:
        k += 1
        term *= (four_nu2 - (2 * k - 1) ** 2) / (k * 8.0 * x)
        a = abs(term)
        if a == 0.0 or (a > prev and 2 * k - 1 > 2.0 * order):
            break
        # k odd -> Q with sign (-1)^((k-1)/2); k even -> P with sign (-1)^(k/2)
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += term if (k // 2) % 2 == 0 else -term
        if a < _EPS * 1e-2 * min(abs(p), 1.0):
            break
        prev = a
        if k > 400:
            break
    return p, q


def _hankel_jy(order: float, x: float) -> tuple[float, float]:
    p, q = _hankel_pq(order, x)
    chi = x - (0.5 * order + 0.25) * math.pi
    c = math.cos(chi)
    s = math.sin(chi)
    amp = math.sqrt(2.0 / (math.pi * x))
    return amp * (p * c - q * s), amp * (p * s + q * c)


def _asymptotic(order: float, x: float) -> CylEval:
    j, y = _hankel_jy(order, x)
    jm, ym = _hankel_jy(order - 1.0, x)
    return CylEval(j, y, jm - order / x * j, ym - order / x * y)


def _power_series_j(order: float, x: float) -> tuple[float, float]:
    """J_nu(x) and J'_nu(x) from the ascending series; intended for x < 2."""
    half = 0.5 * x
    lead = half**order / math.gamma(order + 1.0) if order < 170.0 else 0.0
    if lead == 0.0 or not math.isfinite(lead):
        lead = math.exp(order * math.log(half) - math.lgamma(order + 1.0))
    q = -half * half
    term = lead
    j = term
    jp = term * order
    k = 0
    while True:
        k += 1
        term *= q / (k * (order + k))
        j += term
        jp += term * (order + 2 * k)
        if abs(term) <= _EPS * 1e-2 * abs(j):
            break
    return j, jp / x


def _steed_temme(xnu: float, x: float) -> CylEval:
    """Simultaneous J, Y, J', Y' for x > 0 by Temme/Steed (CF1 + CF2 or series)."""
    if x < _XMIN:
        nl = int(xnu + 0.5)
    else:
        nl = max(0, int(xnu - x + 1.5))
    xmu = xnu - nl
    xmu2 = xmu * xmu
    xi = 1.0 / x
    xi2 = 2.0 * xi
    w = xi2 / math.pi

    # CF1: f_nu = J'_nu / J_nu by modified Lentz
    isign = 1
    h = xnu * xi
    if h < _FPMIN:
        h = _FPMIN
    b = xi2 * xnu
    d = 0.0
    c = h
    for _ in range(_MAXIT):
        b += xi2
        d = b - d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b - 1.0 / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = c * d
        h *= delta
        if d < 0.0:
            isign = -isign
        if abs(delta - 1.0) < _EPS:
            break
    else:
        raise DomainError(f"continued fraction CF1 did not converge (nu={xnu}, x={x})")

    # downward recurrence from nu to mu, unnormalised
    rjl = float(isign)
    rjpl = h * rjl
    rjl1 = rjl
    rjp1 = rjpl
    fact = xnu * xi
    for _ in range(nl, 0, -1):
        rjtemp = fact * rjl + rjpl
        fact -= xi
        rjpl = fact * rjtemp - rjl
        rjl = rjtemp
        if abs(rjl) > _BIG:
            rjl /= _BIG
            rjpl /= _BIG
            rjl1 /= _BIG
            rjp1 /= _BIG
    if rjl == 0.0:
        rjl = _EPS
    f = rjpl / rjl

    if x < _XMIN:
        x2 = 0.5 * x
        pimu = math.pi * xmu
        fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
        d = -math.log(x2)
        e = xmu * d
        fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
        gam1, gam2, gampl, gammi = _temme_gammas(xmu)
        ff = 2.0 / math.pi * fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
        e = math.exp(e)
        p = e / (gampl * math.pi)
        q = 1.0 / (e * math.pi * gammi)
        pimu2 = 0.5 * pimu
        fact3 = 1.0 if abs(pimu2) < _EPS else math.sin(pimu2) / pimu2
        r = math.pi * pimu2 * fact3 * fact3
        c = 1.0
        d = -x2 * x2
        total = ff + r * q
        total1 = p
        for i in range(1, _MAXIT):
            ff = (i * ff + p + q) / (i * i - xmu2)
            c *= d / i
            p /= i - xmu
            q /= i + xmu
            delta = c * (ff + r * q)
            total += delta
            del1 = c * p - i * delta
            total1 += del1
            if abs(delta) < (1.0 + abs(total)) * _EPS:
                break
        else:
            raise DomainError(f"Temme series did not converge (nu={xnu}, x={x})")
        rymu = -total
        ry1 = -total1 * xi2
        rymup = xmu * xi * rymu - ry1
        rjmu = w / (rymup - f * rymu)
    else:
        # CF2: p + iq = (J' + iY') / (J + iY), Steed's algorithm
        a = 0.25 - xmu2
        p = -0.5 * xi
        q = 1.0
        br = 2.0 * x
        bi = 2.0
        fact = a * xi / (p * p + q * q)
        cr = br + q * fact
        ci = bi + p * fact
        den = br * br + bi * bi
        dr = br / den
        di = -bi / den
        dlr = cr * dr - ci * di
        dli = cr * di + ci * dr
        temp = p * dlr - q * dli
        q = p * dli + q * dlr
        p = temp
        for i in range(2, _MAXIT):
            a += 2 * (i - 1)
            bi += 2.0
            dr = a * dr + br
            di = a * di + bi
            if abs(dr) + abs(di) < _FPMIN:
                dr = _FPMIN
            fact = a / (cr * cr + ci * ci)
            cr = br + cr * fact
            ci = bi - ci * fact
            if abs(cr) + abs(ci) < _FPMIN:
                cr = _FPMIN
            den = dr * dr + di * di
            dr /= den
            di /= -den
            dlr = cr * dr - ci * di
            dli = cr * di + ci * dr
            temp = p * dlr - q * dli
            q = p * dli + q * dlr
            p = temp
            if abs(dlr - 1.0) + abs(dli) < _EPS:
                break
        else:
            raise DomainError(f"continued fraction CF2 did not converge (nu={xnu}, x={x})")
        gam = (p - f) / q
        rjmu = math.sqrt(w / ((p - f) * gam + q))
        rjmu = math.copysign(rjmu, rjl)
        rymu = rjmu * gam
        rymup = rymu * (p + q / gam)
        ry1 = xmu * xi * rymu - rymup

    if x < _XMIN:
        j, jp = _power_series_j(xnu, x)
    else:
        fact = rjmu / rjl
        j = rjl1 * fact
        jp = rjp1 * fact
    for i in range(1, nl + 1):
        rytemp = (xmu + i) * xi2 * ry1 - rymu
        rymu = ry1
        ry1 = rytemp
    y = rymu
    yp = xnu * xi * rymu - ry1
    return CylEval(j, y, jp, yp)


def eval_pair(order: float, x: float) -> CylEval:
    """J_nu(x), Y_nu(x), J'_nu(x), Y'_nu(x) for nu >= 0 and x > 0.

    Raises
    ------
    DomainError
        For x <= 0, negative order, or non-finite input.
    """
    order, x = _check(order, x)
    if x == 0.0:
        raise DomainError("eval_pair requires x > 0")
    if x >= _x_asym(order):
        return _asymptotic(order, x)
    return _steed_temme(order, x)


def bessel_j(order: float, x: float) -> float:
    """Bessel function of the first kind J_nu(x); J_nu(0) is 1 for nu = 0, else 0."""
    order, x = _check(order, x)
    if x == 0.0:
        return 1.0 if order == 0.0 else 0.0
    return eval_pair(order, x).j


def bessel_y(order: float, x: float) -> float:
    """Bessel function of the second kind Y_nu(x), x > 0."""
    order, x = _check(order, x)
    if x == 0.0:
        raise DomainError("Y_nu is singular at x = 0")
    return eval_pair(order, x).y


def wronskian_residual(order: float, x: float) -> float:
    """Relative deviation of J Y' - J' Y from 2/(pi x)."""
    e = eval_pair(order, x)
    w = e.j * e.yp - e.jp * e.y
    return abs(w - 2.0 / (math.pi * x)) * math.pi * x / 2.0
