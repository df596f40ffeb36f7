"""Bound-state counting and zero-energy classification per channel.

The number of negative-energy states of channel m equals the number of
zeros of the regular E = 0 solution (Sturm oscillation).  The zeros are
counted out to a radius where the inverse-square tail has taken over; the
tail psi = P cosh(mu l) + Q sinh(mu l)/mu, l = ln(rho/rho_f), fitted near
that radius rho_f then decides whether one more zero lies further out and
whether the solution decays (a zero-energy bound or half-bound state).  The
growing and decaying parts are compared on the scale R, which keeps the
decision insensitive to the choice of rho_f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, FitError, NumericalError
from .potentials import ABModel, PartialPotential
from .radial import RadialGrid, _count_sign_changes, bound_grid, integrate_regular

__all__ = [
    "SpectrumCount",
    "ZeroEnergyClass",
    "classify_zero_energy",
    "count_bound",
    "count_bound_bisect",
    "spectrum_count",
    "zero_energy_analysis",
]

_DECAY_TOL = 1e-6
_FIT_RESIDUAL = 1e-2
_RHO_FIT_MIN = 4.0  # in units of R
_RHO_FIT_MAX = 1e4
_E_TOP = 1e-200  # |E| of the shallowest energy probed by bisection, units of 1/R^2
_MU_ZERO = 1e-6
_FIT_POINTS = (0.5, 2.0**-0.5, 1.0)


@dataclass(frozen=True)
class ZeroEnergyClass:
    """Outcome of the zero-energy tail analysis of one channel."""

    m: int
    mu: float
    nodes: int
    decaying: bool
    bound: bool
    half_bound: bool
    growth: float  # growing over decaying tail coefficient, both taken at R


@dataclass(frozen=True)
class SpectrumCount:
    m: int
    n_bound: int
    half_bound: bool
    mu: float


def _fit_radius(pp: PartialPotential) -> float:
    """Outer radius of the zero-energy analysis: rho^(2 mu) reaches about 1e8 there."""
    R = pp.model.R
    mu = pp.mu
    ratio = _RHO_FIT_MAX if mu < 1e-3 else 10.0 ** min(4.0 / mu, 4.0)
    rho_f = R * min(max(ratio, _RHO_FIT_MIN), _RHO_FIT_MAX)
    tail = pp.model.tail_start
    if tail:
        rho_f = max(rho_f, 4.0 * tail)
    return rho_f


def _fit_tail(pp: PartialPotential, grid: RadialGrid, psi: np.ndarray, rho_f: float):
    """Least-squares tail psi = P cosh(mu l) + Q sinh(mu l)/mu, l = ln(rho/rho_f).

    Fitted at rho_f/2, rho_f/sqrt(2) and rho_f; for mu = 0 the basis is 1, l.
    """
    idx = [grid.index(rho_f * f) for f in _FIT_POINTS]
    if len(set(idx)) < 3:
        raise FitError("tail fit radii coincide; extend rho_max")
    ell = np.log(grid.rho[idx] / rho_f)
    y = psi[idx]
    scale = float(np.max(np.abs(y)))
    if scale == 0.0:
        raise FitError("zero-energy solution vanished at the fit radii; extend rho_max")
    mu = pp.mu
    if mu < _MU_ZERO:
        A = np.column_stack([np.ones_like(ell), ell])
    else:
        A = np.column_stack([np.cosh(mu * ell), np.sinh(mu * ell) / mu])
    (P, Q), *_ = np.linalg.lstsq(A, y / scale, rcond=None)
    resid = float(np.max(np.abs(A @ np.array([P, Q]) - y / scale)))
    if not math.isfinite(resid) or resid > _FIT_RESIDUAL:
        raise FitError(
            f"tail fit residual {resid:.3g} exceeds {_FIT_RESIDUAL}; "
            "the inverse-square tail is not reached, extend rho_max"
        )
    return float(P), float(Q)


def _analyse(pp: PartialPotential, refine: float) -> ZeroEnergyClass:
    R = pp.model.R
    rho_f = _fit_radius(pp)
    grid = bound_grid(pp.model, rho_f, 0.0, refine)
    sol = integrate_regular(pp, 0.0, grid)
    psi = sol.psi
    P, Q = _fit_tail(pp, grid, psi, rho_f)
    mu = pp.mu
    lf = math.log(rho_f / R)
    if mu < _MU_ZERO:
        # psi = c_dec + c_grow ln(rho/R); the zero of the tail sits at l = -P/Q
        grow, dec = Q, P - Q * lf
        l0 = -P / Q if Q != 0.0 else math.inf
    else:
        # coefficients of (rho/rho_f)^(+-mu); compared on the R scale
        a = 0.5 * (P + Q / mu)
        b = 0.5 * (P - Q / mu)
        grow = a * math.exp(-mu * lf)
        dec = b * math.exp(mu * lf)
        l0 = math.log(-b / a) / (2.0 * mu) if a * b < 0.0 else math.inf
    growth = abs(grow) / abs(dec) if dec != 0.0 else math.inf
    decaying = growth <= _DECAY_TOL
    cut = grid.index(rho_f * _FIT_POINTS[0])
    nodes = int(_count_zeros(sol.u, cut + 1))
    if not decaying and math.log(_FIT_POINTS[0]) < l0 < math.inf:
        # the fitted tail changes sign beyond the counted range
        nodes += 1
    bound = decaying and mu > 1.0
    half = decaying and mu <= 1.0
    return ZeroEnergyClass(pp.m, mu, nodes, decaying, bound, half, growth)


def _analyse_converged(model: ABModel, m: int, refine: float) -> ZeroEnergyClass:
    pp = model.partial(m)
    a = _analyse(pp, refine)
    b = _analyse(pp, 2.0 * refine)
    if a.nodes != b.nodes:
        raise NumericalError(
            f"node count of channel m={m} not converged under grid refinement "
            f"({a.nodes} vs {b.nodes})"
        )
    if (a.bound, a.half_bound) != (b.bound, b.half_bound):
        raise NumericalError(
            f"zero-energy classification of channel m={m} changes under grid refinement"
        )
    return b


def classify_zero_energy(model: ABModel, m: int, *, refine: float = 1.0) -> tuple[bool, bool]:
    """(bound, half_bound) for the zero-energy solution of channel m."""
    c = _analyse_converged(model, m, refine)
    return c.bound, c.half_bound


def zero_energy_analysis(model: ABModel, m: int, *, refine: float = 1.0) -> ZeroEnergyClass:
    """Full zero-energy analysis (node count, decay, classification) of channel m."""
    return _analyse_converged(model, m, refine)


def _count_zeros(u: np.ndarray, stop: int) -> int:
    return int(_count_sign_changes(u, 0, stop))


def _zero_modes_default(model: ABModel) -> bool:
    return model.family == "soliton"


def count_bound(
    model: ABModel, m: int, *, zero_modes: bool | None = None, refine: float = 1.0
) -> int:
    """Number of bound states of channel m.

    Counts the zeros of the regular E = 0 solution, i.e. the states with
    E < 0.  A decaying zero-energy solution with mu > 1 is a bound state at
    E = 0; it is added when ``zero_modes`` is true, which is the default for
    the soliton family whose zero modes enter the Levinson count.
    """
    c = _analyse_converged(model, m, refine)
    if zero_modes is None:
        zero_modes = _zero_modes_default(model)
    return c.nodes + (1 if zero_modes and c.bound else 0)


def spectrum_count(
    model: ABModel, m: int, *, zero_modes: bool | None = None, refine: float = 1.0
) -> SpectrumCount:
    c = _analyse_converged(model, m, refine)
    if zero_modes is None:
        zero_modes = _zero_modes_default(model)
    n = c.nodes + (1 if zero_modes and c.bound else 0)
    return SpectrumCount(int(m), n, c.half_bound, c.mu)


@njit(cache=True, nogil=True)
def _march(g, h, y0, y1, stop):
    """Numerov for y'' = g y up to node ``stop``, counting sign changes on the way.

    Only the running values are kept (rescaled when large), so nothing
    underflows.  Returns (zeros, y[stop-1], y[stop], y[stop+1]) with
    y[stop+1] = 0 when stop is the last node.
    """
    c = h * h / 12.0
    n = g.size
    Y = (1.0 - c * g[1]) * y1
    D = Y - (1.0 - c * g[0]) * y0
    prev = y0
    cur = y1
    zeros = 0
    last = y0 if y0 != 0.0 else y1
    if y0 != 0.0 and y1 != 0.0 and (y0 > 0.0) != (y1 > 0.0):
        zeros += 1
        last = y1
    ym1 = y0
    yc = y1
    yp1 = 0.0
    for i in range(1, n - 1):
        D += h * h * g[i] * cur
        Y += D
        nxt = Y / (1.0 - c * g[i + 1])
        if nxt != 0.0:
            if (nxt > 0.0) != (last > 0.0):
                zeros += 1
            last = nxt
        if i + 1 == stop:
            ym1 = cur
            yc = nxt
        if i == stop:
            ym1 = prev
            yc = cur
            yp1 = nxt
            break
        if abs(nxt) > 1e200:
            nxt *= 1e-200
            cur *= 1e-200
            Y *= 1e-200
            D *= 1e-200
            last = nxt
        prev = cur
        cur = nxt
    return zeros, ym1, yc, yp1


class _Bisector:
    """Outward/inward Numerov solutions on one master log grid at energies E < 0."""

    def __init__(self, pp: PartialPotential, refine: float):
        self.pp = pp
        R = pp.model.R
        self.R = R
        self.mu = pp.mu
        top = self.rho_max(-_E_TOP / (R * R))
        self.grid = bound_grid(pp.model, top, 0.0, refine)
        rho = self.grid.rho
        self.rho = rho
        self.rho2 = rho * rho
        with np.errstate(over="ignore", invalid="ignore"):
            w = np.asarray(pp.rho2U(rho), dtype=float)
        tail = pp.model.tail_start
        if tail is not None:
            w[rho > max(tail, R)] = self.mu * self.mu
        if not np.all(np.isfinite(w)):
            raise NumericalError("U_m is not finite on the bisection grid")
        self.w = w
        nu = pp.nu
        r0, r1 = rho[0], rho[1]
        self.w0 = (w[0] - nu * nu) / (r0 * r0)
        self.ratio = math.exp(nu * math.log(r1 / r0))

    def rho_max(self, E: float) -> float:
        return 2.0 * self.R + (self.mu + 40.0) / math.sqrt(-E)

    def _g(self, E: float) -> np.ndarray:
        n = int(np.searchsorted(self.rho, self.rho_max(E))) + 1
        n = min(max(n, 8), self.rho.size)
        return self.w[:n] - E * self.rho2[:n]

    def _start(self, E: float):
        c1 = (self.w0 - E) / (4.0 * (self.pp.nu + 1.0))
        r0, r1 = self.rho[0], self.rho[1]
        return 1.0 + c1 * r0 * r0, self.ratio * (1.0 + c1 * r1 * r1)

    def nodes(self, E: float) -> int:
        g = self._g(E)
        y0, y1 = self._start(E)
        z, *_ = _march(g, self.grid.h_t, y0, y1, g.size - 1)
        return int(z)

    def mismatch(self, E: float) -> float:
        """Sign-carrying Wronskian of the outward and the decaying inward solution."""
        g = self._g(E)
        h = self.grid.h_t
        allowed = np.nonzero(g < 0.0)[0]
        ic = int(allowed[-1]) if allowed.size else self.grid.anchor
        ic = min(max(ic, 2), g.size - 3)
        y0, y1 = self._start(E)
        _, om, oc, op = _march(g, h, y0, y1, ic)
        gr = g[::-1].copy()
        kappa = math.sqrt(max(gr[0], 0.0))
        _, ip, icc, im = _march(gr, h, 1.0, math.exp(kappa * h), g.size - 1 - ic)
        # inward march runs backwards in t, so its neighbours swap roles
        return oc * (ip - im) - icc * (op - om)


def count_bound_bisect(
    model: ABModel, m: int, E_min: float | None = None, *, refine: float = 1.0
) -> int:
    """Count eigenvalues in (E_min, 0) by node-count bracketing and mismatch bisection.

    Each eigenvalue is isolated in a bracket whose outward node counts differ
    by one, then confirmed by a sign change of the inward/outward mismatch.
    """
    pp = model.partial(m)
    R = model.R
    rho = np.geomspace(1e-4 * R, 1e4 * R, 4000)
    with np.errstate(over="ignore", invalid="ignore"):
        U = np.asarray(pp(rho), dtype=float)
    Umin = float(np.nanmin(U))
    if E_min is None:
        if Umin >= 0.0:
            return 0
        E_min = 1.05 * Umin
    E_min = float(E_min)
    if not E_min < 0.0:
        raise DomainError(f"E_min must be negative, got {E_min}")
    if E_min >= Umin:
        raise DomainError(f"E_min = {E_min} is not below the potential minimum {Umin:.6g}")
    b = _Bisector(pp, refine)
    E_top = -_E_TOP / (R * R)
    s_lo, s_hi = math.log(-E_min), math.log(-E_top)
    n_lo, n_hi = b.nodes(E_min), b.nodes(E_top)
    if n_lo != 0:
        raise NumericalError(f"outward solution has {n_lo} zeros below the potential minimum")
    found = 0
    stack = [(s_lo, s_hi, n_lo, n_hi)]
    while stack:
        sa, sb, na, nb = stack.pop()
        if nb == na:
            continue
        if nb < na:
            raise NumericalError("node count decreases with energy; bracketing failed")
        if nb - na == 1:
            found += _confirm(b, sa, sb)
            continue
        if abs(sa - sb) < 1e-12 * max(abs(sa), 1.0):
            raise NumericalError("bracket collapsed with several eigenvalues inside")
        sm = 0.5 * (sa + sb)
        nm = b.nodes(-math.exp(sm))
        stack.append((sa, sm, na, nm))
        stack.append((sm, sb, nm, nb))
    if found != n_hi:
        raise NumericalError("bisection confirmed fewer eigenvalues than the node count")
    return found


def _confirm(b: _Bisector, sa: float, sb: float) -> int:
    """Locate the eigenvalue between E = -exp(sa) and E = -exp(sb) by mismatch bisection."""
    wa = b.mismatch(-math.exp(sa))
    wb = b.mismatch(-math.exp(sb))
    if wa == 0.0 or wb == 0.0:
        return 1
    if (wa > 0.0) == (wb > 0.0):
        raise NumericalError(
            f"no mismatch sign change in the bracket E in ({-math.exp(sa):.6g}, {-math.exp(sb):.6g})"
        )
    for _ in range(60):
        sm = 0.5 * (sa + sb)
        wm = b.mismatch(-math.exp(sm))
        if wm == 0.0:
            break
        if (wm > 0.0) == (wa > 0.0):
            sa, wa = sm, wm
        else:
            sb, wb = sm, wm
    return 1
