"""Radial integration, asymptotic matching and phase shifts.

The regular solution of the channel equation

    -psi'' - psi'/rho + U_m(rho) psi = E psi

is integrated by Numerov's method on a two-part grid.  Close to the origin the
grid is uniform in t = ln(rho), where psi itself obeys psi_tt = rho^2 (U - E) psi
with no first-derivative term.  Further out the grid is uniform in rho and the
reduced wave u = sqrt(rho) psi obeys u'' = (U - 1/(4 rho^2) - E) u.  The last
two nodes of the log part coincide with the first two nodes of the uniform
part, so the hand-over is exact.

The phase shift of channel m is

    delta_m(k) = pi (|m| - mu) / 2 - arctan(sigma),

where sigma is the ratio of the Y_mu and J_mu components of psi at large rho.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .cylfn import eval_pair
from .errors import DomainError, MatchingError, NumericalError, UnwrapError
from .potentials import ABModel, PartialPotential

__all__ = [
    "PhaseCurve",
    "RadialGrid",
    "WaveSolution",
    "bound_grid",
    "closed_form_centrifugal_delta",
    "default_k_grid",
    "extract_sigma",
    "extrapolate_high",
    "extrapolate_low",
    "integrate_regular",
    "phase_shift",
    "phase_sweep",
    "scattering_grid",
    "unwrap_phases",
]

_PHASE_STEP = 0.01  # local wavenumber times step
_LOG_STEP = 0.0005  # step in ln(rho) near the origin
_RHO_MIN = 1e-4  # innermost node, in units of R
_MATCH_KR = 200.0  # k * rho at the matching radius
_MATCH_R = 50.0  # matching radius floor, in units of R
_TAIL_MATCH_R = 200.0  # floor at kR = 1 when the model has no exact tail
_SHIFT = 1.25  # outward shift of the matching radii for the stability check
_STABILITY = 1e-6
_MAX_DOUBLINGS = 8
_UNWRAP_LIMIT = 0.45 * math.pi
_SIGMA_FLOOR = 1e-6
_ADAPT_GAP = 0.25 * math.pi
_MAX_BISECTIONS = 6
_CHUNK = 1 << 18
_MAX_NODES = 40_000_000


@njit(cache=True, nogil=True)
def _numerov(f, h, y, i0, jump_at, f_left, f_right, slope_jump):
    """Fill y[i0+2:] for y'' = f y given y[i0], y[i0+1]; f[j] belongs to node i0 + j.

    Summed form: with Y = (1 - h^2 f / 12) y the scheme reads
    Y[n+1] - 2 Y[n] + Y[n-1] = h^2 f[n] y[n].  Carrying the first difference
    of Y avoids the rounding of 2 cos(k h) that spoils long oscillatory runs.

    At node ``jump_at`` f is discontinuous with one-sided limits f_left and
    f_right (f there holds their mean).  The two neighbouring steps use the
    matching one-sided limit and the central step gains the term
    h^3 [(f_right - f_left) y' + slope_jump y] / 12, where slope_jump is the
    jump of f', so the scheme stays fourth order across the breakpoint.

    When |y| exceeds 1e200 the whole prefix y[:i+2] is scaled down, so ratios
    between any two nodes stay exact.
    """
    h2 = h * h
    c = h2 / 12.0
    n = y.size
    Y = (1.0 - c * f[1]) * y[i0 + 1]
    D = Y - (1.0 - c * f[0]) * y[i0]
    for i in range(i0 + 1, n - 1):
        j = i - i0
        if jump_at >= 0 and jump_at - 1 <= i <= jump_at + 1:
            fm = f_right if i - 1 == jump_at else f[j - 1]
            fp = f_left if i + 1 == jump_at else f[j + 1]
            b = 0.0
            e = 0.0
            if i == jump_at:
                b = h2 * (f_right - f_left) / 24.0
                e = h2 * h * slope_jump / 12.0
            y[i + 1] = (
                (2.0 * (1.0 + 5.0 * c * f[j]) + e) * y[i] - (1.0 - c * fm + b) * y[i - 1]
            ) / (1.0 - c * fp - b)
            Y = (1.0 - c * f[j + 1]) * y[i + 1]
            D = Y - (1.0 - c * f[j]) * y[i]
        else:
            D += h2 * f[j] * y[i]
            Y += D
            y[i + 1] = Y / (1.0 - c * f[j + 1])
        if abs(y[i + 1]) > 1e200:
            for s in range(i + 2):
                y[s] *= 1e-200
            Y *= 1e-200
            D *= 1e-200


@njit(cache=True, nogil=True)
def _count_sign_changes(y, lo, hi):
    count = 0
    last = 0.0
    for i in range(lo, hi):
        v = y[i]
        if v != 0.0:
            if last != 0.0 and (v > 0.0) != (last > 0.0):
                count += 1
            last = v
    return count


@dataclass(frozen=True)
class RadialGrid:
    """Log-uniform nodes rho[:n_log] followed by uniform nodes of step h_rho.

    rho[n_log - 2] and rho[n_log - 1] are also the first two nodes of the
    uniform part (when there is one).  ``anchor`` is the index of the node
    placed exactly at R; ``match`` holds the matching radii for scattering.
    """

    rho: np.ndarray
    n_log: int
    h_t: float
    h_rho: float
    anchor: int
    R: float
    match: tuple[float, float] | None = None

    @property
    def rho_min(self) -> float:
        return float(self.rho[0])

    @property
    def rho_max(self) -> float:
        return float(self.rho[-1])

    @property
    def n(self) -> int:
        return int(self.rho.size)

    def index(self, r: float) -> int:
        """Index of the node nearest to r."""
        i = int(np.searchsorted(self.rho, r))
        i = min(max(i, 1), self.n - 1)
        return i if abs(self.rho[i] - r) < abs(self.rho[i - 1] - r) else i - 1


@dataclass(frozen=True)
class WaveSolution:
    """Regular reduced wave u = sqrt(rho) psi, normalized to max |u| = 1."""

    grid: RadialGrid
    u: np.ndarray
    k: float
    m: int
    E: float
    nu: float
    node_count: int

    @property
    def psi(self) -> np.ndarray:
        return self.u / np.sqrt(self.grid.rho)


def _log_nodes(R: float, h_t: float, below: int, above: int) -> np.ndarray:
    rho = R * np.exp(h_t * (np.arange(below + above + 1) - below))
    rho[below] = R
    return rho


def _wave_scale(pp: PartialPotential, E: float, lower: float, upper: float) -> tuple[float, float]:
    """Largest local wavenumber and largest rho * wavenumber on [lower, upper]."""
    rho = np.geomspace(lower, upper, 2000)
    with np.errstate(over="ignore", invalid="ignore"):
        excess = E - np.asarray(pp(rho), dtype=float)
    excess = np.where(np.isfinite(excess), np.maximum(excess, 0.0), 0.0)
    kloc = float(np.sqrt(np.max(excess)))
    omega = float(np.max(rho * np.sqrt(excess)))
    return kloc, omega


def scattering_grid(
    pp: PartialPotential, k: float, refine: float = 1.0, match_scale: float = 1.0
) -> RadialGrid:
    """Grid for the scattering solution at wavenumber k, with matching radii."""
    R = pp.model.R
    E = k * k
    step = _PHASE_STEP / refine
    ht0 = _LOG_STEP / refine
    rho2 = max(_MATCH_KR / k, _MATCH_R * R, 20.0 * pp.mu / k)
    if pp.model.tail_start is not None:
        rho2 = max(rho2, 2.0 * pp.model.tail_start)
    else:
        # a residual tail ~ rho^-4 leaves a phase error ~ 1/(k rho2^3)
        rho2 = max(rho2, _TAIL_MATCH_R * R * min(1.0, (k * R) ** (-1.0 / 3.0)))
    rho2 *= match_scale
    rho1 = rho2 - 0.5 * math.pi / k
    rho_lo = _RHO_MIN * R
    lmin = math.log(1.0 / _RHO_MIN)
    rho_s = step / (k * ht0)
    if rho_s >= 0.5 * R:
        # log grid through R up to rho_s; its step must resolve the local wave
        # inside, and its last spacing must resolve it beyond rho_s.  It runs
        # at least two steps past R so the breakpoint sits inside the log part.
        rho_s = max(rho_s, R)
        _, omega = _wave_scale(pp, E, rho_lo, rho_s)
        kout, _ = _wave_scale(pp, E, rho_s, 100.0 * rho_s)
        h_t = min(ht0, step / max(omega, 1e-300), step / (rho_s * max(kout, k)))
        below = math.ceil(lmin / h_t)
        above = max(math.ceil(math.log(rho_s / R) / h_t), 2)
        log_part = _log_nodes(R, h_t, below, above)
        anchor = below
        h = log_part[-1] - log_part[-2]
    else:
        kloc, _ = _wave_scale(pp, E, rho_lo, 100.0 * R)
        h_u = step / max(kloc, k)
        rho_s = h_u / ht0
        n_u = math.ceil((R - rho_s) / h_u)
        h = (R - rho_s) / n_u
        h_t = -math.log1p(-h / rho_s)
        n_in = math.ceil((lmin + math.log(R / rho_s)) / h_t)
        log_part = rho_s * np.exp(-h_t * np.arange(n_in, -1, -1))
        log_part[-1] = rho_s
        log_part[-2] = rho_s - h
        anchor = n_in + n_u
    rho_end = _SHIFT * rho2 + 4.0 * h
    n_uni = max(math.ceil((rho_end - log_part[-1]) / h), 2)
    nl = log_part.size
    if nl + n_uni > _MAX_NODES:
        raise NumericalError(f"scattering grid for k = {k:.6g} exceeds {_MAX_NODES} nodes")
    rho = np.empty(nl + n_uni)
    rho[:nl] = log_part
    uni = rho[nl:]
    uni[:] = np.arange(1, n_uni + 1, dtype=float)
    uni *= h
    uni += log_part[-1]
    if anchor >= nl:
        rho[anchor] = R
    return RadialGrid(rho, nl, h_t, h, anchor, R, (rho1, rho2))


def bound_grid(model: ABModel, rho_end: float, E: float = 0.0, refine: float = 1.0) -> RadialGrid:
    """Purely log-uniform grid from 1e-4 R to at least rho_end, with a node at R."""
    R = model.R
    ht0 = _LOG_STEP / refine
    step = _PHASE_STEP / refine
    # the centrifugal term only slows the local wave, so V alone bounds it
    rho = np.geomspace(_RHO_MIN * R, max(rho_end, 10.0 * R), 2000)
    with np.errstate(over="ignore", invalid="ignore"):
        excess = E - np.asarray(model.V(rho), dtype=float)
    excess = np.where(np.isfinite(excess), np.maximum(excess, 0.0), 0.0)
    omega = float(np.max(rho * np.sqrt(excess)))
    h_t = min(ht0, step / omega) if omega > 0.0 else ht0
    below = math.ceil(math.log(1.0 / _RHO_MIN) / h_t)
    above = max(math.ceil(math.log(rho_end / R) / h_t), 1)
    rho = _log_nodes(R, h_t, below, above)
    return RadialGrid(rho, rho.size, h_t, 0.0, below, R)


def _rho2U(pp: PartialPotential, rho: np.ndarray, anchor: int, R: float) -> np.ndarray:
    """rho^2 U_m on the nodes; the node at a breakpoint gets the mean of both limits."""
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.asarray(pp.rho2U(rho), dtype=float)
    if R in pp.model.breakpoints and 0 <= anchor < rho.size:
        lim = pp.rho2U(np.array([R * (1.0 - 1e-12), R * (1.0 + 1e-12)]))
        w[anchor] = 0.5 * (lim[0] + lim[1])
    if not np.all(np.isfinite(w)):
        bad = rho[~np.isfinite(w)][0]
        raise NumericalError(f"U_m is not finite on the grid (rho = {bad:.6g})")
    return w


def _working_rho2U(pp: PartialPotential, grid: RadialGrid, lo: int, hi: int) -> np.ndarray:
    """rho^2 U_m on nodes [lo, hi), using the exact tail where the model has one."""
    rho = grid.rho[lo:hi]
    tail = pp.model.tail_start
    if tail is None:
        return _rho2U(pp, rho, grid.anchor - lo, grid.R)
    cut = int(np.searchsorted(rho, tail, side="right"))
    if lo <= grid.anchor < hi:
        cut = max(cut, grid.anchor - lo + 1)
    w = np.empty(rho.size)
    w[:cut] = _rho2U(pp, rho[:cut], grid.anchor - lo, grid.R)
    w[cut:] = pp.mu * pp.mu
    return w


def _limits(pp: PartialPotential, R: float) -> tuple[float, float, float, float] | None:
    """One-sided values and slopes of w = rho^2 U_m at a breakpoint R (None if smooth)."""
    if R not in pp.model.breakpoints:
        return None
    d = 1e-5 * R
    eps = 1e-12 * R
    left = pp.rho2U(np.array([R - eps, R - d, R - 2.0 * d]))
    right = pp.rho2U(np.array([R + eps, R + d, R + 2.0 * d]))
    sl = (3.0 * left[0] - 4.0 * left[1] + left[2]) / (2.0 * d)
    sr = (-3.0 * right[0] + 4.0 * right[1] - right[2]) / (2.0 * d)
    return float(left[0]), float(right[0]), float(sl), float(sr)


@njit(cache=True, nogil=True)
def _reduced_f(w, rho, E, out):
    for i in range(w.size):
        out[i] = (w[i] - 0.25) / (rho[i] * rho[i]) - E


def integrate_regular(pp: PartialPotential, E: float, grid: RadialGrid) -> WaveSolution:
    """Numerov integration of the regular solution from rho_min outward."""
    E = float(E)
    rho = grid.rho
    nl = grid.n_log
    nu = pp.nu

    w = _working_rho2U(pp, grid, 0, nl)
    r0 = rho[0]
    w0 = (w[0] - nu * nu) / (r0 * r0)
    c1 = (w0 - E) / (4.0 * (nu + 1.0))
    psi = np.empty(nl)
    psi[0] = 1.0 + c1 * r0 * r0
    psi[1] = math.exp(nu * math.log(rho[1] / r0)) * (1.0 + c1 * rho[1] ** 2)
    R = grid.R
    lim = _limits(pp, R)
    if lim is None:
        at_log, wl, wr, sl, sr = -1, 0.0, 0.0, 0.0, 0.0
    else:
        at_log = grid.anchor if grid.anchor < nl - 1 else -1
        wl, wr, sl, sr = lim
    # in t = ln(rho): g = w - E rho^2, dg/dt = rho dw/drho - 2 E rho^2
    _numerov(
        w - E * rho[:nl] ** 2, grid.h_t, psi, 0, at_log,
        wl - E * R * R, wr - E * R * R, R * (sr - sl),
    )

    u = np.empty(rho.size)
    u[:nl] = np.sqrt(rho[:nl]) * psi
    if nl < rho.size:
        h = grid.h_rho
        # energy whose discrete Numerov wavenumber equals sqrt(E) exactly
        if E > 0.0:
            s2 = math.sin(0.5 * math.sqrt(E) * h) ** 2
            E_num = 24.0 * s2 / ((6.0 - 2.0 * s2) * h * h)
        else:
            E_num = E
        f = np.empty(rho.size - nl + 2)
        for lo in range(nl - 2, rho.size, _CHUNK):
            hi = min(lo + _CHUNK, rho.size)
            seg = f[lo - nl + 2 : hi - nl + 2]
            _reduced_f(_working_rho2U(pp, grid, lo, hi), rho[lo:hi], E_num, seg)
        at_uni = grid.anchor if lim is not None and grid.anchor >= nl - 1 else -1
        fl = (wl - 0.25) / (R * R) - E_num
        fr = (wr - 0.25) / (R * R) - E_num
        # f = (w - 1/4)/rho^2 - E, so f' jumps by dw'/R^2 - 2 dw/R^3
        df = (sr - sl) / (R * R) - 2.0 * (wr - wl) / R**3
        _numerov(f, h, u, nl - 2, at_uni, fl, fr, df)
        del f
    peak = max(float(u.max()), -float(u.min()))
    if not math.isfinite(peak):
        raise NumericalError("radial integration produced non-finite values")
    if peak == 0.0:
        raise NumericalError("regular solution vanished on the whole grid")
    u /= peak
    nodes = int(_count_sign_changes(u, 0, u.size))
    return WaveSolution(grid, u, math.sqrt(E) if E > 0 else 0.0, pp.m, E, nu, nodes)


def _sigma_at(sol: WaveSolution, k: float, mu: float, i1: int, i2: int) -> float:
    rho = sol.grid.rho
    p1 = sol.u[i1] / math.sqrt(rho[i1])
    p2 = sol.u[i2] / math.sqrt(rho[i2])
    c1 = eval_pair(mu, k * rho[i1])
    c2 = eval_pair(mu, k * rho[i2])
    num = p2 * c1.j - p1 * c2.j
    den = p1 * c2.y - p2 * c1.y
    if den == 0.0:
        return math.copysign(math.inf, num)
    return num / den


def _angle_gap(s1: float, s2: float) -> float:
    d = math.atan(s1) - math.atan(s2)
    return abs((d + 0.5 * math.pi) % math.pi - 0.5 * math.pi)


def extract_sigma(sol: WaveSolution, k: float, mu: float, rho1: float, rho2: float) -> float:
    """Two-point match of psi to A [J_mu(k rho) + sigma Y_mu(k rho)].

    Both radii are moved to the nearest grid nodes.  The result is checked by
    repeating the match with both radii moved outward by 25 percent; the
    angles arctan(sigma) must agree to 1e-6.
    """
    if not (k > 0.0 and math.isfinite(k)):
        raise DomainError(f"wavenumber must be positive, got {k}")
    if not rho1 < rho2:
        raise DomainError("matching radii must satisfy rho1 < rho2")
    grid = sol.grid
    floor = max(_MATCH_R * grid.R, 20.0 * abs(mu) / k)
    if rho1 < floor * (1.0 - 1e-9) - 0.5 * math.pi / k:
        raise DomainError(f"matching radius {rho1:.6g} is not in the asymptotic region")
    if _SHIFT * rho2 > grid.rho_max:
        raise MatchingError("grid too short for the matching stability check")
    i1, i2 = grid.index(rho1), grid.index(rho2)
    j1, j2 = grid.index(_SHIFT * rho1), grid.index(_SHIFT * rho2)
    if i1 == i2 or j1 == j2:
        raise MatchingError("matching radii fall on the same grid node")
    s = _sigma_at(sol, k, mu, i1, i2)
    s_shift = _sigma_at(sol, k, mu, j1, j2)
    gap = _angle_gap(s, s_shift)
    if not gap <= _STABILITY:
        raise MatchingError(
            f"matching unstable: arctan(sigma) moved by {gap:.3g} under a 25% radius shift"
        )
    return s


def _check_k(k: float) -> float:
    k = float(k)
    if not (k > 0.0 and math.isfinite(k)):
        raise DomainError(f"wavenumber must be positive and finite, got {k}")
    return k


def _bessel_phase(mu: float, x: float) -> float:
    """Continuous phase theta with J_mu = M cos(theta), Y_mu = M sin(theta), for large x."""
    c = eval_pair(mu, x)
    base = x - 0.25 * (2.0 * mu + 1.0) * math.pi + (4.0 * mu * mu - 1.0) / (8.0 * x)
    d = math.atan2(c.y, c.j) - base
    return base + (d + math.pi) % (2.0 * math.pi) - math.pi


def _branch_index(sol: WaveSolution, k: float, mu: float, sigma: float, i1: int, i2: int) -> int:
    """Integer K such that delta + K pi lies on the branch fixed by the zeros of u.

    The Pruefer angle P of u starts at 0 at the origin and passes j pi at
    the j-th zero, so floor(P / pi) is the zero count.  In the asymptotic
    region P = theta_mu(k rho) - arctan(sigma) + pi/2 modulo pi, which fixes
    the multiple of pi at every k independently of its neighbours.
    """
    u = sol.u
    i = i1 if abs(u[i1]) >= abs(u[i2]) else i2
    zeros = int(_count_sign_changes(u, 0, i + 1))
    lam = _bessel_phase(mu, k * sol.grid.rho[i]) - math.atan(sigma) + 0.5 * math.pi
    return zeros - math.floor(lam / math.pi)


def _solve(
    pp: PartialPotential, k: float, refine: float, match_scale: float
) -> tuple[float, int]:
    """Principal-branch delta and its branch index at one wavenumber."""
    offset = 0.5 * math.pi * (abs(pp.m) - pp.mu)
    scale = match_scale
    err: MatchingError | None = None
    for _ in range(_MAX_DOUBLINGS + 1):
        try:
            grid = scattering_grid(pp, k, refine=refine, match_scale=scale)
        except NumericalError:
            break
        sol = integrate_regular(pp, k * k, grid)
        try:
            sigma = extract_sigma(sol, k, pp.mu, *grid.match)
        except MatchingError as exc:
            err = exc
            scale *= 2.0
            continue
        i1, i2 = grid.index(grid.match[0]), grid.index(grid.match[1])
        return offset - math.atan(sigma), _branch_index(sol, k, pp.mu, sigma, i1, i2)
    if err is None:
        raise NumericalError(f"scattering grid for k = {k:.6g} exceeds {_MAX_NODES} nodes")
    raise err


def phase_shift(
    model: ABModel,
    m: int,
    k: float,
    *,
    refine: float = 1.0,
    match_scale: float = 1.0,
    absolute: bool = False,
    pp: PartialPotential | None = None,
) -> float:
    """Phase shift delta_m(k) on the principal branch of arctan plus the fixed offset.

    With ``absolute`` the multiple of pi is instead fixed by counting the
    zeros of the regular solution, which gives a branch that is continuous
    in k.  If the matching stability check fails the outer radius is
    doubled, up to eight times, before the error is raised.
    """
    k = _check_k(k)
    if model.family == "free":
        # U_m is the bare centrifugal term, so the phase shift vanishes identically
        return 0.0
    if pp is None:
        pp = model.partial(m)
    delta, K = _solve(pp, k, refine, match_scale)
    return delta + K * math.pi if absolute else delta


def closed_form_centrifugal_delta(m: int, alpha: float, beta: float, R: float, k: float) -> float:
    """Exact phase shift of the piecewise-constant flux model."""
    k = _check_k(k)
    R = float(R)
    if not (R > 0.0 and math.isfinite(R)):
        raise DomainError(f"R must be positive, got {R}")
    nu = abs(m - alpha)
    mu = abs(m - beta)
    offset = 0.5 * math.pi * (abs(m) - mu)
    if nu == mu:
        return offset
    x = k * R
    a = eval_pair(nu, x)
    b = eval_pair(mu, x)
    if a.j != 0.0 and math.isfinite(a.jp / a.j):
        f = a.jp / a.j
        num = f * b.j - b.jp
        den = b.yp - f * b.y
    else:
        num = a.jp * b.j - b.jp * a.j
        den = a.j * b.yp - a.jp * b.y
    sigma = num / den if den != 0.0 else math.copysign(math.inf, num)
    return offset - math.atan(sigma)


def default_k_grid(R: float = 1.0, per_decade: int = 16) -> np.ndarray:
    """Log-spaced wavenumbers from 1e-3/R to 1e3/R."""
    return np.logspace(-3.0, 3.0, 6 * per_decade + 1) / R


@dataclass(frozen=True)
class PhaseCurve:
    """Unwrapped delta_m(k) with its extrapolated end values."""

    m: int
    k_grid: np.ndarray
    delta: np.ndarray
    delta_at_zero: float
    delta_at_infinity: float
    mu: float
    nu: float

    @property
    def lhs(self) -> float:
        return self.delta_at_zero - self.delta_at_infinity


def unwrap_phases(delta: np.ndarray) -> np.ndarray:
    """Add multiples of pi so that consecutive values are as close as possible."""
    out = np.array(delta, dtype=float)
    for i in range(1, out.size):
        out[i] -= math.pi * round((out[i] - out[i - 1]) / math.pi)
        if abs(out[i] - out[i - 1]) > _UNWRAP_LIMIT:
            raise UnwrapError(
                f"ambiguous branch between k-grid points {i - 1} and {i}; refine the k grid"
            )
    return out


def _threshold_basis(x: np.ndarray, mu: float) -> np.ndarray:
    if mu < 1e-8:
        return -np.log(x)
    return np.expm1(-2.0 * mu * np.log(x)) / (2.0 * mu)


def extrapolate_low(k: np.ndarray, delta: np.ndarray, m: int, mu: float, R: float) -> float:
    """delta(0) from the three smallest wavenumbers.

    With theta = pi(|m| - mu)/2 - delta = arctan(sigma), the threshold form
    cot(theta) = A g(kR) + B with g = ((kR)^(-2 mu) - 1)/(2 mu) (or -ln(kR)
    for mu = 0) is fitted.  A non-negligible A sends cot(theta) to infinity
    with the sign of A; otherwise the limit is B.  The branch of theta is
    carried along continuously, passing through pi/2 when cot(theta) changes
    sign.
    """
    offset = 0.5 * math.pi * (abs(m) - mu)
    k3 = np.asarray(k[:3], dtype=float)
    th = offset - np.asarray(delta[:3], dtype=float)
    tan = np.tan(th)
    base = th[0] - math.atan(tan[0])
    if abs(tan[0]) <= _SIGMA_FLOOR:
        # sigma has already vanished to within the integration accuracy
        return offset - base
    y = 1.0 / tan
    G = np.column_stack([_threshold_basis(k3 * R, mu), np.ones(3)])
    (A, B), *_ = np.linalg.lstsq(G, y, rcond=None)
    if abs(A) * G[0, 0] >= 1e-6 * abs(B):
        th0 = base
        if y[0] > 0.0 and A < 0.0:
            th0 += math.pi
        elif y[0] < 0.0 and A > 0.0:
            th0 -= math.pi
    elif B == 0.0:
        th0 = base + math.copysign(0.5 * math.pi, y[0])
    else:
        th0 = base + math.atan(1.0 / B)
    return offset - th0


def extrapolate_high(k: np.ndarray, delta: np.ndarray, points: int = 6) -> float:
    """delta(infinity) from a least-squares fit of c0 + c1/k + c2/k^2 to the top points."""
    kk = np.asarray(k[-points:], dtype=float)
    G = np.column_stack([np.ones_like(kk), 1.0 / kk, 1.0 / kk**2])
    kk0 = kk[-1]
    G[:, 1] *= kk0
    G[:, 2] *= kk0 * kk0
    c, *_ = np.linalg.lstsq(G, np.asarray(delta[-points:], dtype=float), rcond=None)
    return float(c[0])


def _validate_k_grid(k_grid, R: float) -> np.ndarray:
    k = np.asarray(k_grid, dtype=float)
    if k.ndim != 1 or k.size < 64:
        raise DomainError("k grid needs at least 64 points")
    if not np.all(np.isfinite(k)) or k[0] <= 0.0:
        raise DomainError("k grid must be positive and finite")
    if np.any(np.diff(k) <= 0.0):
        raise DomainError("k grid must be strictly increasing")
    if k[0] > 1e-3 / R * (1.0 + 1e-9) or k[-1] < 1e2 / R * (1.0 - 1e-9):
        raise DomainError("k grid must span at least [1e-3/R, 1e2/R]")
    return k


def _branch_gaps(raw: np.ndarray) -> np.ndarray:
    """Distance between consecutive phases modulo pi."""
    g = np.abs(np.diff(raw)) % math.pi
    return np.minimum(g, math.pi - g)


def phase_sweep(
    model: ABModel,
    m: int,
    k_grid=None,
    *,
    refine: float = 1.0,
    workers: int = 1,
    adaptive: bool = True,
) -> PhaseCurve:
    """delta_m over a wavenumber grid on one continuous branch, with extrapolated ends.

    The branch at each k is fixed by the zero count of the regular solution,
    and the result is checked against nearest-branch unwrapping: a
    consecutive step larger than pi/2 that the grid cannot resolve raises
    UnwrapError.  With ``adaptive`` set, geometric midpoints are first
    inserted wherever neighbouring phases differ by more than pi/4, so the
    returned grid is a superset of the requested one.
    """
    R = model.R
    k = default_k_grid(R) if k_grid is None else _validate_k_grid(k_grid, R)
    pp = model.partial(m)

    def one(kk):
        return phase_shift(model, m, float(kk), refine=refine, absolute=True, pp=pp)

    def evaluate(ks):
        if workers > 1 and len(ks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return np.array(list(pool.map(one, ks)))
        return np.array([one(kk) for kk in ks])

    delta = evaluate(k)
    for _ in range(_MAX_BISECTIONS if adaptive else 0):
        bad = np.nonzero(np.abs(np.diff(delta)) > _ADAPT_GAP)[0]
        if bad.size == 0:
            break
        mid = np.sqrt(k[bad] * k[bad + 1])
        k = np.insert(k, bad + 1, mid)
        delta = np.insert(delta, bad + 1, evaluate(mid))
    _check_branch(delta, adaptive)
    d0 = extrapolate_low(k, delta, m, pp.mu, R)
    dinf = extrapolate_high(k, delta)
    return PhaseCurve(int(m), k, delta, float(d0), float(dinf), pp.mu, pp.nu)


def _check_branch(delta: np.ndarray, adaptive: bool) -> None:
    """Flag steps that nearest-branch unwrapping would get wrong.

    After adaptive refinement a remaining step above pi/2 is a resonance
    narrower than the finest spacing; the zero count still places it on the
    right branch, so only the unrefined mode treats it as an error.
    """
    if adaptive:
        return
    gaps = np.abs(np.diff(delta))
    if gaps.size and gaps.max() > 0.5 * math.pi:
        i = int(np.argmax(gaps))
        raise UnwrapError(
            f"phase step of {gaps[i]:.3g} rad between k-grid points {i} and {i + 1}; "
            "refine the k grid"
        )
