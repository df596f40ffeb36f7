"""Aharonov-Bohm scattering models and their per-channel partial potentials.

Units: hbar = 1 and twice the particle mass = 1, so E = k**2.  A model is
described by a scalar potential V(rho) and the winding w(rho) = Phi(rho)/2pi
of the flux enclosed within radius rho.  The partial potential of channel m
is

    U_m(rho) = V(rho) + (m - w(rho))**2 / rho**2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ModelError

__all__ = [
    "ABModel",
    "PartialPotential",
    "SolitonParams",
    "MODEL_CATALOG",
    "catalog_models",
    "from_table",
    "intensities",
    "make_bp_soliton",
    "make_centrifugal",
    "make_conventional_ab",
    "make_flux_well",
    "make_free",
    "make_pure_flux",
    "make_returned_flux",
    "read_table",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]

_PROBE_SMALL = (1e-4, 1e-5, 1e-6)
_PROBE_LARGE = (1e4, 1e5, 1e6)
_PROBE_SPREAD = 1e-4


def _zero(rho):
    return np.zeros_like(np.asarray(rho, dtype=float))


@dataclass(frozen=True)
class ABModel:
    """An axially symmetric AB configuration: V(rho), Phi(rho) and its end values.

    ``tail_start`` is a radius beyond which V vanishes and the winding equals
    ``beta`` exactly (None when the approach is only asymptotic).
    ``breakpoints`` lists radii where V or Phi (or their derivatives) jump;
    at a breakpoint the callables return the left-hand value.
    """

    name: str
    V: ArrayFn
    winding: ArrayFn
    alpha: float
    beta: float
    R: float
    family: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)
    breakpoints: tuple[float, ...] = ()
    tail_start: float | None = None
    flux_only: bool = False
    regular_ends: bool = True
    closed_form: Callable[[int, np.ndarray], np.ndarray] | None = field(
        default=None, compare=False, repr=False
    )

    def Phi(self, rho):
        """Flux enclosed within rho, in radians (Phi(0) = 2 pi alpha)."""
        return 2.0 * math.pi * self.winding(np.asarray(rho, dtype=float))

    @property
    def field_free(self) -> bool:
        return self.alpha == 0.0 and self.beta == 0.0 and self.family in (
            "free",
            "flux-well",
            "centrifugal",
            "conventional",
            "pure-flux",
        )

    def partial(self, m: int) -> "PartialPotential":
        nu, mu = intensities(self, m)
        return PartialPotential(self, int(m), nu, mu)

    def scaled(self, s: float) -> "ABModel":
        """The model with V and Phi multiplied by s (vanishing-field limit as s -> 0)."""
        s = float(s)
        V, w = self.V, self.winding
        return replace(
            self,
            name=f"{self.name}*{s:g}",
            V=lambda rho: s * V(rho),
            winding=lambda rho: s * w(rho),
            alpha=s * self.alpha,
            beta=s * self.beta,
            family="scaled",
            params={**self.params, "scale": s},
            closed_form=None,
        )


@dataclass(frozen=True)
class PartialPotential:
    """U_m for one channel together with its inverse-square intensities."""

    model: ABModel
    m: int
    nu: float
    mu: float

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        return self.model.V(rho) + (self.m - self.model.winding(rho)) ** 2 / rho**2

    def rho2U(self, rho):
        """rho**2 * U_m(rho), finite at both ends for regular models."""
        rho = np.asarray(rho, dtype=float)
        return rho**2 * self.model.V(rho) + (self.m - self.model.winding(rho)) ** 2

    def closed_form(self, rho):
        """Model-specific closed form of U_m, if the model provides one."""
        if self.model.closed_form is None:
            raise ModelError(f"model {self.model.name!r} has no closed-form U_m")
        return self.model.closed_form(self.m, np.asarray(rho, dtype=float))


@dataclass(frozen=True)
class SolitonParams:
    """Belavin-Polyakov soliton: topological charge q, radius R, phase phi0."""

    q: int
    R: float = 1.0
    phi0: float = 0.0


def _check_R(R: float) -> float:
    R = float(R)
    if not (math.isfinite(R) and R > 0.0):
        raise ModelError(f"length scale R must be positive, got {R}")
    return R


def make_free(R: float = 1.0) -> ABModel:
    R = _check_R(R)
    return ABModel(
        name="free",
        V=_zero,
        winding=_zero,
        alpha=0.0,
        beta=0.0,
        R=R,
        family="free",
        tail_start=0.0,
        flux_only=True,
        closed_form=lambda m, rho: m * m / rho**2,
    )


def make_centrifugal(alpha: float, beta: float, R: float = 1.0) -> ABModel:
    """Piecewise-constant flux: winding alpha for rho <= R, beta beyond."""
    R = _check_R(R)
    alpha = float(alpha)
    beta = float(beta)

    def winding(rho):
        return np.where(np.asarray(rho) <= R, alpha, beta)

    def closed(m, rho):
        return np.where(rho <= R, (m - alpha) ** 2, (m - beta) ** 2) / rho**2

    return ABModel(
        name="centrifugal",
        V=_zero,
        winding=winding,
        alpha=alpha,
        beta=beta,
        R=R,
        family="centrifugal",
        params={"alpha": alpha, "beta": beta, "R": R},
        breakpoints=(R,),
        tail_start=R,
        flux_only=True,
        closed_form=closed,
    )


def make_returned_flux(Phi0: float, R: float = 1.0) -> ABModel:
    """Flux line Phi0 at the origin with the flux returned on the cylinder rho = R."""
    model = make_centrifugal(float(Phi0) / (2.0 * math.pi), 0.0, R)
    return replace(model, name="returned-flux", params={"Phi0": float(Phi0), "R": model.R})


def make_conventional_ab(B: float, R: float = 1.0) -> ABModel:
    """Uniform field B inside rho < R, no field outside."""
    R = _check_R(R)
    B = float(B)
    beta = 0.5 * B * R * R

    def winding(rho):
        rho = np.asarray(rho, dtype=float)
        return np.where(rho < R, 0.5 * B * rho**2, beta)

    return ABModel(
        name="conventional",
        V=_zero,
        winding=winding,
        alpha=0.0,
        beta=beta,
        R=R,
        family="conventional",
        params={"B": B, "R": R},
        breakpoints=(R,),
        tail_start=R,
        flux_only=True,
        closed_form=lambda m, rho: (m - winding(rho)) ** 2 / rho**2,
    )


def make_pure_flux(alpha: float, R: float = 1.0) -> ABModel:
    """Infinitely thin flux line, winding alpha at every radius."""
    R = _check_R(R)
    alpha = float(alpha)
    return ABModel(
        name="pure-flux",
        V=_zero,
        winding=lambda rho: np.full_like(np.asarray(rho, dtype=float), alpha),
        alpha=alpha,
        beta=alpha,
        R=R,
        family="pure-flux",
        params={"alpha": alpha},
        tail_start=0.0,
        flux_only=True,
        closed_form=lambda m, rho: (m - alpha) ** 2 / rho**2,
    )


def _bp_angles(q: int, R: float, rho):
    """cos(theta0) and sin(theta0) of the BP soliton, tan(theta0/2) = (R/rho)^|q|."""
    rho = np.asarray(rho, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        s = (rho / R) ** abs(q)
    # t = min(s, 1/s) keeps every intermediate in [0, 1]
    inside = s < 1.0
    t = np.where(inside, s, 1.0 / np.where(s == 0.0, 1.0, s))
    t = np.where(s == 0.0, 0.0, t)
    t2 = t * t
    cos = (1.0 - t2) / (1.0 + t2)
    cos = np.where(inside, -cos, cos)
    sin = 2.0 * t / (1.0 + t2)
    return cos, sin


def make_bp_soliton(params: SolitonParams) -> ABModel:
    """Magnon scattering on a Belavin-Polyakov soliton as an AB problem."""
    q = int(params.q)
    if q == 0 or q != params.q:
        raise ModelError(f"soliton charge q must be a nonzero integer, got {params.q}")
    R = _check_R(params.R)

    def V(rho):
        rho = np.asarray(rho, dtype=float)
        _, sin = _bp_angles(q, R, rho)
        return -(q * q) * sin**2 / rho**2

    def winding(rho):
        cos, _ = _bp_angles(q, R, rho)
        return -q * cos

    def closed(m, rho):
        cos, sin = _bp_angles(q, R, rho)
        cos2 = cos**2 - sin**2
        return (m * m + 2 * m * q * cos + q * q * cos2) / rho**2

    return ABModel(
        name="soliton",
        V=V,
        winding=winding,
        alpha=float(q),
        beta=float(-q),
        R=R,
        family="soliton",
        params={"q": q, "R": R, "phi0": float(params.phi0)},
        closed_form=closed,
    )


def make_flux_well(alpha: float, V0: float, R: float = 1.0) -> ABModel:
    """Pure flux line alpha inside an attractive disc V = -V0 for rho <= R."""
    R = _check_R(R)
    V0 = float(V0)
    if not (math.isfinite(V0) and V0 > 0.0):
        raise ModelError(f"well depth V0 must be positive, got {V0}")
    alpha = float(alpha)

    def V(rho):
        return np.where(np.asarray(rho) <= R, -V0, 0.0)

    return ABModel(
        name="flux-well",
        V=V,
        winding=lambda rho: np.full_like(np.asarray(rho, dtype=float), alpha),
        alpha=alpha,
        beta=alpha,
        R=R,
        family="flux-well",
        params={"alpha": alpha, "V0": V0, "R": R},
        breakpoints=(R,),
        tail_start=R,
        closed_form=lambda m, rho: V(rho) + (m - alpha) ** 2 / rho**2,
    )


def from_table(
    samples: Sequence[Sequence[float]], R: float = 1.0, name: str = "table"
) -> ABModel:
    """Build a model from (rho, V, Phi/2pi) samples.

    Values are joined by monotone cubic (PCHIP) interpolation in log(rho).
    Outside the table the winding is held at its end values (which define
    alpha and beta); V is held constant below the first radius and is zero
    beyond the last.
    """
    R = _check_R(R)
    try:
        arr = np.asarray(samples, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"table is not numeric: {exc}") from None
    if arr.ndim != 2 or arr.shape[0] < 8 or arr.shape[1] != 3:
        raise ModelError("table needs at least 8 rows of (rho, V, Phi) triples")
    if not np.all(np.isfinite(arr)):
        raise ModelError("table contains non-finite values")
    rho, v, w = arr.T
    if rho[0] <= 0.0:
        raise ModelError("table radii must be positive")
    if np.any(np.diff(rho) <= 0.0):
        raise ModelError("table radii must be strictly increasing")
    if rho[0] > 1e-3 * rho[-1]:
        raise ModelError("first table radius must be at most 1e-3 of the last")
    lr = np.log(rho)
    v_int = PchipInterpolator(lr, v, extrapolate=False)
    w_int = PchipInterpolator(lr, w, extrapolate=False)
    lo, hi = rho[0], rho[-1]
    v_lo, w_lo, w_hi = float(v[0]), float(w[0]), float(w[-1])

    def V(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            inner = v_int(np.log(np.clip(x, lo, hi)))
        return np.where(x < lo, v_lo, np.where(x > hi, 0.0, inner))

    def winding(x):
        x = np.asarray(x, dtype=float)
        inner = w_int(np.log(np.clip(x, lo, hi)))
        return np.where(x < lo, w_lo, np.where(x > hi, w_hi, inner))

    return ABModel(
        name=name,
        V=V,
        winding=winding,
        alpha=w_lo,
        beta=w_hi,
        R=R,
        family="table",
        params={"rows": int(arr.shape[0])},
        tail_start=float(hi),
        flux_only=bool(np.all(v == 0.0)),
        regular_ends=False,
    )


def read_table(path: str | Path, name: str | None = None) -> ABModel:
    """Read a custom model file: header ``rho,V,Phi`` then numeric rows.

    rho is in units of R and Phi in units of 2 pi.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["rho", "V", "Phi"]:
                raise ModelError(f"{path}: expected header 'rho,V,Phi'")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 3:
                    raise ModelError(f"{path}:{lineno}: expected 3 columns")
                try:
                    rows.append([float(c) for c in row])
                except ValueError:
                    raise ModelError(f"{path}:{lineno}: non-numeric value") from None
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc}") from None
    return from_table(rows, R=1.0, name=name or path.stem)


def _stabilized_limit(pp_rho2U, radii) -> float:
    vals = np.asarray(pp_rho2U(np.asarray(radii, dtype=float)), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ModelError("singularity not inverse-square: rho^2 U_m is not finite")
    ref = max(float(np.max(np.abs(vals))), 1e-12)
    if float(np.ptp(vals)) > _PROBE_SPREAD * ref:
        raise ModelError(
            f"singularity not inverse-square: rho^2 U_m varies over probe radii {vals}"
        )
    limit = float(vals[-1])
    if limit < -_PROBE_SPREAD * ref:
        raise ModelError(f"attractive inverse-square limit {limit} (fall to the centre)")
    return math.sqrt(max(limit, 0.0))


def intensities(model: ABModel, m: int) -> tuple[float, float]:
    """Inverse-square intensities (nu, mu) of U_m at the origin and at infinity."""
    if model.regular_ends:
        return abs(m - model.alpha), abs(m - model.beta)

    def rho2U(rho):
        return rho**2 * model.V(rho) + (m - model.winding(rho)) ** 2

    R = model.R
    nu = _stabilized_limit(rho2U, [r * R for r in _PROBE_SMALL])
    mu = _stabilized_limit(rho2U, [r * R for r in _PROBE_LARGE])
    return nu, mu


# name -> (builder, default parameters); used by the CLI and the catalog checks
MODEL_CATALOG: dict[str, tuple[Callable[..., ABModel], dict[str, float]]] = {
    "free": (make_free, {"R": 1.0}),
    "centrifugal": (make_centrifugal, {"alpha": 0.5, "beta": 0.0, "R": 1.0}),
    "returned-flux": (make_returned_flux, {"Phi0": math.pi, "R": 1.0}),
    "conventional": (make_conventional_ab, {"B": 0.6, "R": 1.0}),
    "pure-flux": (make_pure_flux, {"alpha": 0.5}),
    "soliton": (lambda q, R=1.0: make_bp_soliton(SolitonParams(q=q, R=R)), {"q": 1, "R": 1.0}),
    "flux-well": (make_flux_well, {"alpha": 0.0, "V0": 5.0, "R": 1.0}),
}


def catalog_models() -> list[ABModel]:
    """Every built-in model at its default parameters."""
    return [builder(**kw) for builder, kw in MODEL_CATALOG.values()]
