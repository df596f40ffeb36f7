"""Partial and truncated total cross sections and the angular scattering amplitude.

With phase shifts delta_m(k) the partial cross sections are
(4/k) sin^2(delta_m), and the amplitude is

    F(chi) = exp(-i pi/4) / sqrt(2 pi k) * sum_m (exp(2 i delta_m) - 1) exp(i m chi).

For generic AB fields delta_m tends to a nonzero constant as |m| grows, so
both sums diverge.  Everything here is truncated at |m| <= m_max and carries
a ``converged`` flag: the truncation is deemed unconverged when each of the
last three |m| shells adds more than 1e-4 of the running total.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .potentials import ABModel
from .radial import phase_shift

__all__ = [
    "AmplitudeCurve",
    "CrossSectionRow",
    "amplitude",
    "cross_section_rows",
    "parseval_check",
    "partial_cross_section",
    "shells_converged",
    "total_cross_section",
]

_SHELL_FRACTION = 1e-4
_SHELLS = 3


@dataclass(frozen=True)
class CrossSectionRow:
    m: int
    delta: float
    sigma_partial: float


@dataclass(frozen=True)
class AmplitudeCurve:
    """F(chi) truncated at |m| <= m_max."""

    chi_grid: np.ndarray
    F: np.ndarray
    m_max: int
    converged: bool


def _check_k(k: float) -> float:
    k = float(k)
    if not (k > 0.0 and math.isfinite(k)):
        raise DomainError(f"wavenumber must be positive and finite, got {k}")
    return k


def _check_m_max(m_max: int) -> int:
    if int(m_max) != m_max or m_max < 1:
        raise DomainError(f"m_max must be an integer >= 1, got {m_max}")
    return int(m_max)


def partial_cross_section(delta: float, k: float) -> float:
    """(4/k) sin^2(delta)."""
    k = _check_k(k)
    return 4.0 / k * math.sin(delta) ** 2


def _phases(model: ABModel, k: float, m_max: int, refine: float, workers: int) -> dict[int, float]:
    ms = range(-m_max, m_max + 1)

    def one(m):
        return phase_shift(model, m, k, refine=refine)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(one, ms))
    else:
        values = [one(m) for m in ms]
    return dict(zip(ms, values))


def cross_section_rows(
    model: ABModel, k: float, m_max: int, *, refine: float = 1.0, workers: int = 1
) -> list[CrossSectionRow]:
    """One row per channel, -m_max <= m <= m_max."""
    k = _check_k(k)
    m_max = _check_m_max(m_max)
    deltas = _phases(model, k, m_max, refine, workers)
    return [CrossSectionRow(m, d, partial_cross_section(d, k)) for m, d in deltas.items()]


def shells_converged(rows: list[CrossSectionRow]) -> bool:
    """False when each of the last three |m| shells adds more than 1e-4 of the running total."""
    shells: dict[int, float] = {}
    for r in rows:
        shells[abs(r.m)] = shells.get(abs(r.m), 0.0) + r.sigma_partial
    order = sorted(shells)
    running = np.cumsum([shells[a] for a in order])
    tail = order[-_SHELLS:]
    for a in tail:
        i = order.index(a)
        if not shells[a] > _SHELL_FRACTION * running[i]:
            return True
    return False


def total_cross_section(
    model: ABModel, k: float, m_max: int, *, refine: float = 1.0, workers: int = 1
) -> tuple[float, bool]:
    """Truncated sum of partial cross sections and its convergence flag."""
    rows = cross_section_rows(model, k, m_max, refine=refine, workers=workers)
    return float(math.fsum(r.sigma_partial for r in rows)), shells_converged(rows)


def _amplitude_from_rows(rows: list[CrossSectionRow], k: float, chi: np.ndarray) -> np.ndarray:
    ms = np.array([r.m for r in rows], dtype=float)
    coef = np.expm1(2j * np.array([r.delta for r in rows]))
    pref = np.exp(-0.25j * math.pi) / math.sqrt(2.0 * math.pi * k)
    return pref * (np.exp(1j * np.outer(chi, ms)) @ coef)


def amplitude(
    model: ABModel,
    k: float,
    chi_grid,
    m_max: int,
    *,
    refine: float = 1.0,
    workers: int = 1,
) -> AmplitudeCurve:
    """F(chi) on the given angles from the channels |m| <= m_max."""
    chi = np.asarray(chi_grid, dtype=float)
    if chi.ndim != 1 or chi.size == 0 or not np.all(np.isfinite(chi)):
        raise DomainError("chi grid must be a nonempty one-dimensional array of finite angles")
    rows = cross_section_rows(model, k, m_max, refine=refine, workers=workers)
    F = _amplitude_from_rows(rows, k, chi)
    return AmplitudeCurve(chi, F, int(m_max), shells_converged(rows))


def parseval_check(
    model: ABModel, k: float, m_max: int, *, n_chi: int | None = None, refine: float = 1.0
) -> tuple[float, float, float]:
    """Trapezoid integral of |F|^2 over a full period, the summed cross sections and their relative gap.

    On a uniform periodic grid with more than 2 m_max points the trapezoid
    rule integrates the truncated |F|^2 exactly, so the gap measures rounding only.
    """
    rows = cross_section_rows(model, k, m_max, refine=refine)
    n = 4 * int(m_max) + 4 if n_chi is None else int(n_chi)
    if n <= 2 * m_max:
        raise DomainError(f"n_chi must exceed 2 m_max = {2 * m_max}")
    chi = 2.0 * math.pi * np.arange(n) / n
    F = _amplitude_from_rows(rows, k, chi)
    integral = float(2.0 * math.pi / n * np.sum(np.abs(F) ** 2))
    total = float(math.fsum(r.sigma_partial for r in rows))
    scale = max(abs(total), abs(integral))
    rel = abs(integral - total) / scale if scale > 0.0 else 0.0
    return integral, total, rel
