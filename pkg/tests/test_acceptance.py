"""Acceptance criteria 1-9, one pass/fail line each at the stated tolerance."""

import math
import time

import numpy as np

from ablevinson.cylfn import eval_pair, wronskian_residual
from ablevinson.levinson import soliton_expected, verify
from ablevinson.observables import parseval_check
from ablevinson.potentials import (
    SolitonParams,
    catalog_models,
    make_bp_soliton,
    make_centrifugal,
    make_conventional_ab,
    make_flux_well,
    make_pure_flux,
    make_returned_flux,
)
from ablevinson.radial import closed_form_centrifugal_delta, phase_shift, phase_sweep
from ablevinson.spectrum import classify_zero_energy, count_bound, count_bound_bisect

PI = math.pi


def _mod_pi(a, b):
    d = (a - b) % PI
    return min(d, PI - d)


def test_1_centrifugal_oracle(acceptance):
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        alpha, beta = rng.uniform(-2.0, 2.0, size=2)
        R = rng.uniform(0.5, 2.0)
        model = make_centrifugal(alpha, beta, R)
        for m in range(-3, 4):
            for x in np.logspace(-2, math.log10(50.0), 12):
                k = x / R
                got = phase_shift(model, m, k)
                worst = max(worst, _mod_pi(got, closed_form_centrifugal_delta(m, alpha, beta, R, k)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed <= 120.0
    assert acceptance(1, "centrifugal oracle", ok, f"max error {worst:.2e} rad, {elapsed:.1f} s")


def test_2_returned_flux_value(acceptance):
    start = time.perf_counter()
    lhs = phase_sweep(make_returned_flux(PI, 1.0), 1).lhs
    err = abs(lhs + PI / 4)
    ok = err <= 1e-3 * PI
    detail = f"lhs/pi = {lhs / PI:.7f}, error {err / PI:.1e} pi, {time.perf_counter() - start:.1f} s"
    assert acceptance(2, "returned-flux -Phi0/4", ok, detail)


def test_3_conventional_relation(acceptance):
    worst = 0.0
    for beta in (0.3, 0.5, 0.9):
        model = make_conventional_ab(2.0 * beta, 1.0)
        for m in range(-3, 4):
            expected = 0.5 * PI * (abs(m) - abs(m - beta))
            worst = max(worst, abs(phase_sweep(model, m).lhs - expected))
    ok = worst <= 1e-3 * PI
    assert acceptance(3, "conventional AB relation", ok, f"max error {worst / PI:.1e} pi")


def test_4_pure_flux(acceptance):
    spread = lhs_max = 0.0
    nb = 0
    for alpha in (0.3, 0.5, 1.7):
        model = make_pure_flux(alpha)
        for m in range(-3, 4):
            curve = phase_sweep(model, m)
            spread = max(spread, float(np.ptp(curve.delta)))
            lhs_max = max(lhs_max, abs(curve.lhs))
            nb = max(nb, count_bound(model, m))
    ok = spread <= 1e-6 and lhs_max <= 1e-6 and nb == 0
    detail = f"max k-spread {spread:.1e}, max |lhs| {lhs_max:.1e}, max N_b {nb}"
    assert acceptance(4, "pure flux line", ok, detail)


def test_5_soliton_table(acceptance):
    start = time.perf_counter()
    worst = 0.0
    classes_ok = reports_ok = True
    for q in (1, 2):
        model = make_bp_soliton(SolitonParams(q))
        reports = verify(model, range(-4, 5), 2e-2 * PI)
        reports_ok &= all(r.passed for r in reports)
        for r in reports:
            worst = max(worst, abs(r.lhs - soliton_expected(q, r.m)))
        for m in range(-4, 5):
            bound, half = classify_zero_energy(model, m)
            if m == -q + 1:
                classes_ok &= half and not bound
            elif -q + 2 <= m <= q:
                classes_ok &= bound and not half
    elapsed = time.perf_counter() - start
    ok = worst <= 2e-2 * PI and classes_ok and reports_ok and elapsed <= 300.0
    detail = f"max |lhs - table| {worst / PI:.1e} pi, classification {'ok' if classes_ok else 'wrong'}, {elapsed:.0f} s"
    assert acceptance(5, "soliton table", ok, detail)


def test_6_bound_count_oracle(acceptance):
    rng = np.random.default_rng(6)
    mismatches = channels = 0
    for _ in range(20):
        model = make_flux_well(rng.uniform(0.0, 1.0), rng.uniform(1.0, 100.0), rng.uniform(0.5, 2.0))
        for m in range(-3, 4):
            channels += 1
            mismatches += count_bound(model, m) != count_bound_bisect(model, m)
    ok = mismatches == 0
    assert acceptance(6, "bound-count oracle", ok, f"{mismatches} mismatches over {channels} channels")


def test_7_special_functions(acceptance):
    rng = np.random.default_rng(7)
    wr = max(wronskian_residual(rng.uniform(0.0, 10.0), 10.0 ** rng.uniform(-3.0, 2.0)) for _ in range(1000))
    half = 0.0
    for x in np.logspace(-2, 3, 200):
        amp = math.sqrt(2.0 / (PI * x))
        s, c = math.sin(x), math.cos(x)
        e = eval_pair(0.5, x)
        half = max(half, abs(e.j - amp * s) / amp, abs(e.y + amp * c) / amp)
        e = eval_pair(1.5, x)
        env = amp * max(1.0, 1.0 / x)
        half = max(half, abs(e.j - amp * (s / x - c)) / env, abs(e.y + amp * (c / x + s)) / env)
    ok = wr <= 1e-10 and half <= 1e-12
    assert acceptance(7, "special functions", ok, f"Wronskian {wr:.1e}, half-integer {half:.1e}")


def test_8_parseval(acceptance):
    worst = 0.0
    for model in catalog_models():
        for k in (0.3, 2.0):
            worst = max(worst, parseval_check(model, k, 10)[2])
    ok = worst <= 1e-6
    assert acceptance(8, "Parseval consistency", ok, f"max relative gap {worst:.1e}")


def test_9_integer_flux(acceptance):
    lhs = phase_sweep(make_returned_flux(2.0 * PI, 1.0), 1).lhs
    ok = abs(lhs) >= PI / 4 - 1e-3 * PI
    assert acceptance(9, "integer-flux sensitivity", ok, f"|lhs|/pi = {abs(lhs) / PI:.7f}")
