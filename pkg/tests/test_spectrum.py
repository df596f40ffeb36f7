import numpy as np
import pytest

from ablevinson.errors import DomainError
from ablevinson.potentials import (
    SolitonParams,
    make_bp_soliton,
    make_centrifugal,
    make_flux_well,
    make_free,
    make_pure_flux,
)
from ablevinson.spectrum import (
    classify_zero_energy,
    count_bound,
    count_bound_bisect,
    spectrum_count,
    zero_energy_analysis,
)


@pytest.mark.parametrize("m", [-2, 0, 1, 3])
def test_flux_only_models_have_no_bound_states(m):
    for model in (make_free(), make_pure_flux(0.5), make_centrifugal(0.5, 0.0)):
        assert count_bound(model, m) == 0
        assert count_bound_bisect(model, m) == 0


def test_flux_well_counts():
    model = make_flux_well(0.0, 25.0, 1.0)
    counts = [count_bound(model, m) for m in range(-3, 4)]
    assert counts == [0, 1, 1, 2, 1, 1, 0]
    assert counts == [count_bound_bisect(model, m) for m in range(-3, 4)]


def test_flux_well_counts_grow_with_depth():
    prev = -1
    for V0 in np.linspace(1.0, 150.0, 12):
        total = sum(count_bound(make_flux_well(0.3, V0, 1.0), m) for m in range(-3, 4))
        assert total >= prev
        prev = total


def test_random_wells_match_bisection():
    rng = np.random.default_rng(3)
    for _ in range(4):
        model = make_flux_well(rng.uniform(0, 1), rng.uniform(1, 100), rng.uniform(0.5, 2.0))
        for m in (-1, 0, 2):
            assert count_bound(model, m) == count_bound_bisect(model, m)


def test_free_m0_is_constant_zero_energy_solution():
    c = zero_energy_analysis(make_free(), 0)
    assert c.decaying and c.half_bound and not c.bound
    assert c.mu == 0.0
    assert classify_zero_energy(make_free(), 1) == (False, False)


@pytest.mark.parametrize("q", [1, 2])
def test_soliton_zero_modes(q):
    model = make_bp_soliton(SolitonParams(q))
    for m in range(-4, 5):
        bound, half = classify_zero_energy(model, m)
        assert half == (m in (-q, -q + 1)), m  # mu = 0 and mu = 1 channels
        assert bound == (-q + 2 <= m <= q), m


def test_soliton_counts_include_zero_modes():
    model = make_bp_soliton(SolitonParams(2))
    assert count_bound(model, 0) == 1
    assert count_bound(model, 0, zero_modes=False) == 0
    sc = spectrum_count(model, -1)
    assert (sc.n_bound, sc.half_bound, sc.mu) == (0, True, 1.0)


def test_soliton_large_mu_channels_grow():
    model = make_bp_soliton(SolitonParams(3))
    for m in (4, 5):
        c = zero_energy_analysis(model, m)
        assert not c.decaying and c.nodes == 0


def test_bisect_rejects_bad_energy():
    with pytest.raises(DomainError):
        count_bound_bisect(make_flux_well(0.0, 5.0), 0, E_min=1.0)
