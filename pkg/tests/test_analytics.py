import math

import numpy as np
import pytest
from conftest import OMEGA, oracle_density, oracle_F, oracle_G, oracle_schmidt
from hypothesis import given
from hypothesis import strategies as st

from parachain.analytics import (
    F_func,
    F_left_asymptote,
    F_right_asymptote,
    F_numeric,
    corr_G,
    corr_G_numeric,
    decay_window,
    density,
    ent_spectrum,
    ent_spectrum_numeric,
    entropy,
    fit_exponential_decay,
    fitted_xi,
    n_of_phi,
    observables,
    theta,
    xi,
)

PHIS = [-1.0, -0.3, 0.0, 0.5, 2.0]


@pytest.mark.parametrize("L", [2, 3, 5, 7])
@pytest.mark.parametrize("phi", PHIS)
def test_closed_forms_against_brute_force(L, phi):
    for i in range(3):
        assert density(L, phi, i) == pytest.approx(oracle_density(L, phi, i)[0], abs=1e-12)
        for ell in range(1, L + 1):
            assert abs(corr_G(L, phi, i, ell) - oracle_G(L, phi, i, ell)) < 1e-12
            assert abs(F_func(L, phi, i, ell) - oracle_F(L, phi, i, ell)) < 1e-12
        for ell in range(1, L):
            lam, S = ent_spectrum(L, phi, i, ell)
            lam_o, S_o = oracle_schmidt(L, phi, i, ell)
            assert np.allclose(lam, lam_o, atol=1e-12)
            assert S == pytest.approx(S_o, abs=1e-12)


def test_density_is_uniform():
    d = oracle_density(6, 0.4, 1)
    assert np.ptp(d) < 1e-12


@pytest.mark.parametrize("phi", [-1.0, 0.5])
def test_numeric_paths_agree(phi):
    L = 7
    ells = list(range(1, L + 1))
    vec = corr_G_numeric(L, phi, 0, ells, method="vector")
    mps = corr_G_numeric(L, phi, 0, ells, method="mps")
    hp = corr_G_numeric(L, phi, 0, ells, method="mps", dps=40)
    assert np.allclose(vec, mps, atol=1e-12)
    assert np.allclose(vec, hp, atol=1e-12)
    fv = F_numeric(L, phi, 1, ells, method="vector")
    fm = F_numeric(L, phi, 1, ells, method="mps")
    assert np.allclose(fv, fm, atol=1e-12)
    assert np.allclose(ent_spectrum_numeric(L, phi, 0, 3)[0], ent_spectrum(L, phi, 0, 3)[0], atol=1e-12)


def test_anchor_values_phi0():
    L = 8
    # known closed-form values: on-site and nearest-neighbour values at phi = 0
    assert corr_G(L, 0.0, 0, 1) == pytest.approx(1 / 3, abs=1e-14)
    assert corr_G(L, 0.0, 0, 2) == pytest.approx(1 / 9, abs=1e-14)
    assert corr_G(L, 0.0, 0, L) / corr_G(L, 0.0, 0, 2) == pytest.approx(OMEGA**2, abs=1e-14)
    lam, S = ent_spectrum(L, 0.0, 0, 4)
    assert np.allclose(lam, 1 / 3)
    assert S == pytest.approx(math.log(3))
    assert n_of_phi(0.0) == 1.0


def test_entanglement_spectrum_deep_in_chain():
    # the three Schmidt weights approach 1/3 once the cut is many xi from both ends
    lam, S = ent_spectrum(200, 1.0, 0, 100)
    assert np.allclose(lam, 1 / 3, atol=1e-12)
    assert S == pytest.approx(math.log(3), abs=1e-12)


def test_density_approaches_bulk():
    for phi in (-1.0, 0.5, 2.0):
        assert density(200, phi, 0) == pytest.approx(n_of_phi(phi), abs=1e-10)


@given(st.floats(-30, 30))
def test_n_of_phi_range(phi):
    n = n_of_phi(phi)
    assert 0.0 <= n <= 2.0
    assert n_of_phi(phi) + n_of_phi(-phi) == pytest.approx(2.0, abs=1e-12)


def test_xi_shape():
    # xi vanishes at phi = 0 (r = 0) and grows towards both sides
    assert xi(0.0) == 0.0
    grid = np.linspace(-6, 6, 241)
    vals = np.array([xi(p) for p in grid])
    right, left = vals[grid > 0], vals[grid < 0]
    assert np.all(np.diff(right) > 0)
    assert np.all(np.diff(left) < 0)


@given(st.floats(0.05, 8))
def test_xi_symmetric_growth(phi):
    assert xi(phi) > 0 and xi(-phi) > 0
    assert xi(phi + 0.5) > xi(phi)


def test_F_left_asymptote():
    L, phi = 200, 1.0
    for ell in (1, 3, 10):
        assert abs(F_func(L, phi, 0, ell) - F_left_asymptote(phi, 0, ell)) < 1e-10


def test_fit_exponential_decay_exact():
    x = np.arange(10)
    fit = fit_exponential_decay(x, 2.0 * np.exp(-x / 3.0))
    assert fit.length == pytest.approx(3.0)
    assert fit.r2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_exponential_decay([0, 1], [0.0, 1.0])


def test_decay_window():
    assert decay_window(120, 1.0) == (5, 58)
    with pytest.raises(ValueError):
        decay_window(12, 5.0)


def test_fitted_xi_small_chain():
    fit = fitted_xi(60, 1.0, dps=30)
    assert fit.length == pytest.approx(xi(1.0), rel=0.01)


def test_entropy_and_theta():
    assert entropy([0.5, 0.5, 0.0]) == pytest.approx(math.log(2))
    assert theta(5, 0.0) == 0.0
    ob = observables(6, 0.5, 1)
    assert ob.G.shape == (6,) and ob.ent_spectrum.shape == (5, 3)


def test_out_of_range_ell():
    with pytest.raises(IndexError):
        corr_G(4, 0.0, 0, 5)
    with pytest.raises(IndexError):
        ent_spectrum(4, 0.0, 0, 4)


@pytest.mark.parametrize("phi", [-2.0, -1.0, 1.0, 2.0, 3.0])
def test_density_correction_decays_on_scale_xi(phi):
    # only the envelope exp(-L/xi) is fixed; the sector prefactors are not
    x = xi(phi)
    Ls = np.arange(int(6 * x) + 3, int(16 * x) + 4, 3)
    d = [abs(density(int(L), phi, 0) - n_of_phi(phi)) for L in Ls]
    slope = np.polyfit(Ls, np.log(d), 1)[0]
    assert slope * x == pytest.approx(-1.0, rel=0.1)


@pytest.mark.parametrize("phi", [-1.0, 1.0, 2.0])
def test_F_asymptotes(phi):
    L = 60
    near_right = F_func(L, phi, 1, L - 2)
    assert abs(near_right - F_right_asymptote(L, phi, 1, L - 2)) < 1e-9 * abs(near_right)
    near_left = F_func(L, phi, 1, 20)
    assert abs(near_left - F_left_asymptote(phi, 1, 20)) < 1e-4 * abs(near_left)
