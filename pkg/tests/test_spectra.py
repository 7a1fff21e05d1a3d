import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parachain.model import ModelParams, build_H, hamiltonian
from parachain.spectra import (
    ConvergenceError,
    delta_m,
    eigensolve,
    excitation_ladder_check,
    gap,
    ladder_energy,
    ladder_multiset,
    solvable_spectrum,
    spectrum_table,
    write_spectrum_csv,
)


def dense_sector_levels(H, L, k):
    """brute-force oracle: numpy eigvalsh of each charge block of the dense matrix."""
    occ = np.array(list(itertools.product(range(3), repeat=L))).sum(axis=1) % 3
    M = H.toarray()
    return {q: np.linalg.eigvalsh(M[np.ix_(occ == q, occ == q)])[:k] for q in range(3)}


@pytest.mark.parametrize("L", [3, 4, 5])
@pytest.mark.parametrize("phi", [-1.0, 0.0, 0.5])
def test_sector_levels_match_dense_oracle(L, phi):
    tab = solvable_spectrum(L, phi, k=3)
    ref = dense_sector_levels(hamiltonian(L, phi), L, 3)
    for q in range(3):
        assert np.allclose(tab.energies(q), ref[q], atol=1e-10)
        assert np.all(tab.sectors[q].residuals < 1e-10)


def test_phi0_triplet_and_gap():
    L = 5
    tab = solvable_spectrum(L, 0.0, k=2)
    # known closed-form values: ground energy -2J(L-1) and gap 3J at phi = 0
    assert np.allclose(tab.level(0), -2 * (L - 1), atol=1e-10)
    assert gap(tab) == pytest.approx(3.0, abs=1e-10)


def test_trivial_phase_has_no_triplet():
    L = 5
    H = build_H(ModelParams(L, 10.0, 1.0, 0.0, False)).total
    tab = spectrum_table(H, k=1)
    e = tab.level(0)
    assert np.ptp(e) > 1.0


@pytest.mark.parametrize("phi", [-1.0, 0.7, 2.0])
def test_triplet_exactly_degenerate_on_solvable_line(phi):
    tab = solvable_spectrum(6, phi, k=1)
    assert delta_m(tab, 0) < 1e-9


def test_dense_and_iterative_agree():
    H = hamiltonian(6, 0.5)
    for q in range(3):
        d = eigensolve(H, q, 3, method="dense").energies
        it = eigensolve(H, q, 3, method="iterative").energies
        assert np.allclose(d, it, atol=1e-8)


def test_delta_m_examples():
    assert delta_m([1.0, 1.0, 1.0]) == 0.0
    eps = 0.3
    assert delta_m([0.0, eps, eps]) == pytest.approx(2 * eps)
    with pytest.raises(ValueError):
        delta_m([0.0, 1.0])


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(-3, 3))
def test_delta_m_is_shift_invariant(e, c):
    assert delta_m(np.array(e) + c) == pytest.approx(delta_m(e), abs=1e-9)


def test_ladder_energies():
    L = 4
    assert ladder_energy(L, [0, 0, 0]) == -2 * (L - 1)
    assert ladder_energy(L, [1, 0, 0]) - ladder_energy(L, [0, 0, 0]) == pytest.approx(3.0)
    assert ladder_energy(L, [0, 2, 0]) - ladder_energy(L, [0, 0, 0]) == pytest.approx(3.0)


@pytest.mark.parametrize("L", [3, 4])
def test_ladder_states_are_eigenstates(L):
    for mlist in itertools.product(range(3), repeat=L - 1):
        for i in range(3):
            rep = excitation_ladder_check(L, mlist, i=i)
            assert rep.annihilated or rep.residual < 1e-10


@pytest.mark.parametrize("L", [3, 4])
def test_full_spectrum_is_ladder_multiset(L):
    ev = np.linalg.eigvalsh(hamiltonian(L, 0.0).toarray())
    assert np.allclose(np.sort(ev), ladder_multiset(L), atol=1e-10)


def test_ladder_validation():
    with pytest.raises(ValueError):
        excitation_ladder_check(3, [0, 3])
    with pytest.raises(ValueError):
        excitation_ladder_check(3, [0])


def test_eigensolve_validation():
    H = hamiltonian(3, 0.5)
    with pytest.raises(ValueError):
        eigensolve(H, 0, 100)
    with pytest.raises(ValueError):
        eigensolve(H, 0, 1, method="magic")
    from parachain.operators import build_parafermion

    # charge-neutral but not Hermitian
    bilinear = build_parafermion(3, 1).H @ build_parafermion(3, 2)
    with pytest.raises(ValueError):
        eigensolve(bilinear, 0, 1)


def test_iterative_non_convergence_is_reported():
    H = hamiltonian(6, 0.5)
    with pytest.raises(ConvergenceError):
        eigensolve(H, 0, 3, method="iterative", maxiter=1, tol=1e-15)


def test_phi_small_splittings_ordered():
    tab = solvable_spectrum(8, 1e-3, k=5, with_boundary=False)
    assert delta_m(tab, 1) < delta_m(tab, 4)


def test_spectrum_csv_reproducible(tmp_path):
    tabs = [solvable_spectrum(3, p, k=2) for p in (0.0, 0.5)]
    a = write_spectrum_csv(tabs, tmp_path / "a.csv").read_text()
    b = write_spectrum_csv(tabs, tmp_path / "b.csv").read_text()
    assert a == b
    assert a.splitlines()[0].startswith("#")
