import numpy as np
import pytest
from conftest import fidelity

from parachain.dmrg import (
    DMRGConvergenceError,
    build_mpo,
    dmrg_excited,
    dmrg_gap,
    dmrg_ground,
    solvable_mpo,
    write_gap_csv,
)
from parachain.groundstate import build_gs_vector
from parachain.model import hamiltonian


def ed_sector_levels(L, phi, k=2):
    """brute-force oracle: dense diagonalisation of each charge block."""
    H = hamiltonian(L, phi)
    return {q: np.linalg.eigvalsh(H.restrict(q).toarray())[:k] for q in range(3)}


@pytest.mark.parametrize("L", [3, 4, 5])
@pytest.mark.parametrize("phi", [-1.0, 0.5, 2.0])
def test_mpo_reproduces_hamiltonian(L, phi):
    mpo = solvable_mpo(L, phi)
    assert np.allclose(mpo.to_dense(), hamiltonian(L, phi).toarray(), atol=1e-12)


def test_mpo_is_real_and_small():
    mpo = solvable_mpo(6, 0.7)
    assert mpo.dtype == np.float64
    assert max(W.shape[1] for W in mpo.tensors) <= 4


def test_build_mpo_from_random_blocks():
    rng = np.random.default_rng(0)
    L = 4
    sites = []
    for _ in range(L):
        a = rng.standard_normal((3, 3))
        sites.append(np.diag(np.diag(a + a.T)))
    b = rng.standard_normal((9, 9))
    # charge-neutral two-site term: keep entries with n1 + n2 conserved mod 3
    n = np.add.outer(np.arange(3), np.arange(3)).ravel() % 3
    b = (b + b.T) * (n[:, None] == n[None, :])
    mpo = build_mpo(sites, [b] * (L - 1))
    ref = sum(np.kron(np.kron(np.eye(3**j), sites[j]), np.eye(3 ** (L - j - 1))) for j in range(L))
    ref = ref + sum(np.kron(np.kron(np.eye(3**j), b), np.eye(3 ** (L - j - 2))) for j in range(L - 1))
    assert np.allclose(mpo.to_dense(), ref, atol=1e-12)


@pytest.mark.parametrize("phi", [0.5, -1.0, 0.7])
def test_small_chain_matches_ed(phi):
    L = 8
    ref = ed_sector_levels(L, phi)
    for q in range(3):
        g = dmrg_ground(L, phi, q, chi_max=60)
        e = dmrg_excited(g, L, phi, chi_max=60)
        assert g.energy == pytest.approx(ref[q][0], abs=1e-8)
        assert e.energy == pytest.approx(ref[q][1], abs=1e-8)
        # exact ground state is known in closed form
        assert fidelity(g.to_dense(), build_gs_vector(L, phi, q).full_vector()) > 1 - 1e-8
        assert abs(e.overlap(g)) < 1e-6


def test_energy_never_increases_between_sweeps():
    g = dmrg_ground(10, 1.0, 0, chi_max=40, tol=1e-13)
    energies = [s["energy"] for s in g.sweep_log]
    assert len(energies) >= 2
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_variational_bound_and_norm():
    L, phi = 6, 1.5
    g = dmrg_ground(L, phi, 1, chi_max=20)
    assert g.energy >= ed_sector_levels(L, phi, 1)[1][0] - 1e-10
    assert g.norm() == pytest.approx(1.0, abs=1e-12)
    assert max(g.bond_dims) <= 20


def test_phi0_gap_moderate_chain():
    r = dmrg_gap(12, 0.0, chi_max=30, tol=1e-10)
    assert r.gap == pytest.approx(3.0, abs=1e-6)
    assert np.allclose(r.E0, -2 * 11, atol=1e-8)


def test_strict_mode_raises():
    with pytest.raises(DMRGConvergenceError):
        dmrg_ground(10, 1.0, 0, chi_max=30, sweeps=1, strict=True)


def test_seed_reproducible():
    a = dmrg_ground(6, 0.3, 2, chi_max=20, seed=5)
    b = dmrg_ground(6, 0.3, 2, chi_max=20, seed=5)
    assert a.energy == b.energy


def test_validation():
    with pytest.raises(ValueError):
        dmrg_ground(3, 0.0, 0)
    with pytest.raises(ValueError):
        dmrg_ground(6, 0.0, 3)
    with pytest.raises(ValueError):
        dmrg_ground(6, 0.0, 0, chi_max=2)


def test_gap_csv(tmp_path):
    r = dmrg_gap(6, 0.5, chi_max=20)
    lines = write_gap_csv([r], tmp_path / "g.csv").read_text().splitlines()
    assert lines[0].startswith("#") and len(lines) == 2 + 3


def test_gap_reports_convergence_estimate():
    r = dmrg_gap(6, 0.5, chi_max=20)
    assert 0 <= r.max_energy_change < 1e-6
    loose = dmrg_gap(8, 1.0, chi_max=20, tol=1e-3)
    tight = dmrg_gap(8, 1.0, chi_max=20, tol=1e-12)
    assert tight.max_energy_change <= loose.max_energy_change
