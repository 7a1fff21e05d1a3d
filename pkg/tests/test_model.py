import math

import numpy as np
import pytest
from conftest import OMEGA, oracle_C, oracle_charge, oracle_gs
from hypothesis import given, settings
from hypothesis import strategies as st

from parachain.model import (
    ModelParams,
    build_ell,
    build_ell_fock,
    build_H,
    build_H_from_parafermions,
    build_parent,
    check_time_reversal,
    compare_parent,
    gauged_clock_hamiltonian,
    hamiltonian,
    inversion_unitary,
    parent_scale,
    solvable_line,
)
from parachain.operators import build_charge, build_parafermion

W, WC = OMEGA, np.conj(OMEGA)


def oracle_parafermions(L):
    """gamma_{2j-1} = omega (C + C^dag2), gamma_{2j} = C omega^N + C^dag2 from plain arrays."""
    occ = np.array(np.unravel_index(np.arange(3**L), (3,) * L)).T
    g = {}
    for j in range(1, L + 1):
        C = oracle_C(L, j).toarray()
        Cd2 = C.conj().T @ C.conj().T
        wN = np.diag(W ** occ[:, j - 1])
        g[2 * j - 1] = W * (C + Cd2)
        g[2 * j] = C @ wN + Cd2
    return g


def oracle_hamiltonian(L, f, J, b, boundary):
    g = oracle_parafermions(L)
    d = lambda x: x.conj().T  # noqa: E731
    herm = lambda x: x + d(x)  # noqa: E731
    H0 = sum(herm(-f * WC * d(g[2 * j - 1]) @ g[2 * j]) for j in range(1, L + 1))
    H0 = H0 + sum(herm(-J * W * g[2 * j] @ d(g[2 * j + 1])) for j in range(1, L))
    H1 = np.zeros_like(H0)
    H2 = np.zeros_like(H0)
    for j in range(1, L):
        A = g[2 * j - 1] + d(g[2 * j - 1]) @ d(g[2 * j])
        B = g[2 * j + 2] + d(g[2 * j + 2]) @ d(g[2 * j + 1])
        H1 = H1 - J * herm(A @ d(g[2 * j + 1]) + g[2 * j] @ d(B))
        H2 = H2 - J * herm(WC * A @ d(B))
    H = H0 + b * H1 + b * b * H2
    if boundary:
        H = H + herm(0.5 * f * WC * (d(g[1]) @ g[2] + d(g[2 * L - 1]) @ g[2 * L]))
    return H


def test_solvable_line_values():
    # phi = 0 is the origin of the (f/J, b) plane
    assert solvable_line(0.0).as_tuple() == pytest.approx((0.0, 0.0), abs=0)
    # limits of the closed form
    assert solvable_line(60.0).as_tuple() == pytest.approx((-6.0, 1.0), abs=1e-12)
    assert solvable_line(-60.0).as_tuple() == pytest.approx((1.5, -0.5), abs=1e-12)
    assert solvable_line(math.inf).as_tuple() == pytest.approx((-6.0, 1.0))
    assert solvable_line(-math.inf).as_tuple() == pytest.approx((1.5, -0.5))
    with pytest.raises(ValueError):
        solvable_line(float("nan"))


@given(st.floats(-8, 8))
def test_solvable_line_formula(phi):
    e = math.exp(-phi)
    pt = solvable_line(phi)
    assert pt.f_over_J == pytest.approx(-6 * (1 - e * e) / (1 + 2 * e) ** 2, rel=1e-12, abs=1e-12)
    assert pt.b == pytest.approx((1 - e) / (1 + 2 * e), rel=1e-12, abs=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(1, 0.0)
    with pytest.raises(ValueError):
        ModelParams(3, 0.0, J=0.0)
    with pytest.raises(ValueError):
        ModelParams(3, float("inf"))


@pytest.mark.parametrize("L", [2, 3, 4])
@pytest.mark.parametrize("f,J,b,bd", [(1.0, 1.0, 0.0, False), (-0.7, 1.3, 0.4, True), (0.3, 0.8, -0.9, True)])
def test_hamiltonian_matches_parafermion_oracle(L, f, J, b, bd):
    # brute-force oracle: direct products of independently built parafermions
    H = build_H(ModelParams(L, f, J, b, bd)).total.toarray()
    assert np.allclose(H, oracle_hamiltonian(L, f, J, b, bd), atol=1e-12)
    assert np.abs(H - H.conj().T).max() < 1e-13


def test_local_and_reference_constructions_agree():
    p = ModelParams(3, 0.4, 1.0, 0.3, True)
    a, r = build_H(p), build_H_from_parafermions(p)
    for name in ("H0", "H1", "H2", "HB"):
        assert getattr(a, name).allclose(getattr(r, name), atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(st.floats(-2, 2), st.floats(0.2, 2), st.floats(-1, 1))
def test_charge_conservation(f, J, b):
    H = build_H(ModelParams(3, f, J, b, True)).total
    assert H.charge_leakage() < 1e-14
    Q = build_charge(3)
    assert (H @ Q - Q @ H).norm() < 1e-12


def test_trivial_point_strong_edge_mode():
    L = 4
    H = build_H(ModelParams(L, 0.0, 1.0, 0.0)).total
    g1 = build_parafermion(L, 1)
    assert (H @ g1 - g1 @ H).norm() < 1e-13


@pytest.mark.parametrize("L", [3, 4])
def test_ell_fock_expansion(L):
    for j in range(1, L):
        assert build_ell(L, j).allclose(build_ell_fock(L, j), atol=1e-13)


def test_ell_sum_reproduces_phi0_hamiltonian():
    L = 4
    H = hamiltonian(L, 0.0).toarray()
    S = sum((build_ell(L, j).H @ build_ell(L, j)).toarray() for j in range(1, L))
    assert np.allclose(-2 * (L - 1) * np.eye(3**L) + S, H, atol=1e-12)


@pytest.mark.parametrize("L", [2, 4, 6])
def test_ell_annihilates_phi0_ground_states(L):
    for i in range(3):
        v = oracle_gs(L, 0.0, i)
        for j in range(1, L):
            assert np.linalg.norm(build_ell(L, j) @ v) < 1e-12


@pytest.mark.parametrize("phi", [-1.0, 0.5, 2.0])
def test_parent_constructions_agree_and_psd(phi):
    L = 4
    Z, Wf = build_parent(L, phi, method="Z"), build_parent(L, phi, method="W")
    assert Z.allclose(Wf, atol=1e-12 * max(1.0, Z.norm()))
    ev = np.linalg.eigvalsh(Z.toarray())
    assert ev.min() > -1e-10 * max(1.0, ev.max())
    with pytest.raises(ValueError):
        build_parent(L, phi, method="X")


@pytest.mark.parametrize("phi", [-1.0, 0.5, 2.0])
def test_parent_relation_is_affine(phi):
    # H_phi = kappa (H + H_B) + c exactly; kappa = 1 only at phi = 0
    cmp = compare_parent(3, phi)
    assert cmp.scaled_residual < 1e-10
    assert cmp.scale == pytest.approx(parent_scale(phi), rel=1e-10)


def test_parent_phi0_is_shifted_hamiltonian():
    cmp = compare_parent(3, 0.0)
    assert cmp.literal_residual < 1e-12
    assert cmp.offset == pytest.approx(2 * (3 - 1), abs=1e-12)


def test_time_reversal_and_charge_conjugation():
    rng = np.random.default_rng(3)
    f, b = rng.uniform(-1, 1, 2)
    rep = check_time_reversal(ModelParams(3, f, 1.0, b, True))
    assert rep.clock_form_residual < 1e-12
    assert rep.time_reversal_imag < 1e-12
    assert rep.charge_conjugation_residual > 1e-3
    assert rep.tc_residual > 1e-3
    assert rep.inversion_residual < 1e-12
    rep0 = check_time_reversal(ModelParams(3, f, 1.0, 0.0, True))
    assert rep0.charge_conjugation_residual < 1e-12


@pytest.mark.parametrize("L", [3, 4, 5])
def test_inversion_spectrum(L):
    p = ModelParams.on_solvable_line(L, 0.8, with_boundary=False)
    H = gauged_clock_hamiltonian(p).toarray()
    perm = np.arange(3**L).reshape((3,) * L).transpose(tuple(range(L))[::-1]).ravel()
    Hr = H[np.ix_(perm, perm)]
    assert np.allclose(np.linalg.eigvalsh(H), np.linalg.eigvalsh(Hr), atol=1e-10)
    I = inversion_unitary(L)
    Hf = hamiltonian(L, 0.8)
    assert (I @ Hf - Hf @ I).norm() < 1e-12


def test_boundary_term_is_order_one():
    diffs = []
    for L in range(4, 8):
        e_b = np.linalg.eigvalsh(hamiltonian(L, 0.5, with_boundary=True).restrict(0).toarray())[0]
        e_n = np.linalg.eigvalsh(hamiltonian(L, 0.5, with_boundary=False).restrict(0).toarray())[0]
        diffs.append(L * abs(e_b / L - e_n / L))
    # the per-site difference times L stays bounded
    assert max(diffs) < 2 * min(diffs) + 1.0


def test_sector_blocks_of_hamiltonian():
    L = 3
    H = hamiltonian(L, 0.5).toarray()
    q = oracle_charge(L)
    assert np.abs(H[q[:, None] != q[None, :]]).max() == 0.0
