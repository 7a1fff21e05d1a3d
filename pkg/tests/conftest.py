"""Shared brute-force oracles and the acceptance report hook.

The oracles below are written from the definitions with plain numpy and do
not call into the package, so agreement with them is an independent check.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
import pytest
import scipy.sparse as sp

OMEGA = np.exp(2j * np.pi / 3)

# local Fock operators: c|n> = |n-1>
C_LOCAL = np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=complex)
N_LOCAL = np.diag([0.0, 1.0, 2.0]).astype(complex)
WN_LOCAL = np.diag([1.0, OMEGA, OMEGA**2])


def _kron_all(mats):
    out = sp.identity(1, dtype=complex, format="csr")
    for m in mats:
        out = sp.kron(out, sp.csr_matrix(m), format="csr")
    return out


@lru_cache(maxsize=None)
def oracle_C(L: int, j: int) -> sp.csr_matrix:
    """Fock parafermion annihilator ``C_j`` with its omega**N string (site 1 leftmost)."""
    mats = [WN_LOCAL] * (j - 1) + [C_LOCAL] + [np.eye(3)] * (L - j)
    return _kron_all(mats)


@lru_cache(maxsize=None)
def oracle_occupations(L: int) -> np.ndarray:
    """``occ[s, j]`` = occupation of site ``j`` (0-based) in basis state ``s``."""
    return np.array(list(itertools.product(range(3), repeat=L)), dtype=int).reshape(-1, L)


def oracle_gs(L: int, phi: float, i: int) -> np.ndarray:
    """Normalised ``sum_{N = i mod 3} exp(-phi N / 3) |n>`` by explicit enumeration."""
    N = oracle_occupations(L).sum(axis=1)
    v = np.where(N % 3 == i, np.exp(-phi * N / 3.0), 0.0).astype(complex)
    return v / np.linalg.norm(v)


def oracle_norm_constant(L: int, phi: float, i: int) -> float:
    N = oracle_occupations(L).sum(axis=1)
    return float(np.exp(-2.0 * phi * N[N % 3 == i] / 3.0).sum())


def oracle_charge(L: int) -> np.ndarray:
    return oracle_occupations(L).sum(axis=1) % 3


def oracle_G(L: int, phi: float, i: int, ell: int) -> complex:
    """``<g_i| C_1^dag^2 C_ell^2 |g_i>``."""
    v = oracle_gs(L, phi, i)
    C1, Cl = oracle_C(L, 1), oracle_C(L, ell)
    return complex(np.vdot(C1 @ (C1 @ v), Cl @ (Cl @ v)))


def oracle_F(L: int, phi: float, i: int, ell: int) -> complex:
    """``<g_i| C_ell^dag |g_{i-1}>``."""
    bra, ket = oracle_gs(L, phi, i), oracle_gs(L, phi, (i - 1) % 3)
    return complex(np.vdot(oracle_C(L, ell) @ bra, ket))


def oracle_density(L: int, phi: float, i: int) -> np.ndarray:
    """``<N_j>`` for every site."""
    p = np.abs(oracle_gs(L, phi, i)) ** 2
    return p @ oracle_occupations(L)


def oracle_schmidt(L: int, phi: float, i: int, ell: int):
    """Charge-resolved block weights and the entropy of the cut after site ``ell``."""
    M = oracle_gs(L, phi, i).reshape(3**ell, 3 ** (L - ell))
    qleft = oracle_charge(ell)
    lam = np.array([np.linalg.norm(M[qleft == p]) ** 2 for p in range(3)])
    s = np.linalg.svd(M, compute_uv=False) ** 2
    s = s[s > 1e-300]
    return lam, float(-(s * np.log(s)).sum())


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return float(abs(np.vdot(a, b)) ** 2)


# ---------------------------------------------------------------------------
# acceptance summary: one line per criterion at the end of the run
# ---------------------------------------------------------------------------

ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def record():
    """``record(criterion, label, passed, detail)`` stores an acceptance outcome."""

    def _record(criterion: int, label: str, passed: bool, detail: str = ""):
        ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[crit]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{lab}: {'ok' if p else 'FAILED'}{' (' + d + ')' if d else ''}" for lab, p, d in parts)
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'} - {detail}")
