"""Exact ground states of the solvable line in three representations.

For charge ``i`` the (unnormalised) amplitude of an occupation string with
total number ``N`` is ``exp(-phi N / 3)`` when ``N = i mod 3`` and zero
otherwise.  The same state is

* a dense vector over :class:`~parachain.algebra.SectorBasis` (``L`` small),
* a bond-dimension-3 matrix product state with diagonal site matrices
  ``A[n] = (exp(-phi/3) D)**n`` where ``D = diag(1, omega, omega**2)``,
* a weighted sum of three product states ``Z_{-phi} (x)_j |~t>``.

Normalisation constants are handled in log space through

``A(L, k) = (1 + omega**k x + omega**(2k) x**2)**L``, ``x = exp(-2 phi/3)``,
``N_{L,i} = (1/3) sum_k omega**(-ik) A(L, k)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import reduce
from pathlib import Path

import numpy as np

from .algebra import OMEGA_C, enumerate_sector, total_number
from .operators import check_dim

__all__ = [
    "NormTable",
    "norm_constants",
    "norm_constants_multinomial",
    "site_base",
    "GroundState",
    "build_gs_vector",
    "GsMps",
    "build_gs_mps",
    "FactorizedState",
    "factorized_form",
    "export_amplitudes",
    "load_amplitudes",
]

W = OMEGA_C


def site_base(phi: float, k: int) -> complex:
    """``1 + omega**k x + omega**(2k) x**2`` with ``x = exp(-2 phi / 3)``.

    ``A(L, k)`` is this number raised to the power ``L``.
    """
    x = math.exp(-2.0 * phi / 3.0)
    if k % 3 == 0:
        return complex(1.0 + x + x * x)
    wk = W ** (k % 3)
    return 1.0 + wk * x + wk * wk * x * x


def charge_ratio(phi: float) -> complex:
    """``r = base_1 / base_0``; ``|r| = exp(-1/xi)``."""
    if phi == 0:
        return 0j
    return site_base(phi, 1) / site_base(phi, 0).real


def sector_factor(i: int, m: int, phi: float) -> float:
    """``D_i(m) = 1 + 2 Re(omega**(-i) r**m)``, so ``N_{m,i} = A(m,0) D_i(m) / 3``."""
    if m == 0:
        return 3.0 if i % 3 == 0 else 0.0
    r = charge_ratio(phi)
    return float(1.0 + 2.0 * (W ** (-(i % 3)) * r**m).real)


@dataclass(frozen=True)
class NormTable:
    """Normalisation data of the three ground states.

    Attributes
    ----------
    log_A0 : float
        ``log A(L, phi, 0)`` (``A(L, phi, 0)`` is real and positive).
    ratio : complex
        ``A(L, phi, 1) / A(L, phi, 0)``.
    log_N : ndarray, shape (3,)
        ``log N_{L,phi,i}``.
    """

    L: int
    phi: float
    log_A0: float
    ratio: complex
    log_N: np.ndarray

    @property
    def A(self) -> np.ndarray:
        """``A(L, phi, k)`` for ``k = 0, 1, 2`` (may overflow to inf)."""
        a0 = math.exp(self.log_A0) if self.log_A0 < 700 else math.inf
        return np.array([a0, a0 * self.ratio, a0 * np.conj(self.ratio)])

    @property
    def N(self) -> np.ndarray:
        """``N_{L,phi,i}`` for ``i = 0, 1, 2`` (may overflow to inf)."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_N)

    @property
    def theta(self) -> float:
        """Phase of ``A(L, phi, 1) / A(L, phi, 0)``."""
        return float(np.angle(self.ratio))


def norm_constants(L: int, phi: float) -> NormTable:
    """Closed-form normalisation constants in log space.

    Examples
    --------
    >>> np.allclose(norm_constants(4, 0.0).N, 27.0)
    True
    """
    if L < 0:
        raise ValueError("L must be >= 0")
    if not np.isfinite(phi):
        raise ValueError("phi must be finite")
    b0 = site_base(phi, 0).real
    log_A0 = L * math.log(b0)
    ratio = charge_ratio(phi) ** L if L > 0 else 1.0 + 0j
    D = np.array([1.0 + 2.0 * (W ** (-i) * ratio).real for i in range(3)])
    if L == 0:
        D = np.array([3.0, 0.0, 0.0])
    with np.errstate(divide="ignore"):
        log_N = log_A0 + np.log(np.maximum(D, 0.0) / 3.0)
    return NormTable(L, float(phi), log_A0, complex(ratio), log_N)


def norm_constants_multinomial(L: int, phi: float) -> np.ndarray:
    """``N_{L,phi,i}`` from the multinomial sum over ``(n_1, n_2)`` counts.

    ``N_i = sum_{N = i mod 3} exp(-2 phi N / 3) sum_{n1 + 2 n2 = N} L!/(n1! n2! (L-n1-n2)!)``.
    Exact integer coefficients; intended for moderate ``L``.
    """
    out = np.zeros(3)
    for n2 in range(L + 1):
        for n1 in range(L - n2 + 1):
            N = n1 + 2 * n2
            mult = math.comb(L, n2) * math.comb(L - n2, n1)
            out[N % 3] += mult * math.exp(-2.0 * phi * N / 3.0)
    return out


# ---------------------------------------------------------------------------
# Dense vector
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GroundState:
    """``|g_{i,phi}>`` as a unit vector over the charge-``i`` sector."""

    L: int
    phi: float
    i: int
    vector: np.ndarray
    norm: NormTable

    @property
    def norm_const(self) -> float:
        return float(self.norm.N[self.i])

    @property
    def sector(self):
        return enumerate_sector(self.L, self.i)

    def full_vector(self) -> np.ndarray:
        """Embed into the ``3**L`` product space."""
        out = np.zeros(3**self.L, dtype=complex)
        out[self.sector.indices] = self.vector
        return out

    @property
    def mps(self) -> "GsMps":
        return build_gs_mps(self.L, self.phi, self.i)

    @property
    def factorized(self) -> "FactorizedState":
        return factorized_form(self.L, self.phi, self.i)


def build_gs_vector(L: int, phi: float, i: int, *, dim_cap: int | None = None) -> GroundState:
    """Dense normalised ground state of charge ``i``."""
    if i not in (0, 1, 2):
        raise ValueError(f"charge must be 0, 1 or 2, got {i!r}")
    check_dim(L, dim_cap)
    basis = enumerate_sector(L, i)
    N = total_number(L)[basis.indices]
    nt = norm_constants(L, phi)
    # exp(-phi N/3) / sqrt(N_i), evaluated in log space
    amp = np.exp(-phi * N / 3.0 - 0.5 * nt.log_N[i])
    return GroundState(L, float(phi), i, amp.astype(complex), nt)


# ---------------------------------------------------------------------------
# MPS
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GsMps:
    """Translation-invariant bond-dimension-3 MPS of ``|g_{i,phi}>``.

    ``A[n]`` (n = 0, 1, 2) are the site matrices, ``vL`` and ``vR`` the
    boundary vectors; amplitudes are ``vL^T A[n_1] ... A[n_L] vR`` and equal
    ``3 exp(-phi N / 3)`` on the charge-``i`` sector.
    """

    L: int
    phi: float
    i: int
    A: np.ndarray  # shape (3, 3, 3): physical, left, right
    vL: np.ndarray
    vR: np.ndarray

    @property
    def norm_squared(self) -> float:
        """``<psi|psi> = 9 N_{L,phi,i}`` (may overflow; see ``log_norm_squared``)."""
        return float(np.exp(self.log_norm_squared))

    @property
    def log_norm_squared(self) -> float:
        return float(math.log(9.0) + norm_constants(self.L, self.phi).log_N[self.i])

    def amplitudes(self) -> np.ndarray:
        """Contract to a dense ``3**L`` vector (small ``L`` only)."""
        check_dim(self.L)
        env = self.vL[None, :].astype(complex)  # (configs, bond)
        for _ in range(self.L):
            env = np.einsum("cb,nbd->cnd", env, self.A).reshape(-1, self.A.shape[2])
        return env @ self.vR

    def normalized_amplitudes(self) -> np.ndarray:
        return self.amplitudes() * math.exp(-0.5 * self.log_norm_squared)

    def transfer_norm(self) -> float:
        """``<psi|psi>`` from the product of transfer matrices (log-scaled)."""
        E = np.einsum("nab,ncd->acbd", self.A, self.A.conj()).reshape(9, 9)
        v = np.kron(self.vL, self.vL.conj())
        log_scale = 0.0
        for _ in range(self.L):
            v = v @ E
            s = np.abs(v).max()
            v = v / s
            log_scale += math.log(s)
        val = (v @ np.kron(self.vR, self.vR.conj())).real
        return float(val * math.exp(log_scale))


def build_gs_mps(L: int, phi: float, i: int) -> GsMps:
    """MPS with ``A[n] = (exp(-phi/3) D)**n``, ``D = diag(1, omega, omega^2)``.

    The left boundary vector is ``(1, omega**(-i), omega**(-2i))`` which
    selects total occupation ``N = i mod 3``; ``vR = (1, 1, 1)``.
    """
    if i not in (0, 1, 2):
        raise ValueError(f"charge must be 0, 1 or 2, got {i!r}")
    D = np.diag([1.0, W, W * W]) * math.exp(-phi / 3.0)
    A = np.stack([np.linalg.matrix_power(D, n) for n in range(3)])
    vL = np.array([W ** (-(i * p) % 3) for p in range(3)])
    vR = np.ones(3, dtype=complex)
    return GsMps(L, float(phi), i, A, vL, vR)


# ---------------------------------------------------------------------------
# Factorized form
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FactorizedState:
    """``|g_{i,phi}> = sum_t weights[t] (x)_j site_states[t]``."""

    L: int
    phi: float
    i: int
    site_states: np.ndarray  # (3, 3): row t is the deformed single-site state
    weights: np.ndarray

    def product_state(self, t: int) -> np.ndarray:
        check_dim(self.L)
        return reduce(np.kron, [self.site_states[t]] * self.L)

    def vector(self) -> np.ndarray:
        return sum(self.weights[t] * self.product_state(t) for t in range(3))


def tilde_state(t: int) -> np.ndarray:
    """``|~t> = (|0> + omega**t |1> + omega**(2t) |2>) / sqrt(3)``."""
    return np.array([W ** ((t * n) % 3) for n in range(3)]) / math.sqrt(3.0)


def factorized_form(L: int, phi: float, i: int) -> FactorizedState:
    """Three deformed product states ``Z_{-phi} (x)_j |~t_j>`` and their weights.

    The weights are ``omega**(-t i) / sqrt(3)`` times
    ``sqrt(3**(L-1) / N_{L,phi,i})`` (the latter is one at ``phi = 0``).
    """
    if i not in (0, 1, 2):
        raise ValueError(f"charge must be 0, 1 or 2, got {i!r}")
    z = np.exp(-phi * np.arange(3) / 3.0)
    states = np.array([z * tilde_state(t) for t in range(3)])
    nt = norm_constants(L, phi)
    scale = math.exp(0.5 * ((L - 1) * math.log(3.0) - nt.log_N[i]))
    weights = np.array([W ** ((-t * i) % 3) for t in range(3)]) / math.sqrt(3.0) * scale
    return FactorizedState(L, float(phi), i, states, weights)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

AMPLITUDE_SCHEMA = "# parachain-amplitudes v1"


def export_amplitudes(gs: GroundState, path: str | Path) -> Path:
    """Write ``basis_index, real, imag`` rows (full-space index) to CSV."""
    path = Path(path)
    idx = gs.sector.indices
    with path.open("w", newline="") as fh:
        fh.write(f"{AMPLITUDE_SCHEMA} L={gs.L} phi={gs.phi!r} i={gs.i}\n")
        w = csv.writer(fh)
        w.writerow(["basis_index", "real", "imag"])
        for k, a in zip(idx, gs.vector):
            w.writerow([int(k), repr(float(a.real)), repr(float(a.imag))])
    return path


def load_amplitudes(path: str | Path, L: int) -> np.ndarray:
    """Read a CSV written by :func:`export_amplitudes` into a full vector."""
    out = np.zeros(3**L, dtype=complex)
    with Path(path).open() as fh:
        rows = [r for r in fh if not r.startswith("#")]
    for row in list(csv.reader(rows))[1:]:
        out[int(row[0])] = complex(float(row[1]), float(row[2]))
    return out
