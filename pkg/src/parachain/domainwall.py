"""Projection of the Hamiltonian onto zero- and one-domain-wall product states.

At ``phi = 0`` the three ground states are superpositions of the uniform
product states ``(x)_j |~t>`` with ``|~t> = sum_n omega**(t n) |n> / sqrt(3)``.
Low-lying excitations are domain walls: ``|~a>`` on sites ``1..k`` and
``|~b>`` on ``k+1..L`` with ``a != b``.  Matrix elements between such
product states are computed term by term: each local term touches at most
two sites, so an element is non-zero only when the two configurations
differ on those sites, and every other site contributes an overlap of one.
The cost is ``O(L)`` per row, so chains of thousands of sites are cheap.

Configurations are labelled ``(k, a, b)``; ``k = 0`` denotes the uniform
state (``a == b``).  A global shift ``t -> t + 1`` of all labels commutes
with the Hamiltonian and charge eigenstates are its Fourier modes.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .algebra import OMEGA_C
from .analytics import fit_exponential_decay, DecayFit
from .model import local_terms, solvable_line
from .spectra import delta_m

__all__ = [
    "DWBasis",
    "build_dw_basis",
    "DWProjection",
    "project_H",
    "dw_delta_scaling",
    "ScalingRow",
    "fit_scaling",
    "write_scaling_csv",
    "DEFAULT_RESOLUTION",
]

W = OMEGA_C

#: Splittings below this (in units of J) are treated as numerically unresolved.
DEFAULT_RESOLUTION = 1e-11

_T = np.array([[W ** ((t * n) % 3) for t in range(3)] for n in range(3)]) / math.sqrt(3.0)


def _shift_symmetrize(m: np.ndarray, nsites: int) -> np.ndarray:
    """Make a tilde-basis block exactly invariant under the global label shift.

    Entries related by ``t -> t + 1`` on every site are equal in exact
    arithmetic; floating round-off breaks that at the 1e-16 level, which
    would leak into the tiny splittings we want to resolve.  Each orbit is
    replaced by its mean computed in one canonical order.
    """
    dim = 3**nsites
    out = np.empty_like(m)
    done = np.zeros(m.shape, dtype=bool)

    def shift(idx):
        digits = np.unravel_index(idx, (3,) * nsites)
        return int(np.ravel_multi_index(tuple((d + 1) % 3 for d in digits), (3,) * nsites))

    for r in range(dim):
        for c in range(dim):
            if done[r, c]:
                continue
            orbit = [(r, c)]
            for _ in range(2):
                rr, cc = orbit[-1]
                orbit.append((shift(rr), shift(cc)))
            mean = sum(m[o] for o in orbit) / 3.0
            for o in orbit:
                out[o] = mean
                done[o] = True
    return out


@dataclass(frozen=True, eq=False)
class DWBasis:
    """Zero- and one-wall configurations of an ``L``-site chain.

    Attributes
    ----------
    configs : list of (k, a, b)
        Three uniform states followed by ``6 (L - 1)`` one-wall states.
    index : dict
        Inverse of ``configs``.
    reps : list of (k, a, b)
        Orbit representatives under the global shift (``a = 0``); the charge-``q``
        basis vector of a representative ``r`` is
        ``sum_g omega**(-q g) |shift**g r> / sqrt(3)``.
    """

    L: int
    configs: list
    index: dict
    reps: list

    @property
    def n_zero_wall(self) -> int:
        return 3

    @property
    def n_one_wall(self) -> int:
        return len(self.configs) - 3

    def sequence(self, c) -> list[int]:
        k, a, b = c
        return [a] * k + [b] * (self.L - k)

    def product_vector(self, c) -> np.ndarray:
        """Dense ``3**L`` Fock-basis vector of a configuration (small ``L``)."""
        if self.L > 10:
            raise ValueError("dense vectors are only built for L <= 10")
        return reduce(np.kron, [_T[:, t] for t in self.sequence(c)])

    def dense_vectors(self) -> np.ndarray:
        return np.array([self.product_vector(c) for c in self.configs]).T

    def symmetrizer(self, q: int) -> sp.csr_matrix:
        """Isometry from the charge-``q`` block to the configuration basis."""
        rows, cols, vals = [], [], []
        for r, (k, a, b) in enumerate(self.reps):
            for g in range(3):
                rows.append(self.index[(k, (a + g) % 3, (b + g) % 3)])
                cols.append(r)
                vals.append(W ** ((-q * g) % 3) / math.sqrt(3.0))
        return sp.csr_matrix((vals, (rows, cols)), shape=(len(self.configs), len(self.reps)))


def build_dw_basis(L: int) -> DWBasis:
    if L < 3:
        raise ValueError("the domain-wall basis needs L >= 3")
    configs = [(0, t, t) for t in range(3)]
    configs += [(k, a, b) for k in range(1, L) for a in range(3) for b in range(3) if a != b]
    index = {c: n for n, c in enumerate(configs)}
    reps = [(0, 0, 0)] + [(k, 0, b) for k in range(1, L) for b in (1, 2)]
    return DWBasis(L, configs, index, reps)


def _canonical(L: int, c, changes: dict[int, int]):
    """Label of configuration ``c`` with sites ``changes`` overwritten, or None (>1 wall)."""
    k, a, b = c

    def val(m):
        if m in changes:
            return changes[m]
        return a if m <= k else b

    bonds = {k} if k > 0 else set()
    for m in changes:
        bonds.update((m - 1, m))
    walls = sorted(w for w in bonds if 1 <= w <= L - 1 and val(w) != val(w + 1))
    if not walls:
        v = val(1)
        return (0, v, v)
    if len(walls) == 1:
        return (walls[0], val(1), val(L))
    return None


@dataclass(frozen=True, eq=False)
class DWProjection:
    """Projected Hamiltonian.

    ``matrix`` is the configuration-basis matrix shifted by ``-offset`` (the
    energy of a uniform state); ``blocks[q]`` are the dense charge blocks of
    the same shifted matrix.
    """

    basis: DWBasis
    phi: float
    boundary: bool
    offset: float
    matrix: sp.csr_matrix
    blocks: dict = field(default_factory=dict)

    def block_energies(self, q: int) -> np.ndarray:
        """Sorted absolute eigenvalues of block ``q``."""
        return np.linalg.eigvalsh(self.blocks[q]) + self.offset

    def hermiticity_residual(self) -> float:
        d = self.matrix - self.matrix.conj().T
        return float(np.abs(d.data).max()) if d.nnz else 0.0


def project_H(L: int, phi: float, *, J: float = 1.0, boundary: bool = True) -> DWProjection:
    """Project ``H (+ H_B)`` on the solvable line onto the domain-wall space.

    Parameters
    ----------
    boundary : bool
        Include the boundary term ``H_B``.
    """
    basis = build_dw_basis(L)
    pt = solvable_line(phi)
    lt = local_terms()
    f = pt.f_over_J * J
    hs = _shift_symmetrize(_T.conj().T @ (f * lt.site) @ _T, 1)
    TT = np.kron(_T, _T)
    hb = _shift_symmetrize(TT.conj().T @ lt.bond(J, pt.b) @ TT, 2)

    def hb_el(x, y, x2, y2):
        return hb[3 * x + y, 3 * x2 + y2]

    # uniform-state energy; every diagonal entry is stored relative to it
    s0, b0 = hs[0, 0].real, hb[0, 0].real
    bfac = 0.5 if boundary else 0.0
    offset = L * s0 + (L - 1) * b0 - 2 * bfac * s0

    rows, cols, vals = [], [], []
    for n, c in enumerate(basis.configs):
        k, a, b = c
        seq = lambda m: a if m <= k else b  # noqa: E731
        # diagonal
        d = 0.0
        if k > 0:
            d += (hs[a, a].real - s0) * (k - bfac) + (hs[b, b].real - s0) * (L - k - bfac)
            d += hb_el(a, b, a, b).real - b0
        rows.append(n), cols.append(n), vals.append(d)
        # off-diagonal moves from one-site terms
        sites = {1, L} | ({k, k + 1} if k > 0 else set())
        for m in sites:
            fac = 1.0 - (bfac if m in (1, L) else 0.0)
            x = seq(m)
            for y in range(3):
                if y == x:
                    continue
                c2 = _canonical(L, c, {m: y})
                if c2 is not None:
                    rows.append(basis.index[c2]), cols.append(n), vals.append(fac * hs[y, x])
        # ... and from two-site terms
        bonds = {1, L - 1} | ({m for m in (k - 1, k, k + 1) if 1 <= m <= L - 1} if k > 0 else set())
        for m in bonds:
            x0, x1 = seq(m), seq(m + 1)
            for y0 in range(3):
                for y1 in range(3):
                    if (y0, y1) == (x0, x1):
                        continue
                    c2 = _canonical(L, c, {m: y0, m + 1: y1})
                    if c2 is not None:
                        rows.append(basis.index[c2]), cols.append(n), vals.append(hb_el(y0, y1, x0, x1))
    dim = len(basis.configs)
    H = sp.coo_matrix((vals, (rows, cols)), shape=(dim, dim)).tocsr()
    H.sum_duplicates()
    blocks = {}
    for q in range(3):
        V = basis.symmetrizer(q)
        Hq = (V.conj().T @ (H @ V)).toarray()
        blocks[q] = 0.5 * (Hq + Hq.conj().T)
    return DWProjection(basis, float(phi), boundary, float(offset), H, blocks)


# ---------------------------------------------------------------------------
# Scaling of the triplet splittings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingRow:
    phi: float
    L: int
    m: int
    delta: float


def dw_delta_scaling(
    phi: float,
    L_list: Iterable[int],
    *,
    levels: Sequence[int] = (1, 4),
    J: float = 1.0,
    boundary: bool = False,
) -> list[ScalingRow]:
    """``Delta_m(L)`` from the projected Hamiltonian for each ``L``.

    ``e_{m,q}`` is the ``m``-th lowest eigenvalue of block ``q`` (``m = 0`` is
    the ground state).
    """
    rows = []
    for L in L_list:
        proj = project_H(int(L), phi, J=J, boundary=boundary)
        ev = {q: np.linalg.eigvalsh(proj.blocks[q]) for q in range(3)}
        for m in levels:
            if any(len(ev[q]) <= m for q in range(3)):
                raise ValueError(f"level {m} not available at L={L}")
            rows.append(ScalingRow(float(phi), int(L), int(m), delta_m([ev[q][m] for q in range(3)])))
    return rows


@dataclass(frozen=True)
class ScalingFit:
    """Fits of ``log Delta`` against ``L`` (exponential) and ``log L`` (power law)."""

    m: int
    exponential: DecayFit | None
    power_law: DecayFit | None
    n_resolved: int


def fit_scaling(
    rows: Sequence[ScalingRow], m: int, *, resolution: float = DEFAULT_RESOLUTION
) -> ScalingFit:
    """Fit ``log Delta_m`` versus ``L`` and versus ``log L``.

    Points with ``Delta_m`` below ``resolution`` are indistinguishable from
    round-off and are excluded.
    """
    pts = sorted((r.L, r.delta) for r in rows if r.m == m and r.delta > resolution)
    if len(pts) < 3:
        return ScalingFit(m, None, None, len(pts))
    Ls = np.array([p[0] for p in pts], dtype=float)
    ds = np.array([p[1] for p in pts])
    return ScalingFit(m, fit_exponential_decay(Ls, ds), fit_exponential_decay(np.log(Ls), ds), len(pts))


SCALING_SCHEMA = "# parachain-dw-scaling v1"


def write_scaling_csv(rows: Sequence[ScalingRow], path: str | Path) -> Path:
    """Rows ``(phi, L, m, Delta_m)``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(SCALING_SCHEMA + "\n")
        w = csv.writer(fh)
        w.writerow(["phi", "L", "m", "Delta_m"])
        for r in rows:
            w.writerow([repr(r.phi), r.L, r.m, f"{r.delta:.10e}"])
    return path
