"""Sector-resolved exact diagonalisation, gaps and triplet splittings.

Small sectors (dimension <= ``DENSE_LIMIT``) are diagonalised densely with
LAPACK; larger ones use ARPACK's implicitly restarted Lanczos through
:func:`scipy.sparse.linalg.eigsh`.
"""
from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse.linalg as sla

from .groundstate import build_gs_vector
from .model import ModelParams, build_ell, build_H, solvable_line
from .operators import LinOp

log = logging.getLogger(__name__)

__all__ = [
    "DENSE_LIMIT",
    "ConvergenceError",
    "SectorSpectrum",
    "SpectrumTable",
    "eigensolve",
    "spectrum_table",
    "solvable_spectrum",
    "delta_m",
    "gap",
    "LadderReport",
    "excitation_ladder_check",
    "ladder_multiset",
    "write_spectrum_csv",
]

DENSE_LIMIT = 2000
SPECTRUM_SCHEMA = "# parachain-spectrum v1"


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, msg: str, iterations: int | None = None):
        super().__init__(msg)
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class SectorSpectrum:
    """Lowest eigenpairs of one charge sector."""

    q: int
    energies: np.ndarray
    vectors: np.ndarray | None
    residuals: np.ndarray
    method: str


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    """Eigenvalues ``e_{m,q}`` for the three charge sectors plus metadata."""

    sectors: dict[int, SectorSpectrum]
    meta: dict = field(default_factory=dict)

    def energies(self, q: int) -> np.ndarray:
        return self.sectors[q].energies

    def level(self, m: int) -> np.ndarray:
        """``(e_{m,0}, e_{m,1}, e_{m,2})``."""
        try:
            return np.array([self.sectors[q].energies[m] for q in range(3)])
        except IndexError as exc:
            raise ValueError(f"level {m} not available in every sector") from exc

    @property
    def ground_energy(self) -> float:
        return float(min(s.energies[0] for s in self.sectors.values()))


def _tie_break(evals: np.ndarray, evecs: np.ndarray, tol: float = 1e-9):
    """Order degenerate clusters by overlap with a fixed reference vector."""
    ref = np.random.default_rng(12345).standard_normal(evecs.shape[0])
    order = np.argsort(evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    keys = []
    cluster = 0
    for m in range(len(evals)):
        if m and evals[m] - evals[m - 1] > tol:
            cluster += 1
        keys.append((cluster, -abs(np.vdot(ref, evecs[:, m]))))
    perm = sorted(range(len(evals)), key=lambda m: keys[m])
    return evals[perm], evecs[:, perm]


def eigensolve(
    H: LinOp,
    q: int,
    k: int = 1,
    *,
    method: str = "auto",
    tol: float = 1e-12,
    return_vectors: bool = True,
    maxiter: int | None = None,
) -> SectorSpectrum:
    """Lowest ``k`` eigenpairs of ``H`` in charge sector ``q``.

    Parameters
    ----------
    H : LinOp
        Full-space (or already ``q``-restricted) Hermitian, charge-preserving operator.
    method : {"auto", "dense", "iterative"}
        ``auto`` picks dense up to :data:`DENSE_LIMIT`.
    tol : float
        ARPACK tolerance for the iterative path.

    Raises
    ------
    ValueError
        Non-Hermitian input or ``k`` larger than the sector.
    ConvergenceError
        ARPACK did not converge.
    """
    Hq = H if H.sector == q else H.restrict(q)
    if Hq.hermiticity_residual() > 1e-10:
        raise ValueError("eigensolve requires a Hermitian operator")
    dim = Hq.dim
    if k > dim:
        raise ValueError(f"k={k} exceeds sector dimension {dim}")
    if method == "auto":
        method = "dense" if dim <= DENSE_LIMIT or k >= dim - 1 else "iterative"
    if method == "dense":
        evals, evecs = np.linalg.eigh(Hq.toarray())
        evals, evecs = evals[:k], evecs[:, :k]
    elif method == "iterative":
        if k >= dim - 1:
            raise ValueError("iterative solver needs k < dim - 1")
        v0 = np.random.default_rng(7).standard_normal(dim).astype(complex)
        try:
            evals, evecs = sla.eigsh(Hq.matrix, k=k, which="SA", tol=tol, v0=v0, maxiter=maxiter)
        except sla.ArpackNoConvergence as exc:
            raise ConvergenceError(f"ARPACK did not converge for sector {q}", maxiter) from exc
    else:
        raise ValueError(f"unknown method {method!r}")
    evals, evecs = _tie_break(np.real(evals), evecs)
    res = np.linalg.norm(Hq.matrix @ evecs - evecs * evals, axis=0)
    return SectorSpectrum(q, evals, evecs if return_vectors else None, res, method)


def spectrum_table(
    H: LinOp, k: int = 2, *, method: str = "auto", tol: float = 1e-12, meta: dict | None = None
) -> SpectrumTable:
    sectors = {q: eigensolve(H, q, k, method=method, tol=tol, return_vectors=False) for q in range(3)}
    return SpectrumTable(sectors, dict(meta or {}))


def solvable_spectrum(
    L: int, phi: float, k: int = 2, *, J: float = 1.0, with_boundary: bool = True, method: str = "auto"
) -> SpectrumTable:
    """Spectrum of ``H (+ H_B)`` at a point of the solvable line."""
    p = ModelParams.on_solvable_line(L, phi, J, with_boundary)
    meta = dict(L=L, phi=phi, f=p.f, J=J, b=p.b, boundary=with_boundary)
    return spectrum_table(build_H(p).total, k, method=method, meta=meta)


def delta_m(table: SpectrumTable | Sequence[float], m: int | None = None) -> float:
    """Root-sum-square splitting over ordered sector pairs ``q != q'``.

    ``Delta_m = sqrt(sum_{q != q'} (e_{m,q} - e_{m,q'})**2)`` with six ordered
    pairs.  Accepts a table plus ``m``, or directly the three energies.

    Examples
    --------
    >>> delta_m([0.0, 0.5, 0.5])
    1.0
    """
    e = table.level(m) if isinstance(table, SpectrumTable) else np.asarray(table, dtype=float)
    if e.shape != (3,):
        raise ValueError("need exactly three sector energies")
    s = sum((e[a] - e[b]) ** 2 for a, b in itertools.permutations(range(3), 2))
    return float(np.sqrt(s))


def gap(table: SpectrumTable) -> float:
    """``min_q e_{1,q} - min_q e_{0,q}``: energy above the ground triplet."""
    return float(table.level(1).min() - table.level(0).min())


# ---------------------------------------------------------------------------
# Excitation ladder at phi = 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LadderReport:
    """Outcome of applying ``prod_j (l_j^dag)**m_j`` to a ground state."""

    mlist: tuple[int, ...]
    i: int
    expected_energy: float
    measured_energy: float
    residual: float
    annihilated: bool


def ladder_energy(L: int, mlist: Sequence[int], J: float = 1.0) -> float:
    """``-2J(L-1) + sum_j 2J [1 - Re(omega**m_j)]``."""
    return -2.0 * J * (L - 1) + sum(2.0 * J * (1.0 - np.cos(2 * np.pi * m / 3)) for m in mlist)


def excitation_ladder_check(L: int, mlist: Sequence[int], *, i: int = 0, J: float = 1.0) -> LadderReport:
    """Check that ``prod_j (l_j^dag)**m_j |g_{i,0}>`` is an eigenstate of ``H + H_B`` at ``phi = 0``.

    Returns a report with ``annihilated=True`` (and NaN energy) if the
    product maps the state to zero.
    """
    mlist = tuple(int(m) for m in mlist)
    if len(mlist) != L - 1 or any(m not in (0, 1, 2) for m in mlist):
        raise ValueError("mlist must hold L-1 exponents in {0, 1, 2}")
    H = build_H(ModelParams(L, 0.0, J, 0.0, with_boundary=True)).total
    v = build_gs_vector(L, 0.0, i).full_vector()
    for j, m in enumerate(mlist, start=1):
        if m:
            ld = build_ell(L, j).H
            for _ in range(m):
                v = ld @ v
    nv = np.linalg.norm(v)
    expected = ladder_energy(L, mlist, J)
    if nv < 1e-12:
        return LadderReport(mlist, i, expected, float("nan"), float("nan"), True)
    v = v / nv
    Hv = H @ v
    e = float(np.vdot(v, Hv).real)
    res = float(np.linalg.norm(Hv - expected * v))
    return LadderReport(mlist, i, expected, e, res, False)


def ladder_multiset(L: int, J: float = 1.0) -> np.ndarray:
    """Full spectrum of ``H + H_B`` at ``phi = 0`` predicted by the ladder.

    Each bond independently carries excitation 0 or ``3J`` (two ways), and
    every configuration appears once in each of the three charge sectors.
    """
    out = []
    for mlist in itertools.product(range(3), repeat=L - 1):
        out.extend([ladder_energy(L, mlist, J)] * 3)
    return np.sort(np.array(out))


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def write_spectrum_csv(tables: Sequence[SpectrumTable], path: str | Path) -> Path:
    """Rows ``(L, phi, q, m, energy, residual)``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(SPECTRUM_SCHEMA + "\n")
        w = csv.writer(fh)
        w.writerow(["L", "phi", "q", "m", "energy", "residual"])
        for t in tables:
            for q in range(3):
                s = t.sectors[q]
                for m, (e, r) in enumerate(zip(s.energies, s.residuals)):
                    w.writerow([t.meta.get("L"), t.meta.get("phi"), q, m, f"{e:.15g}", f"{r:.3e}"])
    return path


def phi_point(phi: float):
    """Couplings at ``phi`` (re-exported for the CLI)."""
    return solvable_line(phi)
