"""Perturbative weak edge modes and the identities behind them.

To leading order in ``alpha = f/J - omega b`` the left edge mode is::

    chi_1 = gamma_1 + alpha (omega gamma_3 - gamma_2^dag gamma_3^dag)
                    + alpha* (omega gamma_1^dag gamma_3 gamma_2 - gamma_1^dag gamma_3^dag)

The right mode is obtained by spatial inversion (see
:func:`parachain.model.inversion_unitary`), which maps ``gamma_1`` to
``Q**2 gamma_{2L}`` with ``Q = omega**N``; hence ``chi_2 = Q I chi_1 I^dag``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .algebra import OMEGA_C
from .groundstate import build_gs_vector
from .model import ModelParams, build_H, hamiltonian, inversion_unitary, solvable_line
from .operators import LinOp, build_charge, build_parafermion

__all__ = [
    "EdgeMode",
    "alpha_of",
    "chi1_perturbative",
    "chi1_from_alpha",
    "chi2_mirror",
    "algebra_residuals",
    "alpha_scaling",
    "gs_matrix_elements",
    "commutator_norm",
    "coefficient_matrix",
    "vj_operators",
    "vj_eigenoperator_check",
    "VjReport",
    "edge_report",
]

W = OMEGA_C
WC = np.conj(OMEGA_C)

#: Perturbative validity warning threshold for ``|f/J|`` and ``|b|``.
SMALLNESS = 0.2


def alpha_of(f: float, J: float, b: float) -> complex:
    """``alpha = f/J - omega b``."""
    return complex(f / J - W * b)


@dataclass(frozen=True, eq=False)
class EdgeMode:
    """A perturbative edge operator and its provenance."""

    L: int
    alpha: complex
    operator: LinOp
    side: str

    @property
    def support(self) -> frozenset:
        return self.operator.support


def chi1_from_alpha(L: int, alpha: complex) -> EdgeMode:
    """``chi_1`` for a given complex ``alpha`` (``L >= 2``)."""
    if L < 2:
        raise ValueError("the edge mode needs L >= 2")
    g1, g2, g3 = (build_parafermion(L, a) for a in (1, 2, 3))
    a = complex(alpha)
    op = g1 + (g3 * W - g2.H @ g3.H) * a + (g1.H @ g3 @ g2 * W - g1.H @ g3.H) * np.conj(a)
    op = LinOp(op.matrix, L, frozenset({1, 2}))
    return EdgeMode(L, a, op, "left")


def chi1_perturbative(L: int, f: float, J: float, b: float) -> EdgeMode:
    """Leading-order left edge mode at couplings ``(f, J, b)``.

    Warns when ``|f/J|`` or ``|b|`` exceed :data:`SMALLNESS`.
    """
    if abs(f / J) > SMALLNESS or abs(b) > SMALLNESS:
        warnings.warn(
            f"perturbative edge mode used outside its regime (f/J={f / J:.3g}, b={b:.3g})",
            RuntimeWarning,
            stacklevel=2,
        )
    return chi1_from_alpha(L, alpha_of(f, J, b))


def chi2_mirror(chi1: EdgeMode) -> EdgeMode:
    """Right edge mode ``Q I chi_1 I^dag`` from spatial inversion."""
    L = chi1.L
    I = inversion_unitary(L)
    Q = build_charge(L)
    op = Q @ I @ chi1.operator @ I.H
    return EdgeMode(L, chi1.alpha, LinOp(op.matrix, L, frozenset({L - 1, L})), "right")


def _opnorm(m) -> float:
    """Spectral norm of a (small) operator."""
    a = m.toarray() if hasattr(m, "toarray") else np.asarray(m)
    return float(np.linalg.norm(a, 2))


def algebra_residuals(mode: EdgeMode) -> tuple[float, float]:
    """``(||chi^3 - 1||, ||chi^2 - chi^dag||)`` in the spectral norm."""
    c = mode.operator
    c2 = c @ c
    return _opnorm((c2 @ c - c.identity_like()).matrix), _opnorm((c2 - c.H).matrix)


@dataclass(frozen=True)
class AlphaScaling:
    alphas: tuple
    cube_residuals: tuple
    square_residuals: tuple
    cube_slope: float
    square_slope: float


def alpha_scaling(L: int, alphas: Sequence[complex] = (0.01, 0.02, 0.04)) -> AlphaScaling:
    """Log-log slopes of the algebra residuals versus ``|alpha|``."""
    cube, square = [], []
    for a in alphas:
        r3, r2 = algebra_residuals(chi1_from_alpha(L, a))
        cube.append(r3)
        square.append(r2)
    x = np.log(np.abs(alphas))
    s3 = float(np.polyfit(x, np.log(cube), 1)[0])
    s2 = float(np.polyfit(x, np.log(square), 1)[0])
    return AlphaScaling(tuple(complex(a) for a in alphas), tuple(cube), tuple(square), s3, s2)


def gs_matrix_elements(L: int, phi: float, which: str = "chi1", *, J: float = 1.0) -> np.ndarray:
    """``M[i, i'] = <g_{i,phi}| chi |g_{i',phi}>`` for the perturbative mode at ``phi``.

    ``which`` is ``"chi1"``, ``"chi2"``, ``"gamma1"`` or ``"gamma2L"`` (the
    last two are the unperturbed operators).
    """
    pt = solvable_line(phi)
    if which in ("chi1", "chi2"):
        mode = chi1_from_alpha(L, alpha_of(pt.f_over_J * J, J, pt.b))
        op = mode.operator if which == "chi1" else chi2_mirror(mode).operator
    elif which == "gamma1":
        op = build_parafermion(L, 1)
    elif which == "gamma2L":
        op = build_parafermion(L, 2 * L)
    else:
        raise ValueError(f"unknown operator {which!r}")
    vecs = [build_gs_vector(L, phi, i).full_vector() for i in range(3)]
    return np.array([[np.vdot(vecs[i], op @ vecs[k]) for k in range(3)] for i in range(3)])


def commutator_norm(L: int, phi: float, *, J: float = 1.0, which: str = "chi1") -> float:
    """``||[H + H_B, chi]||`` on the solvable line."""
    pt = solvable_line(phi)
    mode = chi1_from_alpha(L, alpha_of(pt.f_over_J * J, J, pt.b))
    op = mode.operator if which == "chi1" else chi2_mirror(mode).operator
    H = hamiltonian(L, phi, J, with_boundary=True)
    return _opnorm((H @ op - op @ H).matrix)


# ---------------------------------------------------------------------------
# Closed algebra under H0 at f = 0
# ---------------------------------------------------------------------------


def coefficient_matrix() -> np.ndarray:
    """``M = (1 / (i sqrt 3)) [[0,-1,1],[1,0,-1],[-1,1,0]]``."""
    return np.array([[0, -1, 1], [1, 0, -1], [-1, 1, 0]], dtype=complex) / (1j * math.sqrt(3.0))


def _h00(L: int) -> LinOp:
    """``H0(f = 0) / J``."""
    return build_H(ModelParams(L, 0.0, 1.0, 0.0)).H0


def _closed_basis(L: int) -> list[LinOp]:
    g2, g3 = build_parafermion(L, 2), build_parafermion(L, 3)
    return [g2, g3 * W, g2.H @ g3.H]


def vj_operators(L: int, *, variant: str = "eigen") -> list[LinOp]:
    """``v_j`` for ``j = 0, 1, 2``.

    ``variant="eigen"``: ``(gamma_2 + omega**j omega gamma_3 + omega**(2j) gamma_2^dag gamma_3^dag)/sqrt 3``,
    the eigenoperators of the commutator with ``H0(f=0)/J``.
    ``variant="uniform"``: the same without the ``omega**(2j)`` factor on the last term.
    """
    if variant not in ("eigen", "uniform"):
        raise ValueError(f"unknown variant {variant!r}")
    b0, b1, b2 = _closed_basis(L)
    out = []
    for j in range(3):
        c2 = W ** ((2 * j) % 3) if variant == "eigen" else 1.0
        out.append((b0 + b1 * W ** (j % 3) + b2 * c2) / math.sqrt(3.0))
    return out


@dataclass(frozen=True)
class VjReport:
    """Residuals of ``[H0^0, v_j] = 3 eps_j v_j`` and of the ``M`` relation."""

    eigenvalues: tuple[float, float, float]
    eigen_residuals: tuple[float, float, float]
    uniform_residuals: tuple[float, float, float]
    m_relation_residual: float
    m_spectrum: tuple

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["m_spectrum"] = [complex(x).real for x in self.m_spectrum]
        return d


def vj_eigenoperator_check(L: int = 3) -> VjReport:
    """Verify the closed algebra of ``gamma_2, omega gamma_3, gamma_2^dag gamma_3^dag`` under ``H0^0``."""
    if L < 2:
        raise ValueError("need L >= 2")
    H = _h00(L)
    eps = (0.0, -1.0, 1.0)

    def res(ops):
        return tuple((H @ v - v @ H - v * (3 * e)).norm() for v, e in zip(ops, eps))

    basis = _closed_basis(L)
    M = coefficient_matrix()
    m_res = 0.0
    for col in range(3):
        lhs = H @ basis[col] - basis[col] @ H
        rhs = sum((basis[r] * (3 * M[r, col]) for r in range(3)), start=basis[0] * 0)
        m_res = max(m_res, (lhs - rhs).norm())
    spec = tuple(sorted(np.linalg.eigvals(M).real))
    return VjReport(eps, res(vj_operators(L)), res(vj_operators(L, variant="uniform")), m_res, spec)


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


def _cjson(z):
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def edge_report(L: int, phis: Sequence[float], alphas: Sequence[float] = (0.01, 0.02, 0.04)) -> dict:
    """JSON-serialisable summary: algebra scaling, v_j checks, ground-manifold tables."""
    sc = alpha_scaling(min(L, 4), alphas)
    vj = vj_eigenoperator_check(3)
    tables = []
    for phi in phis:
        m1 = gs_matrix_elements(L, phi, "chi1")
        m2 = gs_matrix_elements(L, phi, "chi2")
        tables.append(
            {
                "phi": float(phi),
                "chi1": [[_cjson(z) for z in row] for row in m1],
                "chi2": [[_cjson(z) for z in row] for row in m2],
                "chi1_amplitude_deviation": float(max(abs(abs(m1[i, (i + 1) % 3]) - 1) for i in range(3))),
                "commutator_norm": commutator_norm(L, phi),
            }
        )
    return {
        "L": L,
        "alpha_scaling": {
            "alphas": [float(abs(a)) for a in sc.alphas],
            "cube_residuals": list(sc.cube_residuals),
            "square_residuals": list(sc.square_residuals),
            "cube_slope": sc.cube_slope,
            "square_slope": sc.square_slope,
        },
        "vj": vj.as_dict(),
        "ground_manifold": tables,
    }


def write_report(report: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(report, indent=2, default=float))
    return path
