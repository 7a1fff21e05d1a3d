"""Hamiltonians of the chain, the solvable line and its parent Hamiltonian.

The model is ``H = H0 + b H1 + b**2 H2`` with an optional boundary term
``H_B``.  Every part is a sum of one- and two-site terms once the
parafermion strings cancel, so :func:`local_terms` extracts 3x3 / 9x9 blocks
from a two-site chain and :func:`build_H` embeds them.  The direct
parafermion-product construction is kept as :func:`build_H_from_parafermions`
and serves as the oracle for the fast path.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np
import scipy.sparse as sp

from .algebra import OMEGA_C
from .operators import (
    LinOp,
    build_fock_annihilator,
    build_omega_number,
    build_parafermion,
    build_Z,
    check_dim,
    embed_local,
    fock_to_clock,
    local_matrix,
    _embed_block,
)

log = logging.getLogger(__name__)

W = OMEGA_C
WC = np.conj(OMEGA_C)


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the chain.

    Parameters
    ----------
    L : int
        Number of sites (>= 2).
    f, J, b : float
        Transverse field, hopping (> 0) and deformation strength.
    with_boundary : bool
        Include the boundary term ``H_B``.
    """

    L: int
    f: float
    J: float = 1.0
    b: float = 0.0
    with_boundary: bool = False

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L < 2:
            raise ValueError(f"L must be an integer >= 2, got {self.L!r}")
        if not self.J > 0:
            raise ValueError(f"J must be positive, got {self.J!r}")
        for name in ("f", "J", "b"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @classmethod
    def on_solvable_line(cls, L: int, phi: float, J: float = 1.0, with_boundary: bool = True) -> "ModelParams":
        pt = solvable_line(phi)
        return cls(L, pt.f_over_J * J, J, pt.b, with_boundary)


@dataclass(frozen=True)
class SolvablePoint:
    """Point ``(f/J, b)`` of the one-parameter solvable family."""

    phi: float

    @property
    def f_over_J(self) -> float:
        e = np.exp(-self.phi)
        if np.isinf(e):
            return 1.5
        # -6 (1 - e^-2phi) / (1 + 2e^-phi)^2, rewritten to stay finite as phi -> -inf
        return float(-6.0 * (1.0 - e * e) / (1.0 + 2.0 * e) ** 2)

    @property
    def b(self) -> float:
        e = np.exp(-self.phi)
        if np.isinf(e):
            return -0.5
        return float((1.0 - e) / (1.0 + 2.0 * e))

    def as_tuple(self) -> tuple[float, float]:
        return (self.f_over_J, self.b)


def solvable_line(phi: float) -> SolvablePoint:
    """Couplings ``(f/J, b)`` on the solvable line.

    ``1 + 2 exp(-phi)`` is strictly positive for real ``phi`` so no guard is
    needed against division by zero.

    Examples
    --------
    >>> solvable_line(0.0).as_tuple()
    (-0.0, 0.0)
    """
    if np.isnan(phi):
        raise ValueError("phi must not be NaN")
    return SolvablePoint(float(phi))


def parent_scale(phi: float) -> float:
    """Factor ``kappa`` with ``H_phi = kappa (H + H_B) + const`` (J set to 1).

    ``kappa = exp(4 phi / 3) (1 + 2 exp(-phi))**2 / 9``; it equals one only
    at ``phi = 0``.
    """
    return float(np.exp(4.0 * phi / 3.0) * (1.0 + 2.0 * np.exp(-phi)) ** 2 / 9.0)


# ---------------------------------------------------------------------------
# Local terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalTerms:
    """One- and two-site blocks of the Hamiltonian in the Fock basis.

    ``site`` carries the ``f`` term of one site (with ``f = 1``), ``bond0`` the
    ``J`` term of ``H0`` and ``bond1``/``bond2`` the full ``H1``/``H2`` bond
    terms, all with ``J = 1``.
    """

    site: np.ndarray
    bond0: np.ndarray
    bond1: np.ndarray
    bond2: np.ndarray

    def bond(self, J: float, b: float) -> np.ndarray:
        return J * (self.bond0 + b * self.bond1 + b * b * self.bond2)


@lru_cache(maxsize=1)
def local_terms() -> LocalTerms:
    """Extract the local blocks from the two-site parafermion construction."""
    parts = _parts_from_parafermions(2, f=1.0, J=1.0)
    g1, g2 = (build_parafermion(1, a).toarray() for a in (1, 2))
    t = -WC * g1.conj().T @ g2
    site = t + t.conj().T
    eye = np.eye(3)
    bond0 = parts["H0"] - np.kron(site, eye) - np.kron(eye, site)
    return LocalTerms(site, bond0, parts["H1"], parts["H2"])


def _A(L, j):
    g1, g2 = build_parafermion(L, 2 * j - 1), build_parafermion(L, 2 * j)
    return g1 + g1.H @ g2.H


def _B(L, j):
    g1, g2 = build_parafermion(L, 2 * j - 1), build_parafermion(L, 2 * j)
    return g2 + g2.H @ g1.H


def build_A(L: int, j: int) -> LinOp:
    """``A_j = gamma_{2j-1} + gamma_{2j-1}^dag gamma_{2j}^dag``."""
    return _A(L, j)


def build_B(L: int, j: int) -> LinOp:
    """``B_j = gamma_{2j} + gamma_{2j}^dag gamma_{2j-1}^dag``."""
    return _B(L, j)


def _herm(x):
    return x + x.H


def _parts_from_parafermions(L: int, f: float, J: float) -> dict[str, np.ndarray]:
    g = {a: build_parafermion(L, a) for a in range(1, 2 * L + 1)}
    dim = 3**L
    zero = LinOp(sp.csr_matrix((dim, dim), dtype=complex), L)
    H0, H1, H2 = zero, zero, zero
    for j in range(1, L + 1):
        H0 = H0 + _herm(g[2 * j - 1].H @ g[2 * j] * (-f * WC))
    for j in range(1, L):
        H0 = H0 + _herm(g[2 * j] @ g[2 * j + 1].H * (-J * W))
        A, Bn = _A(L, j), _B(L, j + 1)
        H1 = H1 + _herm(A @ g[2 * j + 1].H + g[2 * j] @ Bn.H) * (-J)
        H2 = H2 + _herm(A @ Bn.H * WC) * (-J)
    HB = _herm((g[1].H @ g[2] + g[2 * L - 1].H @ g[2 * L]) * (0.5 * f * WC))
    return {"H0": H0.toarray(), "H1": H1.toarray(), "H2": H2.toarray(), "HB": HB.toarray()}


# ---------------------------------------------------------------------------
# Hamiltonian assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HamiltonianParts:
    """``H0, H1, H2, HB`` as LinOps together with the parameters."""

    params: ModelParams
    H0: LinOp
    H1: LinOp
    H2: LinOp
    HB: LinOp

    @property
    def bulk(self) -> LinOp:
        b = self.params.b
        return self.H0 + self.H1 * b + self.H2 * (b * b)

    @property
    def total(self) -> LinOp:
        """``H0 + b H1 + b^2 H2`` plus ``H_B`` when the params request it."""
        return self.bulk + self.HB if self.params.with_boundary else self.bulk


def _sum_embedded(L: int, blocks: list[tuple[int, np.ndarray]]) -> LinOp:
    dim = 3**L
    mat = sp.csr_matrix((dim, dim), dtype=complex)
    for first, blk in blocks:
        if np.any(blk):
            mat = mat + _embed_block(L, first, blk).matrix
    return LinOp(mat, L, frozenset(range(1, L + 1)))


def build_H(p: ModelParams, *, dim_cap: int | None = None) -> HamiltonianParts:
    """Assemble the Hamiltonian parts in the full Fock basis.

    Raises
    ------
    DimensionCapError
        If ``3**L`` exceeds ``dim_cap``.
    """
    L = p.L
    check_dim(L, dim_cap)
    lt = local_terms()
    H0 = _sum_embedded(
        L, [(j, p.f * lt.site) for j in range(1, L + 1)] + [(j, p.J * lt.bond0) for j in range(1, L)]
    )
    H1 = _sum_embedded(L, [(j, p.J * lt.bond1) for j in range(1, L)])
    H2 = _sum_embedded(L, [(j, p.J * lt.bond2) for j in range(1, L)])
    HB = _sum_embedded(L, [(1, -0.5 * p.f * lt.site), (L, -0.5 * p.f * lt.site)])
    return HamiltonianParts(p, H0, H1, H2, HB)


def build_H_from_parafermions(p: ModelParams) -> HamiltonianParts:
    """Reference construction by direct products of parafermions (small L)."""
    if p.L > 6:
        raise ValueError("the reference construction is meant for L <= 6")
    parts = _parts_from_parafermions(p.L, p.f, p.J)
    mk = lambda m: LinOp(m, p.L, frozenset(range(1, p.L + 1)))  # noqa: E731
    return HamiltonianParts(p, mk(parts["H0"]), mk(parts["H1"]), mk(parts["H2"]), mk(parts["HB"]))


def hamiltonian(L: int, phi: float, J: float = 1.0, with_boundary: bool = True) -> LinOp:
    """Shorthand for ``build_H`` on the solvable line."""
    return build_H(ModelParams.on_solvable_line(L, phi, J, with_boundary)).total


def bond_hamiltonian_blocks(L: int, phi: float, J: float = 1.0, with_boundary: bool = True):
    """Local blocks ``(site_terms, bond_terms)`` of ``H (+ H_B)`` on the solvable line.

    ``site_terms[j]`` is the 3x3 block on site ``j+1`` and ``bond_terms[j]``
    the 9x9 block on sites ``j+1, j+2``; used by the DMRG and domain-wall code.
    """
    pt = solvable_line(phi)
    lt = local_terms()
    f = pt.f_over_J * J
    sites = []
    for j in range(1, L + 1):
        h = f * lt.site
        if with_boundary and j in (1, L):
            h = h - 0.5 * f * lt.site
        sites.append(h)
    bonds = [lt.bond(J, pt.b) for _ in range(L - 1)]
    return sites, bonds


# ---------------------------------------------------------------------------
# l_j, L_{j,phi}, W_{j,phi} and the parent Hamiltonian
# ---------------------------------------------------------------------------


def _check_bond(L: int, j: int):
    if not 1 <= j <= L - 1:
        raise IndexError(f"bond {j} out of range 1..{L - 1}")


def build_ell(L: int, j: int) -> LinOp:
    """``l_j = gamma_{2j}^dag - omega gamma_{2j+1}^dag``."""
    _check_bond(L, j)
    return build_parafermion(L, 2 * j).H - build_parafermion(L, 2 * j + 1).H * W


def build_ell_fock(L: int, j: int) -> LinOp:
    """Fock-parafermion expansion
    ``omega**(-N_j) C_j^dag - C_{j+1}^dag + C_j^2 - C_{j+1}^2``."""
    _check_bond(L, j)
    Cj, Ck = build_fock_annihilator(L, j), build_fock_annihilator(L, j + 1)
    return build_omega_number(L, j).H @ Cj.H - Ck.H + Cj @ Cj - Ck @ Ck


def build_L_phi(L: int, j: int, phi: float) -> LinOp:
    """``L_{j,phi} = Z_{-phi} l_j Z_phi``."""
    return build_Z(L, -phi) @ build_ell(L, j) @ build_Z(L, phi)


def build_W(L: int, j: int, phi: float) -> LinOp:
    """``W_{j,phi} = (1 + 2e^-phi) + (1 - e^-phi)[omega gamma_{2j-1}^dag gamma_{2j} + h.c.]``."""
    e = np.exp(-phi)
    t = build_parafermion(L, 2 * j - 1).H @ build_parafermion(L, 2 * j) * W
    return (t + t.H) * (1.0 - e) + (1.0 + 2.0 * e)


def build_L_phi_from_W(L: int, j: int, phi: float) -> LinOp:
    """``L_{j,phi}`` written through ``W``:
    ``e^{2phi/3}/3 [W_j gamma_{2j}^dag - omega W_{j+1} gamma_{2j+1}^dag]``."""
    _check_bond(L, j)
    g2, g3 = build_parafermion(L, 2 * j), build_parafermion(L, 2 * j + 1)
    inner = build_W(L, j, phi) @ g2.H - build_W(L, j + 1, phi) @ g3.H * W
    return inner * (np.exp(2.0 * phi / 3.0) / 3.0)


def build_parent(L: int, phi: float, J: float = 1.0, *, method: str = "Z") -> LinOp:
    """Parent Hamiltonian ``H_phi = J sum_j L_{j,phi}^dag L_{j,phi}``.

    Parameters
    ----------
    method : {"Z", "W"}
        Build ``L_{j,phi}`` by Z-conjugation of ``l_j`` or from the ``W`` form.
    """
    if not np.isfinite(phi):
        raise ValueError("phi must be finite")
    if method not in ("Z", "W"):
        raise ValueError(f"method must be 'Z' or 'W', got {method!r}")
    make = build_L_phi if method == "Z" else build_L_phi_from_W
    ops = [make(L, j, phi) for j in range(1, L)]
    return reduce(lambda x, y: x + y, [o.H @ o for o in ops]) * J


@dataclass(frozen=True)
class ParentComparison:
    """Relation between ``H_phi`` and ``H + H_B`` on the solvable line.

    Attributes
    ----------
    offset : float
        Mean of the diagonal of ``H_phi - (H + H_B)``.
    literal_residual : float
        Largest entry of ``H_phi - (H + H_B) - offset * I``: zero iff the two
        differ only by a constant.
    scale : float
        Least-squares ``kappa`` in ``H_phi = kappa (H + H_B) + c I``.
    scaled_offset : float
        The constant ``c`` accompanying ``scale``.
    scaled_residual : float
        Largest entry of ``H_phi - kappa (H + H_B) - c I``.
    """

    L: int
    phi: float
    offset: float
    literal_residual: float
    scale: float
    scaled_offset: float
    scaled_residual: float


def compare_parent(L: int, phi: float, J: float = 1.0) -> ParentComparison:
    """Measure how ``H_phi`` relates to ``H + H_B`` (dense, small L)."""
    Hp = build_parent(L, phi, J).toarray()
    H = hamiltonian(L, phi, J, with_boundary=True).toarray()
    dim = H.shape[0]
    eye = np.eye(dim)
    diff = Hp - H
    off = float(np.real(np.trace(diff)) / dim)
    lit = float(np.abs(diff - off * eye).max())
    # least squares for Hp = k H + c I over all matrix entries
    design = np.stack([H.ravel(), eye.ravel()], axis=1)
    (k, c), *_ = np.linalg.lstsq(design, Hp.ravel(), rcond=None)
    k, c = float(np.real(k)), float(np.real(c))
    scaled = float(np.abs(Hp - k * H - c * eye).max())
    return ParentComparison(L, float(phi), off, lit, k, c, scaled)


# ---------------------------------------------------------------------------
# Clock representation and symmetries
# ---------------------------------------------------------------------------


def _clock_site(L, j, m):
    return embed_local(L, {j: m}, basis="clock")


def build_clock_hamiltonian(p: ModelParams) -> LinOp:
    """Clock-basis form ``sum_j [-f tau_j - J omega* u_j^dag u_{j+1} + h.c.]``.

    ``u_j = sigma_j^dag + b (omega* tau_j sigma_j^dag + omega tau_j^dag sigma_j^dag)``.
    The boundary term is not part of this expression.
    """
    L = p.L
    check_dim(L)
    s, t = local_matrix("sigma"), local_matrix("tau")
    sd, td = s.conj().T, t.conj().T
    u = sd + p.b * (WC * t @ sd + W * td @ sd)
    dim = 3**L
    H = LinOp(sp.csr_matrix((dim, dim), dtype=complex), L, basis="clock")
    for j in range(1, L + 1):
        H = H + _herm(_clock_site(L, j, t) * (-p.f))
    for j in range(1, L):
        term = embed_local(L, {j: u.conj().T, j + 1: u}, basis="clock") * (-p.J * WC)
        H = H + _herm(term)
    return H


def to_clock_basis(op: LinOp) -> LinOp:
    """Transport a Fock-basis operator to the clock basis."""
    if op.basis != "fock" or op.sector is not None:
        raise ValueError("expected a full-space Fock-basis operator")
    U = fock_to_clock(op.L).matrix
    return LinOp(U @ op.matrix @ U.conj().T, op.L, op.support, None, "clock")


def gauge_unitary(L: int) -> LinOp:
    """``G = prod_j tau_j**j`` implementing ``sigma_j -> omega**(-j) sigma_j``."""
    t = local_matrix("tau")
    return embed_local(L, {j: np.linalg.matrix_power(t, j % 3) for j in range(1, L + 1)}, basis="clock")


def gauged_clock_hamiltonian(p: ModelParams) -> LinOp:
    H = build_clock_hamiltonian(p)
    G = gauge_unitary(p.L)
    return LinOp(G.matrix @ H.matrix @ G.matrix.conj().T, p.L, H.support, None, "clock")


def charge_conjugation_unitary(L: int) -> LinOp:
    """Site-wise relabelling ``|c> -> |-c mod 3>`` (maps sigma -> sigma^dag, tau -> tau^dag)."""
    P = np.zeros((3, 3))
    for c in range(3):
        P[(-c) % 3, c] = 1
    return embed_local(L, {j: P for j in range(1, L + 1)}, basis="clock")


def reflection_unitary(L: int, basis: str = "clock") -> LinOp:
    """Site-reversal permutation ``|n_1 ... n_L> -> |n_L ... n_1>``."""
    from .algebra import occupation_table

    occ = occupation_table(L)
    rev = occ[:, ::-1]
    target = (rev.astype(np.int64) * (3 ** np.arange(L - 1, -1, -1))).sum(axis=1)
    dim = 3**L
    m = sp.csr_matrix((np.ones(dim, dtype=complex), (target, np.arange(dim))), shape=(dim, dim))
    return LinOp(m, L, frozenset(range(1, L + 1)), None, basis)


def inversion_unitary(L: int) -> LinOp:
    """Spatial inversion in the Fock basis: ``(GU)^dag R (GU)``.

    ``U`` is :func:`fock_to_clock`, ``G`` the gauge of :func:`gauge_unitary`
    and ``R`` the site reversal.  Commutes with ``H`` and ``H + H_B``.
    """
    GU = gauge_unitary(L).matrix @ fock_to_clock(L).matrix
    R = reflection_unitary(L).matrix
    return LinOp(GU.conj().T @ R @ GU, L, frozenset(range(1, L + 1)))


@dataclass(frozen=True)
class SymmetryReport:
    """Residuals of the clock-basis symmetry checks (all max-abs entries)."""

    clock_form_residual: float
    time_reversal_imag: float
    charge_conjugation_residual: float
    tc_residual: float
    inversion_residual: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def check_time_reversal(p: ModelParams) -> SymmetryReport:
    """Verify the clock form and the anti-unitary / unitary symmetries.

    After the gauge ``sigma_j -> omega**(-j) sigma_j`` the time reversal
    ``T[tau] = tau^dag, T[sigma] = sigma`` is complex conjugation in the
    clock basis, so invariance means a real matrix.  Charge conjugation is
    the unitary of :func:`charge_conjugation_unitary`; ``T o C`` combines both.
    """
    bulk = ModelParams(p.L, p.f, p.J, p.b, with_boundary=False)
    Hf = build_H(bulk).total
    Hc = build_clock_hamiltonian(bulk)
    clock_res = (to_clock_basis(Hf) - Hc).norm()
    Hg = gauged_clock_hamiltonian(bulk).matrix
    tr_imag = float(np.abs(Hg.toarray().imag).max())
    P = charge_conjugation_unitary(p.L).matrix
    HC = P @ Hg @ P.T
    c_res = float(np.abs((HC - Hg).toarray()).max())
    tc_res = float(np.abs((HC.conj() - Hg).toarray()).max())
    I = inversion_unitary(p.L)
    Hfull = build_H(p).total
    inv_res = (I @ Hfull - Hfull @ I).norm()
    return SymmetryReport(clock_res, tr_imag, c_res, tc_res, inv_res)
