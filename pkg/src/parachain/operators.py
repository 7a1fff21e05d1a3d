"""Site-local and string operators of the Z3 parafermion chain.

Two numeric back-ends are offered for every builder:

* ``exact=False`` (default) returns a :class:`LinOp` wrapping a complex CSR
  matrix; this is what the Hamiltonian and solver layers consume.
* ``exact=True`` returns a :class:`~parachain.algebra.CycMatrix` whose entries
  live in Q(omega); use it to prove operator identities with zero round-off.
  Exact matrices are dense, so keep ``L`` at four or below.

Basis conventions
-----------------
The occupation ("Fock") basis orders states with site 1 as the most
significant base-3 digit.  The local lowering matrix is
``c = |0><1| + |1><2|`` and Fock parafermions carry a string of
``omega**N_k`` over sites ``k < j``::

    C_j = prod_{k<j} omega**N_k  c_j

Parafermions follow from ``gamma_{2j-1} = omega (C_j + C_j^dag^2)`` and
``gamma_{2j} = C_j omega**N_j + C_j^dag^2``.

The clock basis is related to the Fock basis by the site-local unitary
returned by :func:`fock_to_clock`, under which the parafermions become the
Fradkin-Kadanoff strings ``(prod_{k<j} tau_k) sigma_j`` and
``omega (prod_{k<j} tau_k) sigma_j tau_j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Literal, Union

import numpy as np
import scipy.sparse as sp

from .algebra import OMEGA_C, CycMatrix, enumerate_sector, total_number

__all__ = [
    "LinOp",
    "ExactOp",
    "DEFAULT_DIM_CAP",
    "DimensionCapError",
    "check_dim",
    "local_matrix",
    "embed_local",
    "build_fock_annihilator",
    "build_number",
    "build_parafermion",
    "build_clock",
    "build_Z",
    "build_charge",
    "fock_to_clock",
    "commutator",
    "build_omega_number",
    "build_fk_parafermion",
    "build_total_number",
    "as_dense",
    "exact_identity",
    "all_parafermions",
    "sum_ops",
]

ExactOp = CycMatrix

#: Largest Hilbert-space dimension the builders will materialise (3**12).
DEFAULT_DIM_CAP = 3**12


class DimensionCapError(MemoryError):
    """Raised when a requested Hilbert space exceeds the configured cap."""


def check_dim(L: int, cap: int | None = None) -> int:
    dim = 3**L
    cap = DEFAULT_DIM_CAP if cap is None else cap
    if dim > cap:
        raise DimensionCapError(f"3**{L} = {dim} exceeds the dimension cap {cap}")
    return dim


# ---------------------------------------------------------------------------
# LinOp
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LinOp:
    """Complex linear operator on an L-site chain.

    Parameters
    ----------
    matrix : scipy.sparse.csr_matrix
        Matrix in the Fock (or clock, see ``basis``) product basis, or in a
        charge sector when ``sector`` is set.
    L : int
        Number of sites.
    support : frozenset of int
        Sites (1-based) on which the operator acts nontrivially.  String
        operators include every site of their string.
    sector : int or None
        ``None`` for the full ``3**L`` space, else the charge ``q`` of the
        :class:`~parachain.algebra.SectorBasis` the matrix is written in.
    basis : {"fock", "clock"}
        Local basis of the product space.
    """

    matrix: sp.csr_matrix
    L: int
    support: frozenset = field(default_factory=frozenset)
    sector: int | None = None
    basis: str = "fock"

    def __post_init__(self):
        m = self.matrix
        if not sp.issparse(m):
            m = sp.csr_matrix(np.asarray(m, dtype=complex))
        object.__setattr__(self, "matrix", sp.csr_matrix(m, dtype=complex))
        object.__setattr__(self, "support", frozenset(self.support))

    # -- shape & conversion -------------------------------------------------
    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def _tag(self):
        return (self.L, self.sector, self.basis)

    def _check_compatible(self, other: "LinOp"):
        if self._tag() != other._tag():
            raise ValueError(
                f"basis mismatch: (L, sector, basis) {self._tag()} vs {other._tag()}"
            )

    def _new(self, matrix, support=None) -> "LinOp":
        return LinOp(matrix, self.L, self.support if support is None else support, self.sector, self.basis)

    # -- arithmetic ---------------------------------------------------------
    def __matmul__(self, other):
        if isinstance(other, LinOp):
            self._check_compatible(other)
            return self._new(self.matrix @ other.matrix, self.support | other.support)
        return self.matrix @ np.asarray(other)

    def __add__(self, other):
        if isinstance(other, LinOp):
            self._check_compatible(other)
            return self._new(self.matrix + other.matrix, self.support | other.support)
        if np.isscalar(other):
            return self._new(self.matrix + other * sp.identity(self.dim, dtype=complex, format="csr"))
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return self._new(-self.matrix)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, z):
        if np.isscalar(z):
            return self._new(self.matrix * z)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, z):
        return self * (1.0 / z)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = self.identity_like()
        for _ in range(k):
            out = out @ self
        return out

    @property
    def H(self) -> "LinOp":
        """Hermitian conjugate."""
        return self._new(self.matrix.conj().T.tocsr())

    def identity_like(self) -> "LinOp":
        return LinOp(sp.identity(self.dim, dtype=complex, format="csr"), self.L, frozenset(), self.sector, self.basis)

    # -- diagnostics --------------------------------------------------------
    def norm(self) -> float:
        """Largest absolute entry (a cheap, basis-dependent norm)."""
        m = self.matrix
        return float(np.abs(m.data).max()) if m.nnz else 0.0

    def hermiticity_residual(self) -> float:
        return (self - self.H).norm()

    def allclose(self, other: "LinOp", atol: float = 1e-12) -> bool:
        return (self - other).norm() <= atol

    # -- sectors ------------------------------------------------------------
    def restrict(self, q: int) -> "LinOp":
        """Restrict a charge-preserving full-space operator to sector ``q``."""
        if self.sector is not None:
            raise ValueError("operator is already sector-restricted")
        idx = enumerate_sector(self.L, q).indices
        return LinOp(self.matrix[idx][:, idx], self.L, self.support, q, self.basis)

    def embed(self) -> "LinOp":
        """Re-embed a sector operator into the full space (zeros elsewhere)."""
        if self.sector is None:
            return self
        idx = enumerate_sector(self.L, self.sector).indices
        coo = self.matrix.tocoo()
        dim = 3**self.L
        m = sp.csr_matrix((coo.data, (idx[coo.row], idx[coo.col])), shape=(dim, dim))
        return LinOp(m, self.L, self.support, None, self.basis)

    def charge_leakage(self) -> float:
        """Largest matrix element connecting different charge sectors."""
        q = total_number(self.L) % 3
        coo = self.matrix.tocoo()
        mask = q[coo.row] != q[coo.col]
        return float(np.abs(coo.data[mask]).max()) if mask.any() else 0.0


def commutator(a, b):
    """``[a, b] = ab - ba`` for LinOp or CycMatrix arguments."""
    return a @ b - b @ a


# ---------------------------------------------------------------------------
# Local matrices
# ---------------------------------------------------------------------------

_W = OMEGA_C

_LOCAL_FLOAT = {
    "c": np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=complex),
    "n": np.diag([0, 1, 2]).astype(complex),
    "wn": np.diag([1, _W, _W * _W]),
    "sigma": np.array([[0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=complex),
    "tau": np.diag([1, _W, _W * _W]),
    "id": np.eye(3, dtype=complex),
}


def _cyc(a, b=None) -> CycMatrix:
    a = np.asarray(a, dtype=np.int64)
    b = np.zeros_like(a) if b is None else np.asarray(b, dtype=np.int64)
    return CycMatrix(a, b)


# omega**n = 1, w, -1 - w  ->  a parts (1, 0, -1), b parts (0, 1, -1)
_LOCAL_EXACT = {
    "c": _cyc(_LOCAL_FLOAT["c"].real),
    "n": _cyc(np.diag([0, 1, 2])),
    "wn": _cyc(np.diag([1, 0, -1]), np.diag([0, 1, -1])),
    "sigma": _cyc(_LOCAL_FLOAT["sigma"].real),
    "tau": _cyc(np.diag([1, 0, -1]), np.diag([0, 1, -1])),
    "id": CycMatrix.identity(3),
}


def local_matrix(name: str, exact: bool = False):
    """Return one of the 3x3 building blocks ``c, n, wn, sigma, tau, id``."""
    table = _LOCAL_EXACT if exact else _LOCAL_FLOAT
    if name not in table:
        raise KeyError(f"unknown local matrix {name!r}")
    m = table[name]
    return m if exact else m.copy()


def _check_site(L: int, j: int):
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise ValueError(f"L must be a positive integer, got {L!r}")
    if not 1 <= j <= L:
        raise IndexError(f"site {j} out of range 1..{L}")


def embed_local(L: int, ops: dict[int, np.ndarray], basis: str = "fock") -> LinOp:
    """Tensor product of site matrices ``ops[j]`` (identity elsewhere).

    Consecutive identity factors are merged into one sparse identity so the
    cost is dominated by the final ``nnz``.
    """
    factors = []
    run = 0
    for j in range(1, L + 1):
        if j in ops:
            if run:
                factors.append(sp.identity(3**run, dtype=complex, format="csr"))
                run = 0
            factors.append(sp.csr_matrix(ops[j], dtype=complex))
        else:
            run += 1
    if run:
        factors.append(sp.identity(3**run, dtype=complex, format="csr"))
    mat = reduce(lambda x, y: sp.kron(x, y, format="csr"), factors)
    support = frozenset(j for j, m in ops.items() if not np.allclose(m, np.eye(3)))
    return LinOp(mat, L, support, None, basis)


def _embed_block(L: int, first: int, block: np.ndarray, basis: str = "fock") -> LinOp:
    """Embed an operator acting on consecutive sites ``first..first+k-1``."""
    k = int(round(np.log(block.shape[0]) / np.log(3)))
    left = sp.identity(3 ** (first - 1), dtype=complex, format="csr")
    right = sp.identity(3 ** (L - first - k + 1), dtype=complex, format="csr")
    mat = sp.kron(sp.kron(left, sp.csr_matrix(block), format="csr"), right, format="csr")
    return LinOp(mat, L, frozenset(range(first, first + k)), None, basis)


def _exact_product(L: int, ops: dict[int, CycMatrix]) -> CycMatrix:
    eye = local_matrix("id", exact=True)
    return reduce(lambda x, y: x.kron(y), [ops.get(j, eye) for j in range(1, L + 1)])


def _product(L: int, ops_float: dict, ops_exact: dict, exact: bool, dim_cap=None):
    if exact:
        if L > 6:
            raise ValueError("exact builds are dense; use L <= 6")
        return _exact_product(L, ops_exact)
    check_dim(L, dim_cap)
    return embed_local(L, ops_float)


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_fock_annihilator(L: int, j: int, *, exact: bool = False, dim_cap: int | None = None):
    """Fock parafermion annihilator ``C_j`` with its left string.

    Parameters
    ----------
    L : int
        Number of sites.
    j : int
        Site (1-based).
    exact : bool
        Return an exact :class:`CycMatrix` instead of a :class:`LinOp`.

    Examples
    --------
    >>> C = build_fock_annihilator(1, 1, exact=True)
    >>> C.entry(0, 1)
    Cyclotomic(1, 0)
    """
    _check_site(L, j)
    fl = {k: _LOCAL_FLOAT["wn"] for k in range(1, j)}
    fl[j] = _LOCAL_FLOAT["c"]
    ex = {k: _LOCAL_EXACT["wn"] for k in range(1, j)}
    ex[j] = _LOCAL_EXACT["c"]
    op = _product(L, fl, ex, exact, dim_cap)
    if not exact:
        op = LinOp(op.matrix, L, frozenset(range(1, j + 1)))
    return op


def build_number(L: int, j: int, *, exact: bool = False, dim_cap: int | None = None):
    """Occupation number ``N_j`` (diagonal, eigenvalue ``n_j``)."""
    _check_site(L, j)
    return _product(L, {j: _LOCAL_FLOAT["n"]}, {j: _LOCAL_EXACT["n"]}, exact, dim_cap)


def build_omega_number(L: int, j: int, *, exact: bool = False):
    """``omega**N_j``."""
    _check_site(L, j)
    return _product(L, {j: _LOCAL_FLOAT["wn"]}, {j: _LOCAL_EXACT["wn"]}, exact)


def build_parafermion(L: int, a: int, *, exact: bool = False, dim_cap: int | None = None):
    """Parafermion ``gamma_a`` for ``a = 1 .. 2L`` built from Fock parafermions.

    ``gamma_{2j-1} = omega (C_j + C_j^dag^2)`` and
    ``gamma_{2j} = C_j omega**N_j + C_j^dag^2``.
    """
    if not 1 <= a <= 2 * L:
        raise IndexError(f"parafermion index {a} out of range 1..{2 * L}")
    j = (a + 1) // 2
    C = build_fock_annihilator(L, j, exact=exact, dim_cap=dim_cap)
    Cd2 = C.H @ C.H
    if a % 2 == 1:
        return (C + Cd2) * (_omega(exact))
    wN = build_omega_number(L, j, exact=exact)
    return C @ wN + Cd2


def _omega(exact: bool):
    from .algebra import OMEGA

    return OMEGA if exact else _W


def build_clock(
    L: int,
    j: int,
    which: Literal["sigma", "tau"],
    *,
    basis: Literal["clock", "fock"] = "clock",
    exact: bool = False,
):
    """Clock operator ``sigma_j`` (cyclic shift) or ``tau_j`` (phase).

    With ``basis="clock"`` the operator is the bare tensor product.  With
    ``basis="fock"`` it is transported to the occupation basis by
    :func:`fock_to_clock`, so that Fradkin-Kadanoff strings built from the
    result coincide with :func:`build_parafermion`.
    """
    _check_site(L, j)
    if which not in ("sigma", "tau"):
        raise ValueError(f"which must be 'sigma' or 'tau', got {which!r}")
    if basis not in ("clock", "fock"):
        raise ValueError(f"basis must be 'clock' or 'fock', got {basis!r}")
    if basis == "clock":
        op = _product(L, {j: _LOCAL_FLOAT[which]}, {j: _LOCAL_EXACT[which]}, exact)
        if not exact:
            op = LinOp(op.matrix, L, op.support, None, "clock")
        return op
    u = _site_clock_map(j, exact)
    loc = u.H @ local_matrix(which, exact) @ u if exact else u.conj().T @ _LOCAL_FLOAT[which] @ u
    return _product(L, {j: loc}, {j: loc}, exact)


def _site_clock_map(j: int, exact: bool):
    """Local unitary ``tau**((2-j) mod 3) P`` taking Fock to clock states.

    ``P`` relabels occupation ``n`` as clock state ``(n+1) mod 3``.
    """
    P = np.zeros((3, 3), dtype=np.int64)
    for n in range(3):
        P[(n + 1) % 3, n] = 1
    power = (2 - j) % 3
    if exact:
        return local_matrix("tau", True) ** power @ _cyc(P)
    return np.linalg.matrix_power(_LOCAL_FLOAT["tau"], power) @ P


def fock_to_clock(L: int, *, exact: bool = False):
    """Unitary ``U`` with ``U gamma U^dag`` equal to the Fradkin-Kadanoff strings.

    Fock-basis vectors are mapped to clock-basis vectors by ``U @ v``.
    """
    if exact:
        return reduce(lambda x, y: x.kron(y), [_site_clock_map(j, True) for j in range(1, L + 1)])
    check_dim(L)
    return embed_local(L, {j: _site_clock_map(j, False) for j in range(1, L + 1)}, basis="clock")


def build_fk_parafermion(L: int, a: int, *, exact: bool = False):
    """Fradkin-Kadanoff string in the clock basis.

    ``gamma_{2j-1} = (prod_{k<j} tau_k) sigma_j`` and
    ``gamma_{2j} = omega (prod_{k<j} tau_k) sigma_j tau_j``.
    """
    if not 1 <= a <= 2 * L:
        raise IndexError(f"parafermion index {a} out of range 1..{2 * L}")
    j = (a + 1) // 2
    tab = _LOCAL_EXACT if exact else _LOCAL_FLOAT
    ops = {k: tab["tau"] for k in range(1, j)}
    ops[j] = tab["sigma"] if a % 2 == 1 else tab["sigma"] @ tab["tau"]
    op = _product(L, ops, ops, exact)
    if a % 2 == 0:
        op = op * _omega(exact)
    if not exact:
        op = LinOp(op.matrix, L, frozenset(range(1, j + 1)), None, "clock")
    return op


def build_Z(L: int, phi: float, *, dim_cap: int | None = None) -> LinOp:
    """Diagonal deformation ``Z_phi = exp(phi N / 3)`` with ``N`` the total occupation."""
    if not np.isfinite(phi):
        raise ValueError("phi must be finite")
    check_dim(L, dim_cap)
    diag = np.exp(phi * total_number(L) / 3.0)
    return LinOp(sp.diags(diag.astype(complex), format="csr"), L, frozenset(range(1, L + 1)))


def build_charge(L: int, *, power: int = 1, dim_cap: int | None = None) -> LinOp:
    """Z3 charge ``Q = omega**N_total`` (Fock basis), raised to ``power``.

    In the clock basis this is ``prod_j tau_j^dag`` up to the per-site gauge of
    :func:`fock_to_clock`; both generate the same symmetry.
    """
    check_dim(L, dim_cap)
    diag = _W ** ((power * total_number(L)) % 3)
    return LinOp(sp.diags(diag, format="csr"), L, frozenset(range(1, L + 1)))


def build_total_number(L: int) -> LinOp:
    check_dim(L)
    return LinOp(sp.diags(total_number(L).astype(complex), format="csr"), L, frozenset(range(1, L + 1)))


def as_dense(op: Union[LinOp, CycMatrix, np.ndarray]) -> np.ndarray:
    """Dense complex array for any operator representation."""
    if isinstance(op, LinOp):
        return op.toarray()
    if isinstance(op, CycMatrix):
        return op.to_complex()
    return np.asarray(op, dtype=complex)


def exact_identity(L: int) -> CycMatrix:
    return CycMatrix.identity(3**L)


def all_parafermions(L: int, *, exact: bool = False) -> list:
    return [build_parafermion(L, a, exact=exact) for a in range(1, 2 * L + 1)]


def sum_ops(ops: Iterable[LinOp]) -> LinOp:
    ops = list(ops)
    if not ops:
        raise ValueError("empty sum")
    return reduce(lambda x, y: x + y, ops)
