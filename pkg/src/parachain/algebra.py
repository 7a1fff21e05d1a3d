"""Exact arithmetic in Q(omega) and occupation-number bookkeeping.

``omega = exp(2 pi i / 3)`` is represented symbolically: an element of the
cyclotomic field is ``a + b*omega`` with rational ``a, b`` and the reduction
``omega**2 = -1 - omega``.  :class:`CycMatrix` extends this to matrices with
integer entries and a common rational denominator, which is all the operator
algebra of the chain ever needs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational

import numpy as np

OMEGA_C = complex(-0.5, np.sqrt(3.0) / 2.0)

_INT64_SAFE = 2**62


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    raise TypeError(f"cannot represent {x!r} exactly")


@dataclass(frozen=True)
class Cyclotomic:
    """Exact element ``a + b*omega`` of Q(omega)."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", _frac(self.a))
        object.__setattr__(self, "b", _frac(self.b))

    @classmethod
    def coerce(cls, x) -> "Cyclotomic":
        if isinstance(x, Cyclotomic):
            return x
        return cls(_frac(x), Fraction(0))

    @classmethod
    def omega_power(cls, k: int) -> "Cyclotomic":
        k %= 3
        if k == 0:
            return cls(1, 0)
        if k == 1:
            return cls(0, 1)
        return cls(-1, -1)

    def __add__(self, other):
        try:
            o = Cyclotomic.coerce(other)
        except TypeError:
            return NotImplemented
        return Cyclotomic(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic(-self.a, -self.b)

    def __sub__(self, other):
        try:
            o = Cyclotomic.coerce(other)
        except TypeError:
            return NotImplemented
        return Cyclotomic(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = Cyclotomic.coerce(other)
        except TypeError:
            return NotImplemented
        # (a + b w)(c + d w) = ac + (ad + bc) w + bd w^2,  w^2 = -1 - w
        bd = self.b * o.b
        return Cyclotomic(self.a * o.a - bd, self.a * o.b + self.b * o.a - bd)

    __rmul__ = __mul__

    def conjugate(self) -> "Cyclotomic":
        # conj(w) = w^2 = -1 - w
        return Cyclotomic(self.a - self.b, -self.b)

    def norm(self) -> Fraction:
        """Field norm ``z * conj(z) = a^2 - ab + b^2`` (always rational)."""
        return self.a * self.a - self.a * self.b + self.b * self.b

    def inverse(self) -> "Cyclotomic":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(omega)")
        c = self.conjugate()
        return Cyclotomic(c.a / n, c.b / n)

    def __truediv__(self, other):
        return self * Cyclotomic.coerce(other).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclotomic(1, 0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        try:
            o = Cyclotomic.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __complex__(self):
        return float(self.a) + float(self.b) * OMEGA_C

    def __repr__(self):
        return f"Cyclotomic({self.a}, {self.b})"


OMEGA = Cyclotomic(0, 1)


def cyc_mul(x: Cyclotomic, y: Cyclotomic) -> Cyclotomic:
    return Cyclotomic.coerce(x) * Cyclotomic.coerce(y)


def _as_int_array(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.dtype == object:
        return arr
    return arr.astype(np.int64)


def _fits_int64(*arrays, factor: int = 1) -> bool:
    bound = 1
    for arr in arrays:
        m = int(np.max(np.abs(arr))) if arr.size else 0
        bound *= max(m, 1)
    return bound * max(factor, 1) < _INT64_SAFE


@dataclass(frozen=True, eq=False)
class CycMatrix:
    """Exact matrix over Q(omega): ``(a + b*omega) / den`` entrywise.

    ``a`` and ``b`` are integer arrays (int64, promoted to Python ints when a
    product could overflow); ``den`` is a positive integer.
    """

    a: np.ndarray
    b: np.ndarray
    den: int = 1

    def __post_init__(self):
        a, b = _as_int_array(self.a), _as_int_array(self.b)
        if a.shape != b.shape:
            raise ValueError("real and omega parts must have equal shape")
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "den", int(self.den))

    @property
    def shape(self):
        return self.a.shape

    @classmethod
    def zeros(cls, n: int, m: int | None = None) -> "CycMatrix":
        m = n if m is None else m
        z = np.zeros((n, m), dtype=np.int64)
        return cls(z, z.copy())

    @classmethod
    def identity(cls, n: int) -> "CycMatrix":
        return cls(np.eye(n, dtype=np.int64), np.zeros((n, n), dtype=np.int64))

    @classmethod
    def from_entries(cls, rows) -> "CycMatrix":
        """Build from a nested list of Cyclotomic / rational entries."""
        ent = [[Cyclotomic.coerce(x) for x in row] for row in rows]
        den = 1
        for row in ent:
            for x in row:
                den = np.lcm(den, np.lcm(x.a.denominator, x.b.denominator))
        den = int(den)
        a = np.array([[int(x.a * den) for x in row] for row in ent], dtype=np.int64)
        b = np.array([[int(x.b * den) for x in row] for row in ent], dtype=np.int64)
        return cls(a, b, den)

    def _with(self, a, b, den) -> "CycMatrix":
        return CycMatrix(a, b, den)._reduced()

    def _reduced(self) -> "CycMatrix":
        if self.den == 1:
            return self
        g = self.den
        for arr in (self.a, self.b):
            if arr.size:
                g = int(np.gcd.reduce(np.append(arr.ravel().astype(object), g)))
            if g == 1:
                return self
        if g <= 1:
            return self
        return CycMatrix(self.a // g, self.b // g, self.den // g)

    def __matmul__(self, other: "CycMatrix") -> "CycMatrix":
        a, b, c, d = self.a, self.b, other.a, other.b
        if not _fits_int64(a, c, factor=3 * a.shape[-1]) or not _fits_int64(b, d, factor=3 * a.shape[-1]):
            a, b, c, d = (x.astype(object) for x in (a, b, c, d))
        bd = b @ d
        return self._with(a @ c - bd, a @ d + b @ c - bd, self.den * other.den)

    def _align(self, other: "CycMatrix"):
        den = int(np.lcm(self.den, other.den))
        s, o = den // self.den, den // other.den
        return self.a * s, self.b * s, other.a * o, other.b * o, den

    def __add__(self, other: "CycMatrix") -> "CycMatrix":
        a1, b1, a2, b2, den = self._align(other)
        return self._with(a1 + a2, b1 + b2, den)

    def __sub__(self, other: "CycMatrix") -> "CycMatrix":
        a1, b1, a2, b2, den = self._align(other)
        return self._with(a1 - a2, b1 - b2, den)

    def __neg__(self) -> "CycMatrix":
        return CycMatrix(-self.a, -self.b, self.den)

    def scale(self, z) -> "CycMatrix":
        z = Cyclotomic.coerce(z)
        den = int(np.lcm(z.a.denominator, z.b.denominator))
        za, zb = int(z.a * den), int(z.b * den)
        # (a + b w)(za + zb w) = a za - b zb + (a zb + b za - b zb) w
        bz = self.b * zb
        return self._with(self.a * za - bz, self.a * zb + self.b * za - bz, self.den * den)

    def __mul__(self, z) -> "CycMatrix":
        return self.scale(z)

    __rmul__ = __mul__

    @property
    def H(self) -> "CycMatrix":
        """Conjugate transpose."""
        return CycMatrix((self.a - self.b).T, (-self.b).T, self.den)

    def kron(self, other: "CycMatrix") -> "CycMatrix":
        a, b, c, d = self.a, self.b, other.a, other.b
        bd = np.kron(b, d)
        return self._with(np.kron(a, c) - bd, np.kron(a, d) + np.kron(b, c) - bd, self.den * other.den)

    def __pow__(self, k: int) -> "CycMatrix":
        if k < 0:
            raise ValueError("negative matrix powers are not supported")
        out = CycMatrix.identity(self.shape[0])
        for _ in range(k):
            out = out @ self
        return out

    def is_zero(self) -> bool:
        return not np.any(self.a) and not np.any(self.b)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CycMatrix):
            return NotImplemented
        if self.shape != other.shape:
            return False
        return (self - other).is_zero()

    __hash__ = None

    def to_complex(self) -> np.ndarray:
        a = self.a.astype(np.float64)
        b = self.b.astype(np.float64)
        return (a + b * OMEGA_C) / self.den

    def entry(self, i: int, j: int) -> Cyclotomic:
        return Cyclotomic(Fraction(int(self.a[i, j]), self.den), Fraction(int(self.b[i, j]), self.den))


# ---------------------------------------------------------------------------
# Occupation-number bookkeeping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockState:
    """Occupation string ``(n_1, ..., n_L)`` with ``n_j`` in {0, 1, 2}."""

    occupations: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(int(n) for n in self.occupations)
        if not occ:
            raise ValueError("a Fock state needs at least one site")
        if any(n not in (0, 1, 2) for n in occ):
            raise ValueError(f"occupations must lie in {{0,1,2}}: {occ}")
        object.__setattr__(self, "occupations", occ)

    @property
    def L(self) -> int:
        return len(self.occupations)

    @property
    def total_N(self) -> int:
        return sum(self.occupations)

    @property
    def charge(self) -> int:
        return self.total_N % 3

    @property
    def full_index(self) -> int:
        """Position in the 3**L product basis (site 1 most significant)."""
        idx = 0
        for n in self.occupations:
            idx = 3 * idx + n
        return idx

    @classmethod
    def from_index(cls, L: int, index: int) -> "FockState":
        occ = []
        for _ in range(L):
            index, r = divmod(index, 3)
            occ.append(r)
        return cls(tuple(reversed(occ)))


def occupation_table(L: int) -> np.ndarray:
    """All ``3**L`` occupation strings as a ``(3**L, L)`` uint8 array in basis order."""
    if L < 1:
        raise ValueError("L must be >= 1")
    idx = np.arange(3**L)
    digits = np.empty((3**L, L), dtype=np.uint8)
    for j in range(L - 1, -1, -1):
        idx, digits[:, j] = np.divmod(idx, 3)
    return digits


def total_number(L: int) -> np.ndarray:
    """Total occupation N for every product-basis state."""
    return occupation_table(L).sum(axis=1, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Fock states of an L-site chain with total charge ``q = N mod 3``.

    States are ordered lexicographically on the occupation string, which is
    the same as increasing position in the full product basis.
    """

    L: int
    q: int
    indices: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return self.dim

    @cached_property
    def occupations(self) -> np.ndarray:
        return occupation_table(self.L)[self.indices]

    @property
    def states(self) -> list[FockState]:
        return [FockState(tuple(row)) for row in self.occupations]

    def index_of(self, state: FockState | tuple[int, ...]) -> int:
        if not isinstance(state, FockState):
            state = FockState(tuple(state))
        if state.L != self.L or state.charge != self.q:
            raise KeyError(f"{state.occupations} is not in sector (L={self.L}, q={self.q})")
        return int(np.searchsorted(self.indices, state.full_index))

    def state_at(self, position: int) -> FockState:
        return FockState.from_index(self.L, int(self.indices[position]))


def enumerate_sector(L: int, q: int) -> SectorBasis:
    if not isinstance(L, (int, np.integer)) or L < 1:
        raise ValueError(f"L must be a positive integer, got {L!r}")
    if q not in (0, 1, 2):
        raise ValueError(f"charge must be 0, 1 or 2, got {q!r}")
    N = total_number(L)
    return SectorBasis(int(L), int(q), np.flatnonzero(N % 3 == q))


def brute_force_sector(L: int, q: int) -> list[tuple[int, ...]]:
    """Reference enumeration of a charge sector via itertools."""
    return [occ for occ in itertools.product(range(3), repeat=L) if sum(occ) % 3 == q]
