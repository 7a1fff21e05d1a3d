import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parachain.algebra import (
    OMEGA_C,
    CycMatrix,
    Cyclotomic,
    FockState,
    brute_force_sector,
    enumerate_sector,
    occupation_table,
    total_number,
)

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
cyclotomics = st.builds(Cyclotomic, fractions, fractions)


def as_complex(z: Cyclotomic) -> complex:
    return float(z.a) + float(z.b) * OMEGA_C


@given(cyclotomics, cyclotomics)
def test_field_operations_match_complex(x, y):
    assert abs(as_complex(x + y) - (as_complex(x) + as_complex(y))) < 1e-9
    assert abs(as_complex(x * y) - as_complex(x) * as_complex(y)) < 1e-9
    assert abs(as_complex(x.conjugate()) - np.conj(as_complex(x))) < 1e-9


@given(cyclotomics)
def test_inverse_and_norm(x):
    if x == Cyclotomic(0, 0):
        with pytest.raises(ZeroDivisionError):
            x.inverse()
        return
    assert x * x.inverse() == Cyclotomic(1, 0)
    assert x.norm() == (x * x.conjugate()).a
    assert (x * x.conjugate()).b == 0


def test_omega_powers():
    w = Cyclotomic.omega_power(1)
    assert w * w * w == Cyclotomic(1, 0)
    assert Cyclotomic(1, 0) + w + w * w == Cyclotomic(0, 0)
    assert Cyclotomic.omega_power(-1) == w.conjugate()
    assert Cyclotomic.omega_power(5) == Cyclotomic.omega_power(2)


@st.composite
def cyc_matrices(draw, n=3):
    ints = st.integers(-4, 4)
    a = np.array(draw(st.lists(ints, min_size=n * n, max_size=n * n))).reshape(n, n)
    b = np.array(draw(st.lists(ints, min_size=n * n, max_size=n * n))).reshape(n, n)
    return CycMatrix(a, b)


@settings(max_examples=50)
@given(cyc_matrices(), cyc_matrices())
def test_cycmatrix_product_matches_complex(x, y):
    ref = x.to_complex() @ y.to_complex()
    assert np.allclose((x @ y).to_complex(), ref)
    assert np.allclose(x.H.to_complex(), x.to_complex().conj().T)


@settings(max_examples=50)
@given(cyc_matrices(), fractions)
def test_cycmatrix_scale_round_trip(x, q):
    z = Cyclotomic(q, Fraction(1, 3))
    if z == Cyclotomic(0, 0):
        return
    assert x.scale(z).scale(z.inverse()) == x


def test_cycmatrix_kron_and_identity():
    w = CycMatrix.from_entries([[0, 1], [Cyclotomic(0, 1), 0]])
    k = w.kron(CycMatrix.identity(2))
    assert np.allclose(k.to_complex(), np.kron(w.to_complex(), np.eye(2)))
    assert (w - w).is_zero()


@given(st.integers(1, 7), st.integers(0, 3**7 - 1))
def test_fock_state_index_round_trip(L, index):
    index %= 3**L
    s = FockState.from_index(L, index)
    assert s.full_index == index
    assert s.charge == s.total_N % 3
    assert len(s.occupations) == L


def test_site_one_is_most_significant():
    occ = occupation_table(2)
    assert occ[1].tolist() == [0, 1]
    assert occ[3].tolist() == [1, 0]


@pytest.mark.parametrize("L", range(1, 8))
def test_sector_sizes_and_contents(L):
    sizes = [enumerate_sector(L, q).dim for q in range(3)]
    assert sum(sizes) == 3**L
    # brute-force oracle: from the itertools enumeration
    for q in range(3):
        basis = enumerate_sector(L, q)
        ref = brute_force_sector(L, q)
        assert basis.dim == len(ref)
        assert [tuple(r) for r in basis.occupations] == ref
    # sectors have sizes (3**L + 2 Re omega^{...})/3, all within one of 3**(L-1)
    assert max(sizes) - min(sizes) <= 1 or L == 1


def test_sector_index_of():
    basis = enumerate_sector(4, 2)
    for pos in (0, 5, basis.dim - 1):
        assert basis.index_of(basis.state_at(pos)) == pos
    with pytest.raises(KeyError):
        basis.index_of((0, 0, 0, 0))


def test_sector_rejects_bad_input():
    with pytest.raises(ValueError):
        enumerate_sector(0, 0)
    with pytest.raises(ValueError):
        enumerate_sector(3, 3)


def test_total_number():
    L = 3
    ref = [sum(o) for o in itertools.product(range(3), repeat=L)]
    assert total_number(L).tolist() == ref
