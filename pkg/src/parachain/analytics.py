"""Closed-form ground-state observables and their numerical counterparts.

Every closed form below is a finite sum over the three Fourier components
``k = 0, 1, 2`` of the charge constraint.  With ``x = exp(-2 phi / 3)``,
``base_k = 1 + omega**k x + omega**(2k) x**2`` and ``r_k = base_k / base_0``:

* ``N_{L,i} = base_0**L D_i(L) / 3`` with ``D_i(m) = sum_k omega**(-ik) r_k**m``;
* two-point functions pick up ``r_{k-1}`` on sites under a string of
  ``omega**(2N)`` (or ``omega**(-N)``) and ``r_k`` elsewhere.

``r_1`` and ``r_2`` are complex conjugates with ``|r_1| = exp(-1/xi)``, so all
connected correlations decay with the correlation length ``xi``.

The numerical evaluations use either a dense vector (``L`` up to ~10) or the
exact MPS (any ``L``) and never touch the closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .algebra import OMEGA_C
from .groundstate import (
    build_gs_mps,
    build_gs_vector,
    charge_ratio,
    norm_constants,
    sector_factor,
    site_base,
)
from .operators import build_fock_annihilator, build_number

__all__ = [
    "xi",
    "n_of_phi",
    "density",
    "density_numeric",
    "corr_G",
    "corr_G_numeric",
    "F_func",
    "F_numeric",
    "F_left_asymptote",
    "F_right_asymptote",
    "ent_spectrum",
    "ent_spectrum_numeric",
    "entropy",
    "theta",
    "decay_window",
    "fit_exponential_decay",
    "DecayFit",
    "fitted_xi",
    "Observables",
    "observables",
]

W = OMEGA_C


def _r(phi: float, k: int) -> complex:
    k %= 3
    if k == 0:
        return 1.0 + 0j
    r1 = charge_ratio(phi)
    return r1 if k == 1 else np.conj(r1)


def _pow(z: complex, m: int) -> complex:
    # 0**0 = 1 is what the sums need at phi = 0
    return complex(1.0) if m == 0 else complex(z) ** m


def _check_l(L: int, ell: int, upper: int | None = None):
    upper = L if upper is None else upper
    if not 1 <= ell <= upper:
        raise IndexError(f"position {ell} out of range 1..{upper}")


# ---------------------------------------------------------------------------
# Correlation length and densities
# ---------------------------------------------------------------------------


def xi(phi: float) -> float:
    """Correlation length ``1/xi = ln|base_0 / base_1|``; ``xi(0) = 0``.

    Examples
    --------
    >>> xi(0.0)
    0.0
    """
    if not np.isfinite(phi):
        return math.inf
    if phi == 0:
        return 0.0
    mag = abs(charge_ratio(phi))
    if mag == 0.0:
        return 0.0
    inv = -math.log(mag)
    return math.inf if inv == 0 else 1.0 / inv


def n_of_phi(phi: float) -> float:
    """Bulk density ``(x + 2 x**2) / (1 + x + x**2)`` with ``x = exp(-2 phi / 3)``."""
    if phi == math.inf:
        return 0.0
    if phi == -math.inf:
        return 2.0
    # written in terms of y = exp(-|2 phi / 3|) to avoid overflow
    y = math.exp(-abs(2.0 * phi / 3.0))
    if phi >= 0:
        return (y + 2 * y * y) / (1 + y + y * y)
    return (y + 2.0) / (y * y + y + 1)


def density(L: int, phi: float, i: int) -> float:
    """``<N_j>`` in ``|g_{i,phi}>`` (independent of ``j``).

    ``<N_j>_i = sum_k omega**(-ik) (omega**k x + 2 omega**(2k) x**2) A(L-1, k)
    / sum_k omega**(-ik) A(L, k)``.
    """
    x = math.exp(-2.0 * phi / 3.0)
    b0 = site_base(phi, 0).real
    num = sum(
        W ** ((-i * k) % 3) * (W ** (k % 3) * x + 2 * W ** ((2 * k) % 3) * x * x) * _pow(_r(phi, k), L - 1)
        for k in range(3)
    )
    return float((num / b0).real / sector_factor(i, L, phi))


def density_numeric(L: int, phi: float, i: int, j: int | None = None) -> float | np.ndarray:
    """``<g|N_j|g>`` from the dense vector (all sites when ``j`` is None)."""
    v = build_gs_vector(L, phi, i).full_vector()
    sites = range(1, L + 1) if j is None else [j]
    vals = [float(np.vdot(v, build_number(L, s) @ v).real) for s in sites]
    return np.array(vals) if j is None else vals[0]


# ---------------------------------------------------------------------------
# G_i(l) = <C_1^dag^2 C_l^2>
# ---------------------------------------------------------------------------


def corr_G(L: int, phi: float, i: int, ell: int) -> complex:
    """Closed form of ``G_i(l) = <g_i| C_j^dag^2 C_{j+l-1}^2 |g_i>``.

    ``l = 1`` is the on-site value ``<C^dag^2 C^2>``; ``l >= 2`` separates the
    two sites by ``l - 2`` intermediate sites.  The value does not depend on
    ``j``.
    """
    _check_l(L, ell)
    x2 = math.exp(-4.0 * phi / 3.0)
    b0 = site_base(phi, 0).real
    D = sector_factor(i, L, phi)
    if ell == 1:
        s = sum(W ** ((k * (2 - i)) % 3) * _pow(_r(phi, k), L - 1) for k in range(3))
        return complex(x2 * s / b0 / D)
    s = sum(
        W ** ((k * (2 - i)) % 3) * _pow(_r(phi, k - 1), ell - 2) * _pow(_r(phi, k), L - ell)
        for k in range(3)
    )
    return complex(x2 * s / (b0 * b0) / D)


_C2 = np.array([[0, 0, 1], [0, 0, 0], [0, 0, 0]], dtype=complex)  # |0><2|
_W2N = np.diag([1.0, W * W, W])  # omega**(2N)
_WMN = np.diag([1.0, np.conj(W), W])  # omega**(-N)
_CD = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=complex)  # c^dag


def corr_G_numeric(
    L: int,
    phi: float,
    i: int,
    ell: int | Sequence[int],
    *,
    method: str = "auto",
    start: int = 1,
    dps: int | None = None,
) -> complex | np.ndarray:
    """``<g_i| C_start^dag^2 C_{start+l-1}^2 |g_i>`` evaluated numerically.

    Parameters
    ----------
    method : {"auto", "vector", "mps"}
        Dense-vector evaluation with the full string operators, or MPS
        contraction.  ``auto`` picks the vector path for ``L <= 9``.
    start : int
        First site ``j`` (vector path only; translation invariance makes the
        MPS path use ``j = 1``).
    dps : int, optional
        Decimal digits for high-precision MPS contraction.
    """
    scalar = np.isscalar(ell)
    ells = [int(ell)] if scalar else [int(e) for e in ell]
    for e in ells:
        _check_l(L - start + 1, e)
    if method == "auto":
        method = "vector" if L <= 9 else "mps"
    if method == "vector":
        v = build_gs_vector(L, phi, i).full_vector()
        Cj = build_fock_annihilator(L, start)
        left = Cj.H @ Cj.H
        out = []
        for e in ells:
            Cl = build_fock_annihilator(L, start + e - 1)
            out.append(complex(np.vdot(v, left @ (Cl @ (Cl @ v)))))
        res = np.array(out)
    elif method == "mps":
        if start != 1:
            raise ValueError("the MPS path evaluates correlators from site 1")
        m = build_gs_mps(L, phi, i)
        # C_1^dag^2 C_l^2 = [c^dag^2]_1 [omega^{2N}]_{1<k<l} [c^2]_l  (for l > 1)
        res = two_point_profile_cached(m, _C2.conj().T, _W2N, _C2, ells, dps)
    else:
        raise ValueError(f"unknown method {method!r}")
    return complex(res[0]) if scalar else res


def two_point_profile_cached(m, first, string, last, ells, dps):
    from .mps import two_point_profile

    return two_point_profile(m, m, first=first, string=string, last=last, positions=ells, dps=dps)


# ---------------------------------------------------------------------------
# F_i(l) = <g_i| C_l^dag |g_{i-1}>
# ---------------------------------------------------------------------------


def F_func(L: int, phi: float, i: int, ell: int) -> complex:
    """Closed form of ``F_i(l) = <g_i| C_l^dag |g_{i-1}>``."""
    _check_l(L, ell)
    b0 = site_base(phi, 0).real
    s = 0j
    for n in (0, 1):
        w_n = math.exp(-phi * (1 + 2 * n) / 3.0)
        s += w_n * sum(
            W ** ((k * (n - i + 1)) % 3) * _pow(_r(phi, k - 1), ell - 1) * _pow(_r(phi, k), L - ell)
            for k in range(3)
        )
    D = sector_factor(i, L, phi) * sector_factor(i - 1, L, phi)
    return complex(s / b0 / math.sqrt(D))


def F_left_asymptote(phi: float, i: int, ell: int) -> complex:
    """``L - l >> xi`` limit: ``(e^{-phi/3} + e^{-phi}) conj(r_1)**(l-1) / base_0``."""
    b0 = site_base(phi, 0).real
    return complex((math.exp(-phi / 3.0) + math.exp(-phi)) * _pow(_r(phi, 2), ell - 1) / b0)


def F_right_asymptote(L: int, phi: float, i: int, ell: int) -> complex:
    """``l >> xi`` limit: ``sum_n e^{-phi(1+2n)/3} omega**(n-i+1) r_1**(L-l) / base_0``."""
    b0 = site_base(phi, 0).real
    s = sum(math.exp(-phi * (1 + 2 * n) / 3.0) * W ** ((n - i + 1) % 3) for n in (0, 1))
    return complex(s * _pow(_r(phi, 1), L - ell) / b0)


def F_numeric(
    L: int,
    phi: float,
    i: int,
    ell: int | Sequence[int],
    *,
    method: str = "auto",
    dps: int | None = None,
) -> complex | np.ndarray:
    """``<g_i| C_l^dag |g_{i-1}>`` from vectors or MPS contraction."""
    scalar = np.isscalar(ell)
    ells = [int(ell)] if scalar else [int(e) for e in ell]
    for e in ells:
        _check_l(L, e)
    if method == "auto":
        method = "vector" if L <= 9 else "mps"
    ip = (i - 1) % 3
    if method == "vector":
        bra = build_gs_vector(L, phi, i).full_vector()
        ket = build_gs_vector(L, phi, ip).full_vector()
        res = np.array([complex(np.vdot(bra, build_fock_annihilator(L, e).H @ ket)) for e in ells])
    elif method == "mps":
        from .mps import two_point_profile

        res = two_point_profile(
            build_gs_mps(L, phi, i),
            build_gs_mps(L, phi, ip),
            first=None,
            string=_WMN,
            last=_CD,
            positions=ells,
            dps=dps,
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    return complex(res[0]) if scalar else res


# ---------------------------------------------------------------------------
# Entanglement
# ---------------------------------------------------------------------------


def ent_spectrum(L: int, phi: float, i: int, ell: int) -> tuple[np.ndarray, float]:
    """Reduced-density eigenvalues ``lambda_p`` (``p = 0,1,2``) for the cut after site ``l``.

    ``lambda_p = N_{l,p} N_{L-l,i-p} / N_{L,i}``; returns ``(lambda, entropy)``.
    """
    _check_l(L, ell, L - 1)
    lam = np.array(
        [sector_factor(p, ell, phi) * sector_factor(i - p, L - ell, phi) for p in range(3)]
    ) / (3.0 * sector_factor(i, L, phi))
    return lam, entropy(lam)


def entropy(lam: Iterable[float]) -> float:
    """Von Neumann entropy ``-sum lambda ln lambda`` (zeros skipped)."""
    lam = np.asarray(list(lam), dtype=float)
    lam = lam[lam > 0]
    return float(-(lam * np.log(lam)).sum())


def ent_spectrum_numeric(L: int, phi: float, i: int, ell: int) -> tuple[np.ndarray, float]:
    """Schmidt spectrum of the dense vector across the cut after site ``l``.

    Returns the three largest squared Schmidt values (labelled by the charge
    of the left block, which is a good quantum number of the Schmidt vectors)
    and the entropy of the full spectrum.
    """
    _check_l(L, ell, L - 1)
    v = build_gs_vector(L, phi, i).full_vector().reshape(3**ell, 3 ** (L - ell))
    from .algebra import total_number

    qL = total_number(ell) % 3
    lam = np.array([np.linalg.norm(v[qL == p]) ** 2 for p in range(3)])
    s = np.linalg.svd(v, compute_uv=False) ** 2
    return lam, entropy(s)


def theta(L: int, phi: float) -> float:
    """Phase ``theta_{L,phi}`` of ``A(L,phi,1) / A(L,phi,0)``."""
    return norm_constants(L, phi).theta


# ---------------------------------------------------------------------------
# Decay fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line ``log|y| = intercept + slope * x``."""

    slope: float
    intercept: float
    r2: float
    n: int

    @property
    def length(self) -> float:
        """Decay length ``-1/slope``."""
        return -1.0 / self.slope if self.slope != 0 else math.inf


def decay_window(L: int, xi_value: float) -> tuple[int, int]:
    """Fit window ``[max(5, 3 xi), L/2 - 2]`` for correlator decay fits."""
    lo = max(5, int(math.ceil(3.0 * xi_value)))
    hi = L // 2 - 2
    if hi <= lo:
        raise ValueError(f"empty fit window [{lo}, {hi}] for L={L}, xi={xi_value:.3g}")
    return lo, hi


def fit_exponential_decay(x: Sequence[float], y: Sequence[complex]) -> DecayFit:
    """Fit ``log|y|`` linearly in ``x``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        ly = np.log(np.abs(np.asarray(y)))
    if not np.all(np.isfinite(ly)):
        raise ValueError("cannot fit zeros or non-finite values")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ np.array([slope, icpt])
    ss_res = float(((ly - pred) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(icpt), r2, len(x))


def fitted_xi(L: int, phi: float, *, i: int = 0, dps: int | None = 80) -> DecayFit:
    """Fit the decay of ``|G_i(l)|`` from MPS contraction over :func:`decay_window`.

    ``G_i(l)`` decays as ``exp(-(l-2)/xi)``; the returned fit's ``length`` is
    the estimated correlation length.
    """
    lo, hi = decay_window(L, xi(phi))
    ells = list(range(lo, hi + 1))
    G = corr_G_numeric(L, phi, i, ells, method="mps", dps=dps)
    return fit_exponential_decay(ells, G)


# ---------------------------------------------------------------------------
# Bundle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Observables:
    """All closed-form observables of ``|g_{i,phi}>`` at one ``(L, phi, i)``."""

    L: int
    phi: float
    i: int
    xi: float
    n_of_phi: float
    density: float
    G: np.ndarray
    F: np.ndarray
    ent_spectrum: np.ndarray
    entropy: np.ndarray
    theta: float


def observables(L: int, phi: float, i: int = 0) -> Observables:
    G = np.array([corr_G(L, phi, i, e) for e in range(1, L + 1)])
    F = np.array([F_func(L, phi, i, e) for e in range(1, L + 1)])
    ent = [ent_spectrum(L, phi, i, e) for e in range(1, L)]
    lam = np.array([e[0] for e in ent]).reshape(-1, 3)
    S = np.array([e[1] for e in ent])
    return Observables(L, float(phi), i, xi(phi), n_of_phi(phi), density(L, phi, i), G, F, lam, S, theta(L, phi))
