"""Elliptic integrals and Jacobi elliptic functions in double precision.

Every function takes the *modulus* ``q`` (not the parameter ``m = q**2``), so
``ellip_K(q)`` equals ``scipy.special.ellipk(q**2)``.

Complete integrals use the arithmetic-geometric mean; incomplete integrals and
the amplitude use the descending Landen (AGM) sequence with reduction by the
real quarter period, so any real argument is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

Q_MAX = 1.0 - 1e-12
_AGM_RTOL = 1e-15
_AGM_MAXITER = 64


class Modulus(float):
    """A float constrained to the half-open interval [0, 1)."""

    def __new__(cls, q):
        q = float(q)
        if not (0.0 <= q < 1.0):
            raise DomainError(f"modulus must lie in [0, 1), got {q!r}")
        return super().__new__(cls, q)


def _check_q(q, allow_one=False):
    q = float(q)
    if np.isnan(q) or q < 0.0:
        raise DomainError(f"modulus must be >= 0, got {q!r}")
    if allow_one:
        if q > 1.0:
            raise DomainError(f"modulus must be <= 1, got {q!r}")
    elif q > Q_MAX:
        raise DomainError(f"modulus must be <= 1 - 1e-12 (K diverges at 1), got {q!r}")
    return q


@lru_cache(maxsize=4096)
def _agm_sequence(q):
    """Return arrays (a_n, b_n, c_n), n = 0..N, of the AGM started at (1, q')."""
    a, b, c = 1.0, np.sqrt((1.0 - q) * (1.0 + q)), q
    seq_a, seq_b, seq_c = [a], [b], [c]
    for _ in range(_AGM_MAXITER):
        if abs(a - b) < _AGM_RTOL * a:
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        seq_a.append(a)
        seq_b.append(b)
        seq_c.append(c)
    return np.array(seq_a), np.array(seq_b), np.array(seq_c)


@lru_cache(maxsize=4096)
def _complete(q):
    a, _, c = _agm_sequence(q)
    K = np.pi / (2.0 * a[-1])
    weights = 2.0 ** (np.arange(len(c)) - 1.0)
    E = K * (1.0 - np.sum(weights * c * c))
    return float(K), float(E)


def ellip_K(q):
    """Complete elliptic integral of the first kind, K(q) = F(pi/2, q)."""
    return _complete(_check_q(q))[0]


def ellip_E(q):
    """Complete elliptic integral of the second kind, E(q) = E(pi/2, q), q in [0, 1]."""
    q = _check_q(q, allow_one=True)
    if q > Q_MAX:
        if q == 1.0:
            return 1.0
        # AGM still converges here; only K is unbounded.
        a, _, c = _agm_sequence(q)
        K = np.pi / (2.0 * a[-1])
        return float(K * (1.0 - np.sum(2.0 ** (np.arange(len(c)) - 1.0) * c * c)))
    return _complete(q)[1]


def _landen_phases(phi, q):
    """Descending Landen phases phi_n for |phi| <= pi/2; returns (phis, a, c)."""
    a, b, c = _agm_sequence(q)
    phis = [phi]
    for n in range(1, len(a)):
        prev = phis[-1]
        t = np.arctan(b[n - 1] / a[n - 1] * np.tan(prev))
        phis.append(prev + t + np.pi * np.round((prev - t) / np.pi))
    return phis, a, c


def _reduce_angle(x):
    j = np.round(x / np.pi)
    return j, x - j * np.pi


def ellip_F_inc(x, q):
    """Incomplete integral of the first kind F(x, q) for any real x (array-friendly)."""
    q = _check_q(q)
    x = np.asarray(x, dtype=float)
    j, r = _reduce_angle(x)
    phis, a, _ = _landen_phases(r, q)
    N = len(a) - 1
    F = phis[-1] / (2.0**N * a[-1])
    out = 2.0 * j * ellip_K(q) + F
    return out if out.ndim else float(out)


def ellip_E_inc(x, q):
    """Incomplete integral of the second kind E(x, q) for any real x (array-friendly)."""
    q = _check_q(q)
    x = np.asarray(x, dtype=float)
    j, r = _reduce_angle(x)
    phis, a, c = _landen_phases(r, q)
    N = len(a) - 1
    F = phis[-1] / (2.0**N * a[-1])
    K, E = _complete(q)
    zeta = sum(c[n] * np.sin(phis[n]) for n in range(1, N + 1)) if N else 0.0
    out = 2.0 * j * E + (E / K) * F + zeta
    return out if np.ndim(out) else float(out)


def jacobi_am(u, q):
    """Jacobi amplitude: the inverse of x -> F(x, q)."""
    q = _check_q(q)
    u = np.asarray(u, dtype=float)
    K = ellip_K(q)
    j = np.round(u / (2.0 * K))
    r = u - 2.0 * K * j
    a, _, c = _agm_sequence(q)
    N = len(a) - 1
    phi = 2.0**N * a[-1] * r
    for n in range(N, 0, -1):
        phi = 0.5 * (phi + np.arcsin(c[n] / a[n] * np.sin(phi)))
    out = j * np.pi + phi
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class JacobiTriple:
    am: object
    sn: object
    cn: object
    dn: object


def jacobi(u, q):
    """Return am, sn, cn, dn at u. sn = sin(am), cn = cos(am), dn = sqrt(1 - q^2 sn^2)."""
    am = jacobi_am(u, q)
    sn = np.sin(am)
    cn = np.cos(am)
    dn = np.sqrt(1.0 - (q * sn) ** 2)
    if np.ndim(am) == 0:
        return JacobiTriple(float(am), float(sn), float(cn), float(dn))
    return JacobiTriple(am, sn, cn, dn)


def jacobi_sn(u, q):
    return np.sin(jacobi_am(u, q))


def jacobi_cn(u, q):
    return np.cos(jacobi_am(u, q))


def jacobi_dn(u, q):
    return np.sqrt(1.0 - (q * np.sin(jacobi_am(u, q))) ** 2)


def ellip_K_prime(q):
    """dK/dq = E/(q(1-q^2)) - K/q, with the q -> 0 limit 0."""
    q = _check_q(q)
    if q == 0.0:
        return 0.0
    K, E = _complete(q)
    return E / (q * (1.0 - q * q)) - K / q


def ellip_E_prime(q):
    """dE/dq = (E - K)/q, with the q -> 0 limit 0."""
    q = _check_q(q)
    if q == 0.0:
        return 0.0
    K, E = _complete(q)
    return (E - K) / q
