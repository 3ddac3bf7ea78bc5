"""Scalar functions of the modulus that govern penalized pinned elasticae.

    f(q) = (4q^4 - 5q^2 + 1) K(q) + (-8q^4 + 8q^2 - 1) E(q)
    g(q) = 8 (2E(q) - K(q))^2 (2q^2 - 1)

A nontrivial mode-n critical point with penalty lambda and gap ell has modulus
q solving n^2 g(q) = lambda ell^2.  g increases on (1/sqrt2, q_hat], decreases
on [q_hat, q_star] and increases again on [q_star, 1), so the equation is
inverted separately on each of those three branches.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

from .elliptic import Q_MAX, ellip_E, ellip_E_prime, ellip_K, ellip_K_prime
from .errors import BranchInfeasibleError, DomainError, SingularPointError

Q_MIN = 1.0 / math.sqrt(2.0)
_XTOL = 1e-14
_STAR_GUARD = 1e-8
_LAMBDA_HAT_RTOL = 1e-12


def _KE(q):
    return ellip_K(q), ellip_E(q)


def _in_range(q, lo, hi, name, lo_open=False, hi_open=False):
    q = float(q)
    bad = (q < lo or q > hi or (lo_open and q == lo) or (hi_open and q == hi)
           or math.isnan(q))
    if bad:
        lb = "(" if lo_open else "["
        rb = ")" if hi_open else "]"
        raise DomainError(f"{name}: q must lie in {lb}{lo:.17g}, {hi:.17g}{rb}, got {q!r}")
    return q


def two_e_minus_k(q):
    """Q(q) = 2E(q) - K(q); decreasing from Q(0) = pi/2, single root q_star."""
    K, E = _KE(q)
    return 2.0 * E - K


def eval_f(q):
    q = _in_range(q, Q_MIN, Q_MAX, "f")
    K, E = _KE(q)
    q2 = q * q
    return (4 * q2 * q2 - 5 * q2 + 1) * K + (-8 * q2 * q2 + 8 * q2 - 1) * E


def eval_f_prime(q):
    """f'(q) = (20q^3 - 13q) K + 20q(1 - 2q^2) E."""
    q = _in_range(q, Q_MIN, Q_MAX, "f'")
    K, E = _KE(q)
    return (20 * q**3 - 13 * q) * K + 20 * q * (1 - 2 * q * q) * E


def eval_g(q):
    q = _in_range(q, Q_MIN, Q_MAX, "g")
    K, E = _KE(q)
    return 8.0 * (2 * E - K) ** 2 * (2 * q * q - 1)


def eval_g_prime(q):
    """g'(q) = 16 (2E - K) f / (q (1 - q^2))."""
    q = _in_range(q, Q_MIN, Q_MAX, "g'", lo_open=True)
    K, E = _KE(q)
    return 16.0 / (q * (1 - q * q)) * (2 * E - K) * eval_f(q)


def eval_g_second(q):
    """Second derivative of g, by differentiating the closed form of g'."""
    q = _in_range(q, Q_MIN, Q_MAX, "g''", lo_open=True)
    K, E = _KE(q)
    w = 16.0 / (q * (1 - q * q))
    w_prime = -16.0 * (1 - 3 * q * q) / (q * (1 - q * q)) ** 2
    Q = 2 * E - K
    Q_prime = 2 * ellip_E_prime(q) - ellip_K_prime(q)
    f = eval_f(q)
    return w_prime * Q * f + w * (Q_prime * f + Q * eval_f_prime(q))


def eval_I(q):
    """I(q) = K^2/q + E^2/(q(1-q^2)) - 2KE/q, positive on (0, 1)."""
    q = _in_range(q, 0.0, Q_MAX, "I", lo_open=True)
    K, E = _KE(q)
    return K * K / q + E * E / (q * (1 - q * q)) - 2 * K * E / q


def _zeta(q, K, E):
    return (4 * q * q - 3) * K + 2 * E


def eval_e(q):
    """e(q) = ((4q^2-3)K + 2E) / ((2q^2-1)|2E-K|); the energy is lambda*ell*e(q)."""
    q = _in_range(q, Q_MIN, Q_MAX, "e", lo_open=True)
    _reject_star(q, "e")
    K, E = _KE(q)
    return _zeta(q, K, E) / ((2 * q * q - 1) * abs(2 * E - K))


def eval_e_prime(q):
    """e'(q) = -4 f K' / ((2q^2-1)^2 (2E-K)|2E-K|)."""
    q = _in_range(q, Q_MIN, Q_MAX, "e'", lo_open=True)
    _reject_star(q, "e'")
    K, E = _KE(q)
    Q = 2 * E - K
    return -4.0 * eval_f(q) * ellip_K_prime(q) / ((2 * q * q - 1) ** 2 * Q * abs(Q))


def eval_h(q):
    """h(q) = ((4q^2-3)K + 2E) / sqrt(2q^2-1); the energy is 2 sqrt(2) n sqrt(lambda) h(q)."""
    q = _in_range(q, Q_MIN, Q_MAX, "h", lo_open=True)
    K, E = _KE(q)
    return _zeta(q, K, E) / math.sqrt(2 * q * q - 1)


def eval_h_prime(q):
    """h'(q) = -f / ((2q^2-1)^{3/2} q (1-q^2))."""
    q = _in_range(q, Q_MIN, Q_MAX, "h'", lo_open=True)
    return -eval_f(q) / ((2 * q * q - 1) ** 1.5 * q * (1 - q * q))


def _reject_star(q, name):
    if abs(q - constants().q_star) < _STAR_GUARD:
        raise SingularPointError(f"{name} is singular at q_star (|2E-K| = 0); got q={q!r}")


def bisect(fn, lo, hi, xtol=_XTOL, maxiter=200):
    """Root of a continuous fn with a sign change on [lo, hi].

    Returns the endpoint of the final bracket with the smaller |fn|.
    """
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo!r}, {hi!r}]: f = {flo!r}, {fhi!r}")
    for _ in range(maxiter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return lo if abs(flo) <= abs(fhi) else hi


@dataclass(frozen=True)
class Constants:
    q_star: float
    q_hat: float
    lambda_hat: float


@lru_cache(maxsize=1)
def constants():
    return find_constants()


def find_constants():
    """Locate q_star (root of 2E-K), q_hat (root of f) and lambda_hat = g(q_hat)."""
    q_star = bisect(two_e_minus_k, 0.8, 0.99)
    q_hat = bisect(eval_f, Q_MIN, q_star)
    return Constants(q_star=q_star, q_hat=q_hat, lambda_hat=eval_g(q_hat))


class Branch(enum.Enum):
    B1 = "B1"  # (1/sqrt2, q_hat], g increasing: shorter arcs
    B2 = "B2"  # [q_hat, q_star), g decreasing: longer arcs
    B3 = "B3"  # (q_star, 1), g increasing: loops


@dataclass(frozen=True)
class BranchedModulus:
    q: float
    branch: Branch

    def __float__(self):
        return self.q


def _polish(q, c, lo, hi):
    """One Newton step on g(q) = c, kept only if it stays in [lo, hi] and helps."""
    try:
        d = eval_g_prime(q)
    except DomainError:
        return q
    if d == 0.0:
        return q
    q_new = q - (eval_g(q) - c) / d
    if lo <= q_new <= hi and abs(eval_g(q_new) - c) < abs(eval_g(q) - c):
        return q_new
    return q


def invert_g(c, branch):
    """Solve g(q) = c on the given branch (B1, B2 need 0 < c <= lambda_hat)."""
    branch = Branch(branch)
    c = float(c)
    if not c > 0.0 or math.isinf(c):
        raise DomainError(f"invert_g: c must be a positive finite number, got {c!r}")
    k = constants()
    if branch in (Branch.B1, Branch.B2):
        if abs(c - k.lambda_hat) <= _LAMBDA_HAT_RTOL * k.lambda_hat:
            return BranchedModulus(k.q_hat, branch)
        if c > k.lambda_hat:
            raise BranchInfeasibleError(
                f"g(q) = {c!r} has no solution on {branch.value}: c exceeds lambda_hat = {k.lambda_hat!r}")
        lo, hi = (Q_MIN, k.q_hat) if branch is Branch.B1 else (k.q_hat, k.q_star)
    else:
        lo = k.q_star
        hi = k.q_star
        step = 1.0 - k.q_star
        while eval_g(hi) <= c:
            step *= 0.5
            hi = 1.0 - step
            if step < 1e-12:
                hi = Q_MAX
                if eval_g(hi) <= c:
                    raise DomainError(f"invert_g: c = {c!r} too large, q would exceed 1 - 1e-12")
                break
    q = bisect(lambda x: eval_g(x) - c, lo, hi)
    return BranchedModulus(_polish(q, c, lo, hi), branch)
