"""Enumeration of the critical points of E_lambda = B + lambda L on the pinned class.

Besides the straight segment, every critical point is a mode-n shorter arc,
longer arc or loop, whose modulus is q_i(lambda ell^2 / n^2) on branch
B1, B2 or B3 respectively.  Arcs exist only for n >= n_floor =
ceil(sqrt(lambda ell^2 / lambda_hat)); loops exist for every n >= 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .elliptic import ellip_E, ellip_K
from .errors import DomainError, InfeasibleModeError
from .moduli import Branch, constants, invert_g

_TIE_RTOL = 1e-12


class Family(enum.Enum):
    SEGMENT = "segment"
    SHORTER_ARC = "sarc"
    LONGER_ARC = "larc"
    LOOP = "loop"


_BRANCH = {Family.SHORTER_ARC: Branch.B1, Family.LONGER_ARC: Branch.B2, Family.LOOP: Branch.B3}


@dataclass(frozen=True)
class ProblemParams:
    lam: float
    ell: float

    def __post_init__(self):
        for name in ("lam", "ell"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be a positive finite number, got {v!r}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "ell", float(self.ell))

    @property
    def mu(self):
        """Scale-free driver lambda * ell^2."""
        return self.lam * self.ell**2

    def scaled(self, s):
        """Params (lambda / s^2, s ell): same mu, every curve scaled by s."""
        return ProblemParams(self.lam / s**2, self.ell * s)


@dataclass(frozen=True)
class CriticalPoint:
    family: Family
    n: int
    params: ProblemParams
    q: float | None = None
    alpha: float | None = None
    length: float = 0.0
    sigma: int | None = None
    merged: bool = field(default=False, compare=False)

    @property
    def id(self):
        if self.family is Family.SEGMENT:
            return "segment"
        return f"{self.family.value}{self.n}"

    @property
    def nontrivial(self):
        return self.family is not Family.SEGMENT

    @property
    def energy(self):
        """Closed-form E_lambda, (8n^2/ell)|2E-K|((4q^2-3)K + 2E); lambda*ell for the segment."""
        p = self.params
        if not self.nontrivial:
            return p.lam * p.ell
        K, E = ellip_K(self.q), ellip_E(self.q)
        return 8.0 * self.n**2 / p.ell * abs(2 * E - K) * ((4 * self.q**2 - 3) * K + 2 * E)

    def as_dict(self):
        return {
            "id": self.id,
            "family": self.family.value,
            "n": self.n,
            "q": self.q,
            "alpha": self.alpha,
            "length": self.length,
            "sigma": self.sigma,
            "merged": self.merged,
        }


def _near_integer(x):
    r = round(x)
    return r if abs(x - r) <= _TIE_RTOL * max(1.0, abs(x)) else None


def mode_floor(p):
    """n_floor = ceil(sqrt(lambda ell^2 / lambda_hat)); ties within 1e-12 count as exact."""
    x = math.sqrt(p.mu / constants().lambda_hat)
    r = _near_integer(x)
    return max(1, r) if r is not None else max(1, math.ceil(x))


def _is_merged(p, n):
    lh = constants().lambda_hat
    return abs(p.mu / n**2 - lh) <= _TIE_RTOL * lh


def segment(p):
    return CriticalPoint(Family.SEGMENT, 1, p, length=p.ell)


def build_critical_point(p, family, n=1):
    """Construct the mode-n critical point of the requested family."""
    family = Family(family)
    if family is Family.SEGMENT:
        return segment(p)
    if not (isinstance(n, int) and n >= 1):
        raise DomainError(f"mode n must be a positive integer, got {n!r}")
    if family is not Family.LOOP and n < mode_floor(p):
        raise InfeasibleModeError(
            f"{family.value}{n} does not exist: lambda*ell^2 = {p.mu!r} requires n >= {mode_floor(p)}")
    q = invert_g(p.mu / n**2, _BRANCH[family]).q
    K, E = ellip_K(q), ellip_E(q)
    if family is Family.LOOP:
        alpha = 2.0 * n / p.ell * (K - 2 * E)
        sigma = 1
    else:
        alpha = 2.0 * n / p.ell * (2 * E - K)
        sigma = -1
    merged = family is not Family.LOOP and _is_merged(p, n)
    return CriticalPoint(family, n, p, q=q, alpha=alpha, length=2.0 * n * K / alpha,
                         sigma=sigma, merged=merged)


def enumerate_critical_points(p, n_max):
    """All critical points with mode <= n_max, sorted by E_lambda ascending.

    When lambda ell^2 / n^2 equals lambda_hat the shorter and longer arc of that
    mode coincide and only a single (longer-arc, merged) entry is listed.
    """
    if not (isinstance(n_max, int) and n_max >= 1):
        raise DomainError(f"n_max must be a positive integer, got {n_max!r}")
    out = [segment(p)]
    floor = mode_floor(p)
    for n in range(1, n_max + 1):
        if n >= floor:
            if not _is_merged(p, n):
                out.append(build_critical_point(p, Family.SHORTER_ARC, n))
            out.append(build_critical_point(p, Family.LONGER_ARC, n))
        out.append(build_critical_point(p, Family.LOOP, n))
    order = {Family.SEGMENT: 0, Family.LONGER_ARC: 1, Family.SHORTER_ARC: 2, Family.LOOP: 3}
    return sorted(out, key=lambda cp: (cp.energy, cp.n, order[cp.family]))
