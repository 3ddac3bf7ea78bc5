"""Energies of critical points and of the wavelike family, plus the energy comparisons.

For a mode-n critical point with modulus q and rate alpha:

    B = 8 n alpha (q^2 K - K + E),   L = 2 n K / alpha,
    E_lambda = (8 n^2 / ell) |2E - K| ((4q^2 - 3) K + 2E)
             = lambda ell e(q) = 2 sqrt(2) n sqrt(lambda) h(q).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .classify import (Family, ProblemParams, _is_merged, build_critical_point,
                       enumerate_critical_points, mode_floor)
from .curves import PlanarCurve, sample_curve, wavelike_params
from .elliptic import ellip_E, ellip_K
from .errors import ConsistencyError, DomainError, InfeasibleModeError
from .moduli import Branch, bisect, constants, eval_e, eval_g, eval_h, eval_I, invert_g

_CONSISTENCY_RTOL = 1e-10


@dataclass(frozen=True)
class EnergyBreakdown:
    bending: float
    length: float
    total: float

    @classmethod
    def of(cls, bending, length, lam):
        return cls(float(bending), float(length), float(bending + lam * length))


def _check_consistent(cp, p):
    if not cp.nontrivial:
        if abs(cp.length - p.ell) > 1e-12 * p.ell:
            raise ConsistencyError(f"segment length {cp.length!r} differs from ell = {p.ell!r}")
        return
    lhs = cp.n**2 * eval_g(cp.q)
    if abs(lhs - p.mu) > _CONSISTENCY_RTOL * p.mu:
        raise ConsistencyError(
            f"{cp.id}: n^2 g(q) = {lhs!r} but lambda*ell^2 = {p.mu!r}")


def energy_closed_form(cp, p=None):
    p = cp.params if p is None else p
    _check_consistent(cp, p)
    if not cp.nontrivial:
        return EnergyBreakdown.of(0.0, p.ell, p.lam)
    K, E = ellip_K(cp.q), ellip_E(cp.q)
    bending = 8.0 * cp.n * cp.alpha * (cp.q**2 * K - K + E)
    return EnergyBreakdown.of(bending, cp.length, p.lam)


def energy_representations(cp):
    """The three closed forms of E_lambda: direct, lambda ell e(q), 2 sqrt2 n sqrt(lambda) h(q)."""
    p = cp.params
    direct = cp.energy
    return direct, p.lam * p.ell * eval_e(cp.q), 2.0 * math.sqrt(2.0) * cp.n * math.sqrt(p.lam) * eval_h(cp.q)


def energy_quadrature(curve: PlanarCurve, lam):
    """Composite Simpson over arclength samples of k^2 and of the unit tangent's norm."""
    s = curve.s
    bending = simpson(curve.k**2, x=s)
    speed = np.hypot(np.cos(curve.theta), np.sin(curve.theta))
    length = simpson(speed, x=s)
    return EnergyBreakdown.of(bending, length, lam)


def critical_point_quadrature(cp, N=8192):
    return energy_quadrature(sample_curve(cp, N), cp.params.lam)


# -- wavelike family ---------------------------------------------------------

def wavelike_energy(q, lam, ell):
    """E_lambda of gamma_w(., q): B = (16/ell)(E - (1-q^2)K)|2E-K|, L = ell K / |2E-K|."""
    alpha, length, _ = wavelike_params(q, ell)
    K, E = ellip_K(q), ellip_E(q)
    bending = 16.0 / ell * (E - (1 - q * q) * K) * abs(2 * E - K)
    return EnergyBreakdown.of(bending, length, lam)


def wavelike_energy_derivative(q, lam, ell):
    """d/dq E_lambda[gamma_w(., q)].

    Equal to (16/ell)(2q^2-1)(-1 + lambda ell^2/g) I(q) below q_star.  Above
    q_star both B and L carry the factor |2E-K| = K - 2E, so the same
    expression appears with the opposite sign.
    """
    wavelike_params(q, ell)
    K, E = ellip_K(q), ellip_E(q)
    Q = 2 * E - K
    core = (1 - 2 * q * q) + lam * ell**2 / (8.0 * Q * Q)
    return math.copysign(1.0, Q) * 16.0 / ell * eval_I(q) * core


# -- comparisons ---------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    rule: str
    statement: str
    margin: float
    holds: bool
    equality_case: bool = False


@dataclass
class ComparisonReport:
    params: ProblemParams
    ordering: list
    checks: list = field(default_factory=list)
    minimal_nontrivial: str | None = None

    @property
    def all_hold(self):
        return all(c.holds for c in self.checks)

    def as_dict(self):
        return {
            "lambda": self.params.lam,
            "ell": self.params.ell,
            "ordering": [{"id": i, "energy": e} for i, e in self.ordering],
            "minimal_nontrivial": self.minimal_nontrivial,
            "checks": [
                {"rule": c.rule, "statement": c.statement, "margin": c.margin,
                 "holds": c.holds, "equality_case": c.equality_case}
                for c in self.checks
            ],
        }


def single_term_comparison(p):
    """B_sarc1 > B_larc1 and L_sarc1 < L_larc1; needs lambda ell^2 < lambda_hat."""
    lh = constants().lambda_hat
    if p.mu >= lh or _is_merged(p, 1):
        raise InfeasibleModeError(
            f"single-term comparison needs lambda*ell^2 < lambda_hat = {lh!r}, got {p.mu!r}")
    s = energy_closed_form(build_critical_point(p, Family.SHORTER_ARC, 1))
    l = energy_closed_form(build_critical_point(p, Family.LONGER_ARC, 1))
    checks = [
        Check("single-term", "B[sarc1] > B[larc1]", s.bending - l.bending, s.bending > l.bending),
        Check("single-term", "L[sarc1] < L[larc1]", l.length - s.length, s.length < l.length),
    ]
    return {"sarc1": s, "larc1": l, "checks": checks}


def _margin_check(rule, statement, margin):
    return Check(rule, statement, float(margin), bool(margin > 0))


def compare_all(p, n_max):
    """Evaluate every energy comparison that applies to the catalogue up to mode n_max."""
    if not (isinstance(n_max, int) and n_max >= 2):
        raise DomainError(f"compare_all needs n_max >= 2, got {n_max!r}")
    cps = enumerate_critical_points(p, n_max)
    energy = {cp.id: cp.energy for cp in cps}
    report = ComparisonReport(p, [(cp.id, cp.energy) for cp in cps])
    checks = report.checks

    for fam in (Family.SHORTER_ARC, Family.LONGER_ARC, Family.LOOP):
        for n in range(1, n_max):
            a, b = f"{fam.value}{n}", f"{fam.value}{n + 1}"
            if a in energy and b in energy:
                checks.append(_margin_check("mode-monotonicity", f"E[{a}] < E[{b}]",
                                            energy[b] - energy[a]))

    floor = mode_floor(p)
    for n in range(max(1, floor), n_max + 1):
        statement = f"E[larc{n}] <= E[sarc{n}]"
        if _is_merged(p, n):
            checks.append(Check("larc-vs-sarc", statement, 0.0, True, equality_case=True))
        else:
            margin = energy[f"sarc{n}"] - energy[f"larc{n}"]
            rel = margin / energy[f"sarc{n}"]
            checks.append(Check("larc-vs-sarc", statement, float(margin), bool(rel > 1e-10)))

    if "larc1" in energy:
        checks.append(_margin_check("larc1-vs-loop1", "E[larc1] < E[loop1]",
                                    energy["loop1"] - energy["larc1"]))
    for n in range(2, n_max + 1):
        if f"larc{n}" in energy:
            checks.append(_margin_check("larcn-vs-loop1", f"E[larc{n}] > E[loop1]",
                                        energy[f"larc{n}"] - energy["loop1"]))

    nontrivial = [cp for cp in cps if cp.nontrivial]
    report.minimal_nontrivial = nontrivial[0].id
    return report


def energy_table(p, n_max):
    """Rows (family, n, q, alpha, length, bending, total) for every enumerated point."""
    rows = []
    for cp in enumerate_critical_points(p, n_max):
        eb = energy_closed_form(cp)
        rows.append({"id": cp.id, "family": cp.family.value, "n": cp.n, "q": cp.q,
                     "alpha": cp.alpha, "length": eb.length, "bending": eb.bending,
                     "total": eb.total})
    return rows


def energy_table_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["family", "n", "q", "alpha", "length", "bending", "total"]
    w.writerow(cols)
    for r in rows:
        w.writerow([r[c] if isinstance(r[c], (str, int)) or r[c] is None else f"{r[c]:.17g}"
                    for c in cols])
    return buf.getvalue()


def psi(ell, n, lam):
    """Psi_{ell,n}(lambda) = n h(q2(lambda ell^2 / n^2)) - h(q3(lambda ell^2))."""
    if not (isinstance(n, int) and n >= 2):
        raise DomainError(f"psi needs an integer n >= 2, got {n!r}")
    ell, lam = float(ell), float(lam)
    if not ell > 0:
        raise DomainError(f"ell must be positive, got {ell!r}")
    upper = n * n * constants().lambda_hat / ell**2
    if not (0.0 < lam <= upper * (1 + 1e-12)):
        raise DomainError(f"psi needs 0 < lambda <= n^2 lambda_hat / ell^2 = {upper!r}, got {lam!r}")
    mu = lam * ell**2
    q2 = invert_g(min(mu / n**2, constants().lambda_hat), Branch.B2).q
    q3 = invert_g(mu, Branch.B3).q
    return n * eval_h(q2) - eval_h(q3)


def sarc_minus_loop(lam, ell):
    p = ProblemParams(lam, ell)
    return (build_critical_point(p, Family.SHORTER_ARC, 1).energy
            - build_critical_point(p, Family.LOOP, 1).energy)


def crossover_lambda(ell):
    """Unique lambda in (0, lambda_hat / ell^2) where E[sarc1] = E[loop1]."""
    ell = float(ell)
    if not (math.isfinite(ell) and ell > 0):
        raise DomainError(f"ell must be a positive finite number, got {ell!r}")
    hi = constants().lambda_hat / ell**2
    lo = 1e-6 * hi
    return bisect(lambda lam: sarc_minus_loop(lam, ell), lo, hi, xtol=1e-15 * hi)


def loop_threshold(p):
    """C_{lambda,ell}: energy of the one-mode loop."""
    return energy_closed_form(build_critical_point(p, Family.LOOP, 1)).total
