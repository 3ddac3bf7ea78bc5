"""Stability verdicts for the critical points of E_lambda in the pinned class.

One-mode points are tested along the wavelike family q -> gamma_w(., q), on
which E_lambda is stationary exactly at q_1, q_2, q_3 of lambda ell^2.  At
such a point the second derivative along the family reduces to

    -sgn(2E - K) (16/ell) (2q^2 - 1) I(q) lambda ell^2 g'(q) / g(q)^2.

Below q_star this has the sign of -g'(q).  Above q_star the family's length
and bending energy both carry |2E - K| = K - 2E, which reverses the sign, so
the loop is a local minimum along the family rather than a maximum.  Its
instability comes from the fixed-length argument instead: a local minimizer
of E_lambda would also minimize B among curves of its own length, and the
one-mode loop does not.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .classify import Family, _is_merged, build_critical_point, enumerate_critical_points
from .elliptic import ellip_E, ellip_K
from .errors import ModeError, NotApplicableError
from .moduli import constants, eval_g, eval_g_prime, eval_g_second, eval_I

_HAT_RTOL = 1e-10


class Verdict(enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    DEGENERATE_UNSTABLE = "DegenerateUnstable"


class Mechanism(enum.Enum):
    GLOBAL_MIN = "GlobalMin"
    Q_FAMILY_SECOND_DERIVATIVE = "QFamilySecondDerivative"
    THIRD_DERIVATIVE = "ThirdDerivative"
    HIGHER_MODE_RIGIDITY = "HigherModeRigidity"
    FIXED_LENGTH_INSTABILITY = "FixedLengthInstability"


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    mechanism: Mechanism
    sign_value: float

    @property
    def stable(self):
        return self.verdict is Verdict.STABLE

    def as_dict(self):
        return {"verdict": self.verdict.value, "mechanism": self.mechanism.value,
                "sign_value": self.sign_value}


def _near_hat(p):
    lh = constants().lambda_hat
    return abs(p.mu - lh) <= _HAT_RTOL * lh


def second_derivative_sign(cp, p=None):
    """Signed d^2/dq^2 E_lambda[gamma_w(., q)] at the critical point's modulus.

    Exactly zero for the merged arc at lambda ell^2 = lambda_hat.
    """
    p = cp.params if p is None else p
    if not cp.nontrivial:
        raise ModeError("the segment is not a member of the wavelike family")
    if cp.n != 1:
        raise ModeError(f"the wavelike-family rule applies to n = 1 only, got {cp.id}")
    if cp.family is not Family.LOOP and (cp.merged or _is_merged(p, 1)):
        return 0.0
    q = cp.q
    Q = 2 * ellip_E(q) - ellip_K(q)
    g = eval_g(q)
    value = -16.0 / p.ell * (2 * q * q - 1) * eval_I(q) * p.mu * eval_g_prime(q) / g**2
    return math.copysign(1.0, Q) * value


def degenerate_third_derivative(p):
    """d^3/dq^3 E_lambda[gamma_w(., q)] at q_hat when lambda ell^2 = lambda_hat."""
    if not _near_hat(p):
        raise NotApplicableError(
            f"third-derivative test needs lambda*ell^2 = lambda_hat = {constants().lambda_hat!r}, got {p.mu!r}")
    q = constants().q_hat
    g = eval_g(q)
    return -16.0 / p.ell * (2 * q * q - 1) * eval_I(q) * p.mu * eval_g_second(q) / g**2


def stability_verdict(cp, p=None):
    p = cp.params if p is None else p
    if not cp.nontrivial:
        return StabilityVerdict(Verdict.STABLE, Mechanism.GLOBAL_MIN, 0.0)
    if cp.n >= 2:
        # diagnostic: energy excess over the one-mode loop, positive for every n >= 2 point
        excess = cp.energy - build_critical_point(p, Family.LOOP, 1).energy
        return StabilityVerdict(Verdict.UNSTABLE, Mechanism.HIGHER_MODE_RIGIDITY, excess)
    if cp.family is not Family.LOOP and (cp.merged or _near_hat(p)):
        return StabilityVerdict(Verdict.DEGENERATE_UNSTABLE, Mechanism.THIRD_DERIVATIVE,
                                degenerate_third_derivative(p))
    d2 = second_derivative_sign(cp, p)
    if cp.family is Family.LOOP:
        return StabilityVerdict(Verdict.UNSTABLE, Mechanism.FIXED_LENGTH_INSTABILITY, d2)
    verdict = Verdict.STABLE if d2 > 0 else Verdict.UNSTABLE
    return StabilityVerdict(verdict, Mechanism.Q_FAMILY_SECOND_DERIVATIVE, d2)


def stability_table(p, n_max):
    return [(cp, stability_verdict(cp, p)) for cp in enumerate_critical_points(p, n_max)]


def count_local_minimizers(p):
    """Two (segment and larc1) below lambda_hat, otherwise only the segment."""
    lh = constants().lambda_hat
    return 2 if p.mu < lh and not _near_hat(p) else 1
