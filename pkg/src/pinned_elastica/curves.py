"""Arclength parametrizations of critical points and of the wavelike q-family.

Arcs (sigma = -1) and loops (sigma = +1), with u = alpha s - K(q):

    arc : X = (2E(am u) + 2E - alpha s)/alpha,   theta = -2 arcsin(q sn u),      k = -2 alpha q cn u
    loop: X = (-2E(am u) - 2E + alpha s)/alpha,  theta = pi + 2 arcsin(q sn u),  k = 2 alpha q cn u
    both: Y = 2 q cn(u) / alpha

Curves are emitted in the upper-half-plane representative; pass
``reflect=True`` for the mirror image across the x-axis.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .classify import Family
from .elliptic import ellip_E, ellip_E_inc, ellip_K, jacobi_am
from .errors import DomainError, SamplingError, SingularPointError
from .moduli import constants

_STAR_GUARD = 1e-8


@dataclass
class PlanarCurve:
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    k: np.ndarray
    total_length: float
    meta: dict = field(default_factory=dict)

    @property
    def points(self):
        return np.column_stack([self.x, self.y])

    def __len__(self):
        return len(self.s)

    def reflected(self):
        return PlanarCurve(self.s.copy(), self.x.copy(), -self.y, -self.theta, -self.k,
                           self.total_length, dict(self.meta))

    def to_csv(self, fh=None):
        """Write columns s,x,y,theta,k at round-trip precision; returns the text if fh is None."""
        buf = fh if fh is not None else io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "x", "y", "theta", "k"])
        for row in zip(self.s, self.x, self.y, self.theta, self.k):
            w.writerow([f"{v:.17g}" for v in row])
        if fh is None:
            return buf.getvalue()

    def as_json(self):
        return {"metadata": dict(self.meta), "total_length": self.total_length,
                "samples": {"s": self.s, "x": self.x, "y": self.y, "theta": self.theta, "k": self.k}}

    @classmethod
    def from_csv(cls, path):
        data = np.genfromtxt(path, delimiter=",", names=True)
        s = np.atleast_1d(data["s"])
        return cls(s, np.atleast_1d(data["x"]), np.atleast_1d(data["y"]),
                   np.atleast_1d(data["theta"]), np.atleast_1d(data["k"]), float(s[-1] - s[0]))


def _kind(family):
    return "loop" if family is Family.LOOP else "arc"


def _closed_form(kind, q, alpha, s):
    K, E = ellip_K(q), ellip_E(q)
    u = alpha * s - K
    am = jacobi_am(u, q)
    sn, cn = np.sin(am), np.cos(am)
    e_am = ellip_E_inc(am, q)
    y = 2.0 * q * cn / alpha
    if kind == "arc":
        x = (2.0 * e_am + 2.0 * E - alpha * s) / alpha
        theta = -2.0 * np.arcsin(q * sn)
        k = -2.0 * alpha * q * cn
    else:
        x = (-2.0 * e_am - 2.0 * E + alpha * s) / alpha
        theta = np.pi + 2.0 * np.arcsin(q * sn)
        k = 2.0 * alpha * q * cn
    return x, y, theta, k


def _grid(length, N):
    if not (isinstance(N, (int, np.integer)) and N >= 2):
        raise SamplingError(f"need N >= 2 sample intervals, got {N!r}")
    s = np.linspace(0.0, length, int(N) + 1)
    s[-1] = length
    return s


def sample_curve(cp, N, reflect=False):
    """N + 1 uniform-arclength samples of the critical point's closed form."""
    s = _grid(cp.length, N)
    if cp.family is Family.SEGMENT:
        z = np.zeros_like(s)
        curve = PlanarCurve(s, s.copy(), z, z.copy(), z.copy(), cp.length)
    else:
        x, y, theta, k = _closed_form(_kind(cp.family), cp.q, cp.alpha, s)
        curve = PlanarCurve(s, x, y, theta, k, cp.length)
    curve.meta = {"family": cp.family.value, "n": cp.n, "q": cp.q, "alpha": cp.alpha,
                  "length": cp.length}
    return curve.reflected() if reflect else curve


def curvature_at(cp, s):
    """Signed curvature of the critical point at arclength s (scalar or array)."""
    s_arr = np.asarray(s, dtype=float)
    tol = 1e-12 * cp.length
    if np.any(s_arr < -tol) or np.any(s_arr > cp.length + tol):
        raise DomainError(f"s must lie in [0, {cp.length!r}]")
    if cp.family is Family.SEGMENT:
        out = np.zeros_like(s_arr)
    else:
        cn = np.cos(jacobi_am(cp.alpha * s_arr - ellip_K(cp.q), cp.q))
        out = 2.0 * cp.sigma * cp.alpha * cp.q * cn
    return out if out.ndim else float(out)


def wavelike_params(q, ell):
    """(alpha, length, kind) of the q-family member gamma_w(., q)."""
    q = float(q)
    if not (0.0 < q < 1.0):
        raise DomainError(f"wavelike q must lie in (0, 1), got {q!r}")
    if abs(q - constants().q_star) < _STAR_GUARD:
        raise SingularPointError(f"wavelike length diverges at q_star; got q={q!r}")
    K, E = ellip_K(q), ellip_E(q)
    alpha = 2.0 / ell * abs(2 * E - K)
    kind = "arc" if 2 * E - K > 0 else "loop"
    return alpha, 2.0 * K / alpha, kind


def wavelike_curve(q, ell, N, reflect=False):
    """Sampled member of the wavelike family joining (0,0) to (ell,0).

    Below q_star it is a one-mode arc, above q_star a one-mode loop; its length
    is ell K / |2E - K|.
    """
    alpha, length, kind = wavelike_params(q, ell)
    s = _grid(length, N)
    x, y, theta, k = _closed_form(kind, q, alpha, s)
    curve = PlanarCurve(s, x, y, theta, k, length,
                        {"family": "wavelike", "n": 1, "q": float(q), "alpha": alpha, "length": length})
    return curve.reflected() if reflect else curve


def reconstruct_from_curvature(k_fn, L, ell_expected, N=4096):
    """Integrate theta' = k, gamma' = (cos theta, sin theta) by classical RK4.

    The initial angle is zero and the result is rotated so that the chord lies
    on the positive x-axis.  ``meta['endpoint_residual']`` is the distance of
    the final point from (ell_expected, 0).
    """
    if N < 100:
        raise SamplingError(f"reconstruction needs N >= 100, got {N!r}")
    h = L / N
    s = np.linspace(0.0, L, N + 1)
    k_nodes = np.asarray(k_fn(s), dtype=float) * np.ones_like(s)
    k_mid = np.asarray(k_fn(s[:-1] + 0.5 * h), dtype=float) * np.ones(N)
    if not (np.all(np.isfinite(k_nodes)) and np.all(np.isfinite(k_mid))):
        raise DomainError("curvature function returned non-finite values")
    dtheta = h / 6.0 * (k_nodes[:-1] + 4.0 * k_mid + k_nodes[1:])
    theta = np.concatenate([[0.0], np.cumsum(dtheta)])
    t0 = theta[:-1]
    a1 = t0
    a2 = t0 + 0.5 * h * k_nodes[:-1]
    a3 = t0 + 0.5 * h * k_mid
    a4 = t0 + h * k_mid
    dx = h / 6.0 * (np.cos(a1) + 2 * np.cos(a2) + 2 * np.cos(a3) + np.cos(a4))
    dy = h / 6.0 * (np.sin(a1) + 2 * np.sin(a2) + 2 * np.sin(a3) + np.sin(a4))
    x = np.concatenate([[0.0], np.cumsum(dx)])
    y = np.concatenate([[0.0], np.cumsum(dy)])
    rot = -np.arctan2(y[-1], x[-1])
    c, sr = np.cos(rot), np.sin(rot)
    x, y = c * x - sr * y, sr * x + c * y
    theta = theta + rot
    residual = float(np.hypot(x[-1] - ell_expected, y[-1]))
    return PlanarCurve(s, x, y, theta, k_nodes, L, {"endpoint_residual": residual})


def self_intersections(curve, vertex_tol=1e-12):
    """Transverse crossings between non-adjacent segments of a polyline.

    Accepts a PlanarCurve or an (M+1, 2) array.  Returns a list of
    (i, j, point) with i < j segment indices.  Each segment is treated as
    half-open so a crossing through a shared vertex is reported once.
    """
    P = curve.points if isinstance(curve, PlanarCurve) else np.asarray(curve, dtype=float)
    if len(P) < 3:
        raise SamplingError("need at least 3 samples")
    A, B = P[:-1], P[1:]
    D = B - A
    lo = np.minimum(A, B)
    hi = np.maximum(A, B)
    M = len(A)
    hits = []
    for i in range(M - 2):
        j = np.arange(i + 2, M)
        box = ((lo[j, 0] <= hi[i, 0]) & (hi[j, 0] >= lo[i, 0])
               & (lo[j, 1] <= hi[i, 1]) & (hi[j, 1] >= lo[i, 1]))
        j = j[box]
        if j.size == 0:
            continue
        d = D[i]
        e = D[j]
        w = A[j] - A[i]
        det = d[0] * e[:, 1] - d[1] * e[:, 0]
        ok = det != 0.0
        j, e, w, det = j[ok], e[ok], w[ok], det[ok]
        t = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / det
        u = (w[:, 0] * d[1] - w[:, 1] * d[0]) / det
        sel = (t >= 0.0) & (t < 1.0) & (u >= 0.0) & (u < 1.0)
        for jj, tt in zip(j[sel], t[sel]):
            pt = A[i] + tt * d
            # i = 0 and j = M-1 share no vertex; only guard genuinely shared ends
            if jj == i + 1 and min(np.linalg.norm(pt - B[i]), np.linalg.norm(pt - A[jj])) < vertex_tol:
                continue
            hits.append((int(i), int(jj), pt))
    return hits


def count_self_intersections(points):
    return len(self_intersections(points))
