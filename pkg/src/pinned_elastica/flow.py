"""Semi-implicit polyline scheme for the lambda-elastic flow with Navier boundary data.

In the plane the normal velocity is V = -2 k_ss - k^3 + lambda k.  Since the
normal part of -2 X_ssss is -2 (k_ss - k^3), the flow agrees up to tangential
terms with

    X_t = -2 X_ssss + lambda X_ss - 3 k^3 N.

Writing A = -2 D4 + lambda D2 for the linear part, each step solves

    (I - dt A) (X^{n+1} - X^n) = dt V_N(X^n) N,

where V_N is the discrete normal velocity of the full right-hand side at the
old nodes.  The implicit operator damps the stiff fourth-order modes, and
because only the normal velocity drives the update, discrete equilibria are
exact fixed points (the tangential part 6 k k_s T of -2 X_ssss would
otherwise leak O(dt) normal motion through the solve).  Endpoints are fixed
and zero curvature at the ends enters through the ghost node
X_{-1} = 2 X_0 - X_1.  After each solve the nodes are moved back to uniform
arclength along a natural cubic spline, which changes the parametrization
only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import LinAlgError, solve_banded

from .classify import ProblemParams
from .curves import PlanarCurve, count_self_intersections, sample_curve
from .errors import IncompatibleBoundaryError, ResolutionError, StepFailure
from .jsonio import dumps

M_MIN = 16
DEFAULT_M = 400
DEFAULT_DT = 1e-6
DEFAULT_DT_MAX = 1e-3
DEFAULT_T_END = 10.0


# -- discrete geometry ----------------------------------------------------------

def edge_lengths(X):
    return np.linalg.norm(np.diff(X, axis=0), axis=1)


def edge_ratio(X):
    el = edge_lengths(X)
    return float(el.max() / el.min())


def _odd_extend(X, width=2):
    """Point reflection through each end: X_{-j} = 2 X_0 - X_j (zero even derivatives there)."""
    head = 2 * X[0] - X[width:0:-1]
    tail = 2 * X[-1] - X[-2:-2 - width:-1]
    return np.concatenate([head, X, tail])


def _d1(G, h):
    return (G[:-4] - 8 * G[1:-3] + 8 * G[3:-1] - G[4:]) / (12 * h)


def _d2(G, h):
    return (-G[:-4] + 16 * G[1:-3] - 30 * G[2:-2] + 16 * G[3:-1] - G[4:]) / (12 * h * h)


def discrete_curvature(X):
    """Signed curvature and unit normals at every node by fourth-order differences.

    Nodes are assumed roughly equidistant; the speed |X_u| is divided out.  The
    curvature is zero at both ends by construction of the reflection.
    """
    M = len(X) - 1
    h = float(np.sum(edge_lengths(X))) / M
    G = _odd_extend(X)
    xu = _d1(G, h)
    xuu = _d2(G, h)
    speed = np.linalg.norm(xu, axis=1)
    N = np.column_stack([-xu[:, 1], xu[:, 0]]) / speed[:, None]
    k = np.einsum("ij,ij->i", xuu, N) / speed**2
    k[0] = k[-1] = 0.0
    return k, N, speed, h


def discrete_energy(X, lam):
    """(B, L, B + lam L) by the trapezoid rule in the node parameter.

    k^2 has zero slope at both ends, so the rule is fourth-order accurate here.
    """
    k, _, speed, h = discrete_curvature(X)
    B = float(np.trapezoid(k * k * speed, dx=h))
    L = float(np.trapezoid(speed, dx=h))
    return B, L, B + lam * L


def resample_uniform(X, M, param=None):
    """M + 1 points equally spaced in arclength along a natural cubic spline through X."""
    if param is None:
        param = np.concatenate([[0.0], np.cumsum(edge_lengths(X))])
    spline = CubicSpline(param, X, bc_type="natural", axis=0)
    fine = np.linspace(param[0], param[-1], 8 * M + 1)
    pts = spline(fine)
    arc = np.concatenate([[0.0], np.cumsum(edge_lengths(pts))])
    targets = np.linspace(0.0, arc[-1], M + 1)
    u = np.interp(targets, arc, fine)
    out = spline(u)
    out[0], out[-1] = X[0], X[-1]
    return out


# -- state ------------------------------------------------------------------------

@dataclass
class FlowState:
    nodes: np.ndarray
    time: float
    dt: float
    lam: float
    ell: float
    energy: float = 0.0
    min_edge: float = 0.0
    intersections: int = 0
    steps: int = 0
    speed: float = math.inf

    @property
    def M(self):
        return len(self.nodes) - 1

    @property
    def params(self):
        return ProblemParams(self.lam, self.ell)

    def refresh(self, intersections=True):
        self.energy = discrete_energy(self.nodes, self.lam)[2]
        self.min_edge = float(edge_lengths(self.nodes).min())
        if intersections:
            self.intersections = count_self_intersections(self.nodes)
        return self


@dataclass
class FlowOutcome:
    converged_to: str
    embedded_since: float | None
    energy_trace: list
    final_state: FlowState
    intersection_trace: list = field(default_factory=list)
    nearest: tuple | None = None
    status: str = "horizon"

    def summary(self):
        st = self.final_state
        return {
            "converged_to": self.converged_to,
            "embedded_since": self.embedded_since if self.embedded_since is not None
            else "never within horizon",
            "status": self.status,
            "nearest": None if self.nearest is None else {"id": self.nearest[0], "distance": self.nearest[1]},
            "final_time": st.time,
            "final_energy": st.energy,
            "final_intersections": st.intersections,
            "initial_energy": self.energy_trace[0][1] if self.energy_trace else None,
            "steps": st.steps,
        }


def _menger(X):
    e = np.diff(X, axis=0)
    cross = e[:-1, 0] * e[1:, 1] - e[:-1, 1] * e[1:, 0]
    dot = np.einsum("ij,ij->i", e[:-1], e[1:])
    clen = np.linalg.norm(X[2:] - X[:-2], axis=1)
    return np.concatenate([[0.0], 2.0 * np.sin(np.arctan2(cross, dot)) / clen, [0.0]])


def end_curvature(X):
    """Curvature at both ends extrapolated from the first four interior Menger values."""
    k = _menger(X)
    left = 4 * k[1] - 6 * k[2] + 4 * k[3] - k[4]
    right = 4 * k[-2] - 6 * k[-3] + 4 * k[-4] - k[-5]
    return float(left), float(right)


def _end_curvature(curve, X):
    if isinstance(curve, PlanarCurve):
        k = np.asarray(curve.k, dtype=float)
        return max(abs(k[0]), abs(k[-1])), float(np.max(np.abs(k)))
    left, right = end_curvature(X)
    return max(abs(left), abs(right)), float(np.max(np.abs(_menger(X))))


def init_flow(curve, p, M=DEFAULT_M, dt=None):
    """Resample an initial curve to M + 1 nodes of equal arclength and check its boundary data."""
    if not (isinstance(M, (int, np.integer)) and M >= M_MIN):
        raise ResolutionError(f"flow needs M >= {M_MIN} (at least 15 interior nodes), got {M!r}")
    X = curve.points if isinstance(curve, PlanarCurve) else np.asarray(curve, dtype=float)
    tol = 1e-9 * p.ell
    if np.linalg.norm(X[0]) > tol or np.hypot(X[-1, 0] - p.ell, X[-1, 1]) > tol:
        raise IncompatibleBoundaryError(
            f"endpoints must be (0,0) and ({p.ell!r},0) within 1e-9*ell; got {X[0].tolist()} and {X[-1].tolist()}")
    k_end, k_max = _end_curvature(curve, X)
    if k_end > 1e-3 * k_max:
        raise IncompatibleBoundaryError(
            f"end curvature {k_end!r} exceeds 1e-3 of max |k| = {k_max!r} (zero-curvature ends required)")
    X = X.copy()
    X[0] = (0.0, 0.0)
    X[-1] = (p.ell, 0.0)
    param = curve.s if isinstance(curve, PlanarCurve) else None
    nodes = resample_uniform(X, int(M), param)
    nodes[0] = (0.0, 0.0)
    nodes[-1] = (p.ell, 0.0)
    dt = DEFAULT_DT * p.ell**4 if dt is None else float(dt)
    if not dt > 0:
        raise ResolutionError(f"dt must be positive, got {dt!r}")
    return FlowState(nodes, 0.0, dt, p.lam, p.ell).refresh()


def _system(M, h, dt, lam):
    """Banded I + 2 dt D4 - lam dt D2 on interior nodes, ghost-node rows at both ends."""
    a = 2.0 * dt / h**4
    b = lam * dt / h**2
    n = M - 1
    ab = np.zeros((5, n))
    diag = np.full(n, 1.0 + 6 * a + 2 * b)
    diag[0] = diag[-1] = 1.0 + 5 * a + 2 * b
    ab[2] = diag
    ab[1, 1:] = -4 * a - b
    ab[3, :-1] = -4 * a - b
    ab[0, 2:] = a
    ab[4, :-2] = a
    return ab, a, b


def normal_velocity(X, lam):
    """V_N = -2 k_ss - k^3 + lam k at interior nodes, with the unit normals and spacing."""
    k, N, speed, h = discrete_curvature(X)
    kk = _odd_extend(k[:, None])[:, 0]
    k_ss = _d2(kk, h) / speed**2
    v = -2.0 * k_ss - k**3 + lam * k
    return v[1:-1], N[1:-1], h


def step(state):
    """One linearly implicit step followed by redistribution; returns a new state."""
    X = state.nodes
    M = state.M
    v, N, h = normal_velocity(X, state.lam)
    ab, _, _ = _system(M, h, state.dt, state.lam)
    rhs = state.dt * v[:, None] * N
    try:
        delta = solve_banded((2, 2), ab, rhs)
    except (LinAlgError, ValueError) as exc:
        raise StepFailure(f"linear solve failed at t={state.time!r}: {exc}") from exc
    if not np.all(np.isfinite(delta)):
        raise StepFailure(f"non-finite nodes at t={state.time!r}")
    X0, XM = X[0], X[-1]
    Y = np.vstack([X0, X[1:-1] + delta, XM])
    if edge_lengths(Y).min() < 1e-8 * state.ell:
        raise StepFailure(f"node collision at t={state.time!r}; reduce dt")
    Y = resample_uniform(Y, M)
    Y[0], Y[-1] = X0, XM
    if edge_lengths(Y).min() < 1e-8 * state.ell:
        raise StepFailure(f"node collision after redistribution at t={state.time!r}")
    _, N_new, _, _ = discrete_curvature(Y)
    disp = Y[1:-1] - X[1:-1]
    speed = float(np.max(np.abs(np.einsum("ij,ij->i", disp, N_new[1:-1])))) / state.dt
    new = replace(state, nodes=Y, time=state.time + state.dt, steps=state.steps + 1, speed=speed)
    return new.refresh(intersections=False)


# -- shape comparison -------------------------------------------------------------

def shape_distance(X, Y):
    """Max node distance after resampling both to equal arclength, minimized over x-axis reflection."""
    K = max(len(X), len(Y)) - 1
    A = resample_uniform(X, K)
    B = resample_uniform(Y, K)
    d = np.max(np.linalg.norm(A - B, axis=1))
    B[:, 1] *= -1.0
    return float(min(d, np.max(np.linalg.norm(A - B, axis=1))))


def _catalogue_shapes(catalogue, M):
    return [(cp.id, sample_curve(cp, M).points) for cp in catalogue]


def nearest_critical_point(X, shapes):
    best = None
    for cid, P in shapes:
        d = shape_distance(X, P)
        if best is None or d < best[1]:
            best = (cid, d)
    return best


def run(state, t_end=None, catalogue=(), *, dt_max=DEFAULT_DT_MAX, tol_conv=1e-4, vel_tol=1e-6,
        check_every=10, grow_after=50, dt_min=1e-14, trajectory=None, record_every=None,
        stop_on_convergence=True, observer=None):
    """Integrate to t_end with adaptive dt and report convergence and embeddedness.

    A step is accepted only when the discrete energy does not rise by more
    than 1e-8 of the initial energy; otherwise dt is halved.  ``trajectory``
    may be a list (records are appended) or a writable text stream (JSON lines).
    ``observer(state)`` is called after every accepted step; a truthy return
    value ends the run with status "stopped".
    """
    t_end = DEFAULT_T_END * state.ell**4 if t_end is None else float(t_end)
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end!r}")
    shapes = _catalogue_shapes(catalogue, state.M)
    e0 = state.energy
    e_tol = 1e-8 * abs(e0)
    trace = [(state.time, state.energy)]
    xtrace = [(state.time, state.intersections)]
    embedded_since = state.time if state.intersections == 0 else None
    clean = 0
    status = "horizon"
    converged = "none"
    nearest = None
    record_every = record_every or check_every

    def emit(st):
        if trajectory is None:
            return
        rec = {"t": st.time, "energy": st.energy, "intersections": st.intersections,
               "nodes": st.nodes.tolist()}
        if hasattr(trajectory, "write"):
            trajectory.write(dumps(rec, indent=0) + "\n")
        else:
            trajectory.append(rec)

    emit(state)
    while state.time < t_end * (1 - 1e-12):
        trial_dt = min(state.dt, dt_max, t_end - state.time)
        try:
            new = step(replace(state, dt=trial_dt))
            ok = new.energy <= state.energy + e_tol
        except StepFailure:
            ok = False
        if not ok:
            state = replace(state, dt=trial_dt * 0.5)
            clean = 0
            if state.dt < dt_min:
                status = "dt-underflow"
                break
            continue
        new.dt = state.dt
        state = new
        clean += 1
        if clean >= grow_after:
            state.dt = min(2.0 * state.dt, dt_max)
            clean = 0
        trace.append((state.time, state.energy))
        if observer is not None and observer(state):
            status = "stopped"
            break
        if state.steps % check_every == 0:
            state.intersections = count_self_intersections(state.nodes)
            xtrace.append((state.time, state.intersections))
            if state.intersections:
                embedded_since = None
            elif embedded_since is None:
                embedded_since = state.time
            if state.steps % record_every == 0:
                emit(state)
            if state.speed < vel_tol:
                nearest = nearest_critical_point(state.nodes, shapes) if shapes else None
                if nearest is not None and nearest[1] < tol_conv * state.ell:
                    converged = nearest[0]
                    status = "converged"
                    if stop_on_convergence:
                        break
                else:
                    # slow but away from every catalogue shape, e.g. passing a saddle
                    status = "stationary"
            elif status != "horizon":
                status, converged = "horizon", "none"
    state.intersections = count_self_intersections(state.nodes)
    if not xtrace or xtrace[-1][0] != state.time:
        xtrace.append((state.time, state.intersections))
        if state.intersections:
            embedded_since = None
        elif embedded_since is None:
            embedded_since = state.time
        emit(state)
    if nearest is None and shapes:
        nearest = nearest_critical_point(state.nodes, shapes)
        if state.speed < vel_tol and nearest[1] < tol_conv * state.ell:
            converged, status = nearest[0], "converged"
    return FlowOutcome(converged, embedded_since, trace, state, xtrace, nearest, status)
