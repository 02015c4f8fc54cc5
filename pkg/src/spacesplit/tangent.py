"""First- and second-order tangent recursions along an orbit.

Per transition x_n -> x_{n+1} the stack advances

  q:  unit unstable direction (power iteration, normalized each step),
  v:  regularized tangent solution, kept orthogonal to q,
  p:  unprojected curvature companion,
  y:  unstable derivative of v, whose projection coefficient c is the
      unstable-contribution weight,

and, when diagnostics are requested,

  w:      unstable-manifold curvature vector (projected companion of p),
  gamma:  unstable derivative of the expansion factor alpha,
  g:      logarithmic SRB density gradient,
  b:      unstable derivative of a, from a second y-recursion driven by w.

All recursions forget their initialization exponentially, so everything is
started arbitrarily at -K' and only frames n >= 0 are kept.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import BakerMap, MapModel, Trajectory
from .errors import DegenerateTangentError

DEGENERATE_NORM = 1e-14


def step_unstable_direction(q: np.ndarray, jac: np.ndarray):
    """Push q through the Jacobian and renormalize.

    Returns (q_next, alpha_next) with alpha_next = ||jac @ q||.
    """
    dq = jac @ q
    alpha = float(np.linalg.norm(dq))
    if alpha < DEGENERATE_NORM:
        raise DegenerateTangentError(f"||dphi q|| = {alpha:.3e}")
    return dq / alpha, alpha


def step_regularized_tangent(v: np.ndarray, jac: np.ndarray,
                             chi: np.ndarray, q_next: np.ndarray):
    """One step of the inhomogeneous tangent with the unstable component removed.

    Returns (v_next, a_next) where a_next is the removed coefficient, chosen
    so that v_next . q_next = 0.
    """
    t = jac @ v + chi
    a = float(q_next @ t)
    return t - a * q_next, a


def step_p(p: np.ndarray, jac: np.ndarray, alpha_next: float, d2_qq: np.ndarray):
    """p_next = (d2phi(q, q) + jac p) / alpha_next^2 (no projection)."""
    return (d2_qq + jac @ p) / (alpha_next * alpha_next)


def step_y(y: np.ndarray, jac: np.ndarray, q_next: np.ndarray, v_next: np.ndarray,
           alpha_next: float, a_next: float, p_next: np.ndarray,
           d2_qv: np.ndarray, dchi_q: np.ndarray):
    """Advance the unstable derivative of v and extract its weight.

    z = (d2phi(q, v) + jac y)/alpha + (dchi) q_next - a_next p_next, then the
    scalar is fixed by y_next . q_next = -v_next . p_next:
    c_next = z . q_next + v_next . p_next and y_next = z - c_next q_next.

    The same update with the curvature vector w in place of p yields the
    diagnostic pair (y_diag, b).
    """
    z = (d2_qv + jac @ y) / alpha_next + dchi_q - a_next * p_next
    c = float(z @ q_next + v_next @ p_next)
    return z - c * q_next, c


def step_w(w: np.ndarray, jac: np.ndarray, q_next: np.ndarray,
           alpha_next: float, d2_qq: np.ndarray):
    """w_next = (I - q q^T)(jac w + d2phi(q, q)) / alpha_next^2."""
    u = jac @ w + d2_qq
    u = u - (q_next @ u) * q_next
    return u / (alpha_next * alpha_next)


def step_gamma(w: np.ndarray, jac: np.ndarray, q_next: np.ndarray,
               alpha_next: float, d2_qq: np.ndarray) -> float:
    """gamma_next = q_next . (jac w + d2phi(q, q)) / alpha_next."""
    return float(q_next @ (jac @ w + d2_qq)) / alpha_next


def step_g(g: float, alpha_next: float, gamma_next: float) -> float:
    """g_next = g/alpha_next - gamma_next/alpha_next."""
    return (g - gamma_next) / alpha_next


@dataclass
class DiagnosticFrames:
    """Per-step diagnostic quantities (curvature / density-gradient path)."""

    w: np.ndarray
    gamma: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __len__(self):
        return self.gamma.shape[0]

    def __getitem__(self, idx):
        if not isinstance(idx, slice):
            raise TypeError("frames support slicing only")
        return DiagnosticFrames(self.w[idx], self.gamma[idx], self.g[idx], self.b[idx])


@dataclass
class TangentFrames:
    """Arrays of per-step tangent quantities, aligned with trajectory.used.

    Row n holds (q_n, alpha_n, v_n, a_n, p_n, y_n, c_n); alpha_n, a_n and
    c_n belong to the transition into x_n.
    """

    q: np.ndarray
    alpha: np.ndarray
    v: np.ndarray
    a: np.ndarray
    p: np.ndarray
    y: np.ndarray
    c: np.ndarray
    diag: Optional[DiagnosticFrames] = None

    def __len__(self):
        return self.alpha.shape[0]

    def __getitem__(self, idx):
        if not isinstance(idx, slice):
            raise TypeError("frames support slicing only")
        diag = self.diag[idx] if self.diag is not None else None
        return TangentFrames(self.q[idx], self.alpha[idx], self.v[idx],
                             self.a[idx], self.p[idx], self.y[idx], self.c[idx], diag)

    def to_csv(self, path) -> None:
        """Frame dump: n,q1,q2,alpha,v1,v2,a,p1,p2,y1,y2,c[,w1,w2,gamma,g,b]."""
        m = self.q.shape[1]
        names = [f"q{i+1}" for i in range(m)] + ["alpha"]
        names += [f"v{i+1}" for i in range(m)] + ["a"]
        names += [f"p{i+1}" for i in range(m)] + [f"y{i+1}" for i in range(m)] + ["c"]
        cols = [self.q, self.alpha[:, None], self.v, self.a[:, None],
                self.p, self.y, self.c[:, None]]
        if self.diag is not None:
            names += [f"w{i+1}" for i in range(m)] + ["gamma", "g", "b"]
            cols += [self.diag.w, self.diag.gamma[:, None],
                     self.diag.g[:, None], self.diag.b[:, None]]
        data = np.hstack(cols)
        with open(path, "w") as fh:
            fh.write("n," + ",".join(names) + "\n")
            for n, row in enumerate(data):
                fh.write(str(n) + "," + ",".join(f"{x:.17g}" for x in row) + "\n")


@dataclass
class TangentInit:
    """Initial conditions at x_{-K'}; the defaults are the standard choice
    (random unit q, everything else zero).  Non-default values are only
    useful for initialization-forgetting studies."""

    q0: Optional[np.ndarray] = None
    v0: Optional[np.ndarray] = None
    p0: Optional[np.ndarray] = None
    y0: Optional[np.ndarray] = None
    g0: float = 0.0
    w0: Optional[np.ndarray] = None
    y_diag0: Optional[np.ndarray] = None

    def resolved(self, dim: int, q_rng: np.random.Generator):
        def vec(x):
            return np.zeros(dim) if x is None else np.asarray(x, dtype=float)

        if self.q0 is None:
            raw = q_rng.normal(size=dim)
            q0 = raw / np.linalg.norm(raw)
        else:
            q0 = np.asarray(self.q0, dtype=float)
            q0 = q0 / np.linalg.norm(q0)
        return (q0, vec(self.v0), vec(self.p0), vec(self.y0),
                float(self.g0), vec(self.w0), vec(self.y_diag0))


def _q_rng(trajectory: Trajectory, q_seed) -> np.random.Generator:
    if q_seed is None:
        ss = np.random.SeedSequence(entropy=trajectory.seed, spawn_key=(1,))
    else:
        ss = np.random.SeedSequence(q_seed)
    return np.random.Generator(np.random.Philox(ss))


def run_tangent_stack(trajectory: Trajectory, model: MapModel, s: np.ndarray,
                      param_index: int, diagnostics: bool = False,
                      q_seed=None, init: Optional[TangentInit] = None,
                      force_generic: bool = False) -> TangentFrames:
    """Run the coupled recursions over a trajectory and keep frames n >= 0.

    q0 is drawn uniformly on the unit sphere from a generator derived from
    the trajectory seed (or `q_seed`); v, p, y and the diagnostics start at
    zero.  Signs of q (and of a, y, gamma, g, b with it) depend on that
    draw; all downstream quantities are sign-consistent within one run.
    """
    s = model.validate_params(s)
    if not 0 <= param_index < model.param_dim:
        raise IndexError(f"parameter index {param_index} out of range")
    init = init or TangentInit()
    q0, v0, p0, y0, g0, w0, yd0 = init.resolved(model.dim, _q_rng(trajectory, q_seed))

    # exact type: subclasses may override derivatives the kernel inlines
    if type(model) is BakerMap and not force_generic:
        from . import kernels
        status, q, alpha, v, a, p, y, c, w, gam, g, b = kernels.baker_tangent_scan(
            trajectory.points, s, param_index, trajectory.runup,
            q0, v0, p0, y0, g0, w0, yd0, diagnostics)
        if status == 2:
            raise DegenerateTangentError("tangent collapsed along the orbit")
        diag = DiagnosticFrames(w, gam, g, b) if diagnostics else None
        return TangentFrames(q, alpha, v, a, p, y, c, diag)

    return _run_generic(trajectory, model, s, param_index, diagnostics,
                        q0, v0, p0, y0, g0, w0, yd0)


def _run_generic(trajectory, model, s, k, diagnostics, q, v, p, y, g, w, yd):
    pts = trajectory.points
    runup = trajectory.runup
    n_keep = pts.shape[0] - runup
    m = model.dim
    out_q = np.empty((n_keep, m))
    out_alpha = np.empty(n_keep)
    out_v = np.empty((n_keep, m))
    out_a = np.empty(n_keep)
    out_p = np.empty((n_keep, m))
    out_y = np.empty((n_keep, m))
    out_c = np.empty(n_keep)
    if diagnostics:
        out_w = np.empty((n_keep, m))
        out_gam = np.empty(n_keep)
        out_g = np.empty(n_keep)
        out_b = np.empty(n_keep)

    if runup == 0:
        out_q[0], out_alpha[0] = q, 1.0
        out_v[0], out_a[0] = v, 0.0
        out_p[0], out_y[0], out_c[0] = p, y, 0.0
        if diagnostics:
            out_w[0], out_gam[0], out_g[0], out_b[0] = w, 0.0, g, 0.0

    for i in range(pts.shape[0] - 1):
        x = pts[i]
        jac = model.jacobian(x, s)
        d2_qq = model.second_derivative(x, s, q, q)
        d2_qv = model.second_derivative(x, s, q, v)
        chi = model.parameter_velocity(x, s, k)
        dsjac = model.mixed_derivative(x, s, k)

        q_next, alpha = step_unstable_direction(q, jac)
        # (dchi)_{n+1} q_{n+1} via the chain rule: (ds djac)(x_n) q_n / alpha
        dchi_q = (dsjac @ q) / alpha
        v_next, a = step_regularized_tangent(v, jac, chi, q_next)
        p_next = step_p(p, jac, alpha, d2_qq)
        y_next, c = step_y(y, jac, q_next, v_next, alpha, a, p_next, d2_qv, dchi_q)
        if diagnostics:
            gamma = step_gamma(w, jac, q_next, alpha, d2_qq)
            w_next = step_w(w, jac, q_next, alpha, d2_qq)
            g = step_g(g, alpha, gamma)
            yd, b = step_y(yd, jac, q_next, v_next, alpha, a, w_next, d2_qv, dchi_q)
            w = w_next
        q, v, p, y = q_next, v_next, p_next, y_next

        j = i + 1 - runup
        if j >= 0:
            out_q[j], out_alpha[j] = q, alpha
            out_v[j], out_a[j] = v, a
            out_p[j], out_y[j], out_c[j] = p, y, c
            if diagnostics:
                out_w[j], out_gam[j], out_g[j], out_b[j] = w, gamma, g, b

    diag = DiagnosticFrames(out_w, out_gam, out_g, out_b) if diagnostics else None
    return TangentFrames(out_q, out_alpha, out_v, out_a, out_p, out_y, out_c, diag)


def iter_tangent_frames(trajectory, model, s, param_index, **kwargs):
    """Stream (n, TangentFrames-row) pairs one step at a time.

    Thin wrapper over `run_tangent_stack`; retention of the full arrays is
    what the response computations need anyway, so streaming consumers just
    get views into them.
    """
    frames = run_tangent_stack(trajectory, model, s, param_index, **kwargs)
    for n in range(len(frames)):
        yield n, frames[n:n + 1]
