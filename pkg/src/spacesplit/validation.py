"""Independent ground truth: ensemble averages, finite-difference oracles
over parameters and along the unstable direction, and convergence fits."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dynamics import MapModel, Trajectory, wrap_delta
from .observables import Observable
from .tangent import (TangentFrames, step_regularized_tangent,
                      step_unstable_direction)


def ensemble_average(model: MapModel, s: np.ndarray, J: Observable,
                     n_orbits: int, orbit_length: int, runup: int, seed):
    """Average J over independent orbits after run-up.

    Orbits advance together as one batch; the standard error comes from
    the spread of the per-orbit means.  `seed` may be an int or a
    numpy SeedSequence (per-orbit starts are spawned from it either way).
    """
    if n_orbits < 1 or orbit_length < 1 or runup < 0:
        raise ValueError("n_orbits, orbit_length must be >= 1 and runup >= 0")
    s = model.validate_params(s)
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    xs = np.stack([
        model.sample_state(np.random.Generator(np.random.Philox(child)))
        for child in ss.spawn(n_orbits)
    ])
    for _ in range(runup):
        xs = model.apply_map_batch(xs, s)
    sums = np.zeros(n_orbits)
    for _ in range(orbit_length):
        sums += J.fn(xs)
        xs = model.apply_map_batch(xs, s)
    orbit_means = sums / orbit_length
    mean = float(orbit_means.mean())
    stderr = 0.0 if n_orbits == 1 else float(orbit_means.std(ddof=1) / np.sqrt(n_orbits))
    return mean, stderr


def central_difference(model: MapModel, s: np.ndarray, param_index: int,
                       delta: float, J: Observable, *, n_orbits: int,
                       orbit_length: int, runup: int, seed: int):
    """(⟨J⟩(s + d e_k) - ⟨J⟩(s - d e_k)) / 2d with propagated standard error.

    The two sides use seeds tied to the sign of the shift, so the estimate
    is exactly antisymmetric in delta.
    """
    if delta == 0.0:
        raise ValueError("delta must be nonzero")
    d = abs(delta)
    s = model.validate_params(s)
    plus = s.copy()
    plus[param_index] += d
    minus = s.copy()
    minus[param_index] -= d
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seed_plus, seed_minus = ss.spawn(2)
    m_plus, se_plus = ensemble_average(model, plus, J, n_orbits, orbit_length,
                                       runup, seed_plus)
    m_minus, se_minus = ensemble_average(model, minus, J, n_orbits, orbit_length,
                                         runup, seed_minus)
    deriv = (m_plus - m_minus) / (2.0 * d)
    stderr = float(np.hypot(se_plus, se_minus) / (2.0 * d))
    return deriv, stderr


def fd_tolerance(stderr_s3: float, stderr_fd: float, fd_value: float) -> float:
    """Acceptance band for an S3-vs-oracle comparison: three combined
    standard errors plus 2% of the oracle value for curvature bias."""
    return 3.0 * (stderr_s3 + stderr_fd) + 0.02 * abs(fd_value)


@dataclass
class ResponseCurve:
    """⟨J⟩ sampled over a grid of values of one parameter."""

    param_index: int
    grid: np.ndarray
    means: np.ndarray
    stderrs: np.ndarray
    samples_per_point: int

    def to_csv(self, path, header_comment: Optional[str] = None) -> None:
        with open(path, "w") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            fh.write("s,mean,stderr\n")
            for sv, m, se in zip(self.grid, self.means, self.stderrs):
                fh.write(f"{sv:.17g},{m:.17g},{se:.17g}\n")


def _curve_point(args):
    model, s_point, J, n_orbits, orbit_length, runup, child = args
    return ensemble_average(model, s_point, J, n_orbits, orbit_length, runup, child)


def response_curve(model: MapModel, param_index: int, grid: Sequence[float],
                   J: Observable, *, n_orbits: int, orbit_length: int,
                   runup: int, seed: int, base_s: Optional[np.ndarray] = None,
                   workers: int = 1) -> ResponseCurve:
    """One ensemble average per grid point of the swept parameter.

    Per-point seeds are spawned from the master seed independently of the
    worker count, so parallel and serial runs agree bit-for-bit.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("grid must be a non-empty 1-D sequence")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")
    base = np.zeros(model.param_dim) if base_s is None else np.asarray(base_s, float).copy()
    children = np.random.SeedSequence(seed).spawn(grid.size)
    tasks = []
    for sv, child in zip(grid, children):
        s_point = base.copy()
        s_point[param_index] = sv
        tasks.append((model, s_point, J, n_orbits, orbit_length, runup, child))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_curve_point, tasks))
    else:
        results = [_curve_point(t) for t in tasks]
    means = np.array([r[0] for r in results])
    stderrs = np.array([r[1] for r in results])
    return ResponseCurve(param_index, grid, means, stderrs,
                         samples_per_point=n_orbits * orbit_length)


def convergence_slope(pairs: Sequence[tuple]) -> float:
    """Least-squares slope of log|error| against log N."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 (N, error) pairs")
    ns = np.array([float(p[0]) for p in pairs])
    errs = np.abs(np.array([float(p[1]) for p in pairs]))
    if np.any(errs == 0.0) or np.any(ns <= 0.0):
        raise ValueError("errors must be nonzero and N positive")
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0])


def unstable_derivative_fd(model: MapModel, s: np.ndarray, param_index: int,
                           trajectory: Trajectory, frames: TangentFrames,
                           n_samples: int = 100, h: float = 1e-5,
                           steps: int = 10, seed: int = 0) -> dict:
    """Brute-force check of the unstable derivatives gamma and b.

    A companion point is released at x_n with offset h0 q_n, where h0 is
    pre-shrunk by the orbit's measured expansion so the separation is about
    h after `steps` steps; both points are marched forward while the
    companion carries its own renormalized direction and regularized
    tangent.  The finite differences of alpha and a across the final
    separation approximate gamma and b at x_{n+steps}.

    Samples whose companion crosses a branch boundary of the map relative
    to the reference orbit are flagged invalid (the fields are smooth only
    on branches).  Returns arrays of FD and analytic values plus the mask.
    """
    if frames.diag is None:
        raise ValueError("frames must carry diagnostics (gamma, b)")
    s = model.validate_params(s)
    n_frames = len(frames)
    if n_frames < steps + 2:
        raise ValueError("trajectory too short for the companion orbit")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    idx = np.sort(rng.choice(n_frames - steps - 1, size=n_samples, replace=False))

    gamma_fd = np.empty(n_samples)
    b_fd = np.empty(n_samples)
    valid = np.ones(n_samples, dtype=bool)
    for out_i, n in enumerate(idx):
        scale = float(np.prod(frames.alpha[n + 1:n + steps + 1]))
        h0 = h / scale
        z = trajectory.point(n) + h0 * frames.q[n]
        qc = frames.q[n].copy()
        vc = frames.v[n].copy()
        alpha_c = a_c = 0.0
        for j in range(1, steps + 1):
            x_ref = trajectory.point(n + j - 1)
            if np.any(np.floor(z / np.pi) != np.floor(x_ref / np.pi)):
                valid[out_i] = False
                break
            jac = model.jacobian(z, s)
            chi = model.parameter_velocity(z, s, param_index)
            qc, alpha_c = step_unstable_direction(qc, jac)
            vc, a_c = step_regularized_tangent(vc, jac, chi, qc)
            z = model.apply_map(z, s)
        if not valid[out_i]:
            gamma_fd[out_i] = b_fd[out_i] = np.nan
            continue
        xi = float(wrap_delta(z - trajectory.point(n + steps)) @ frames.q[n + steps])
        gamma_fd[out_i] = (alpha_c - frames.alpha[n + steps]) / xi
        b_fd[out_i] = (a_c - frames.a[n + steps]) / xi

    tail = idx + steps
    return {
        "indices": tail,
        "valid": valid,
        "gamma_fd": gamma_fd,
        "gamma_analytic": frames.diag.gamma[tail],
        "b_fd": b_fd,
        "b_analytic": frames.diag.b[tail],
    }
