"""Assembly of the sensitivity estimate and the ensemble (direct) baseline.

The total sensitivity splits into a stable contribution, the ergodic
average of dJ . v over the regularized tangent solution, and an unstable
contribution, a truncated sum of k-lag correlations between J and the
weight c produced by the tangent stack:

    stable   = (1/N) sum_n dJ(x_n) . v_n
    unstable = -sum_{k<K} (1/N) sum_n J(x_{n+k}) c_n

By default J is mean-centered inside the correlation, which leaves the
K -> infinity limit unchanged (the weights c average to zero) and sharply
reduces finite-N variance; the raw mode is available via `centered=False`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .dynamics import MapModel, Trajectory, generate_trajectory
from .observables import OBSERVABLES, Observable  # noqa: F401  (re-exported)
from .tangent import TangentFrames, run_tangent_stack

N_BATCHES = 30


def batch_means(series: np.ndarray, n_batches: int = N_BATCHES):
    """Mean of a correlated series and a batch-means standard error.

    The value is the full-sample mean; the error bar comes from the spread
    of `n_batches` contiguous batch means (tail samples beyond an equal
    split are ignored for the error estimate only).
    """
    series = np.asarray(series, dtype=float)
    n = series.shape[0]
    mean = float(series.mean())
    n_batches = min(n_batches, n)
    size = n // n_batches
    if n_batches < 2 or size < 1:
        return mean, 0.0
    bm = series[:n_batches * size].reshape(n_batches, size).mean(axis=1)
    stderr = float(bm.std(ddof=1) / np.sqrt(n_batches))
    return mean, stderr


def stable_contribution(frames: TangentFrames, trajectory: Trajectory, J: Observable):
    """Ergodic average of dJ . v over the frames' N steps."""
    n = len(frames)
    if n > trajectory.length:
        raise ValueError("frames longer than the trajectory's used segment")
    pts = trajectory.used[:n]
    series = np.einsum("ni,ni->n", J.grad(pts), frames.v)
    return batch_means(series)


def unstable_contribution(frames: TangentFrames, trajectory: Trajectory,
                          J: Observable, K: int, centered: bool = True):
    """Truncated k-lag correlation sum -sum_k <J_{n+k} c_n>.

    The trajectory (and frames) must extend K steps past the N averaging
    samples so that every lag uses exactly N products.  Returns
    (value, stderr, per_k_terms).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    n_total = len(frames)
    n = n_total - K
    if n < 1:
        raise ValueError("insufficient trajectory length: need N + K frames")
    if n_total > trajectory.length:
        raise ValueError("frames longer than the trajectory's used segment")
    jv = J.fn(trajectory.used[:n_total])
    if centered:
        jv = jv - jv[:n].mean()
    cn = frames.c[:n]
    per_k = np.empty(K)
    window = np.zeros(n)
    for k in range(K):
        seg = jv[k:k + n]
        per_k[k] = -(seg @ cn) / n
        window += seg
    _, stderr = batch_means(-cn * window)
    return float(per_k.sum()), stderr, per_k


@dataclass
class SensitivityResult:
    """Stable + unstable split of one sensitivity estimate."""

    param_index: int
    s: np.ndarray
    K: int
    N: int
    seed: int
    stable: float
    unstable: float
    stderr_stable: float
    stderr_unstable: float
    per_k_terms: np.ndarray
    centered: bool = True

    @property
    def total(self) -> float:
        return self.stable + self.unstable

    def to_dict(self) -> dict:
        return {
            "param_index": self.param_index,
            "s": [float(x) for x in self.s],
            "K": self.K,
            "N": self.N,
            "seed": self.seed,
            "stable": self.stable,
            "unstable": self.unstable,
            "total": self.total,
            "stderr_stable": self.stderr_stable,
            "stderr_unstable": self.stderr_unstable,
            "per_k_terms": [float(x) for x in self.per_k_terms],
        }


def s3_sensitivity(model: MapModel, s: np.ndarray, param_index: int,
                   J: Observable, config: RunConfig) -> SensitivityResult:
    """Full pipeline: trajectory -> tangent stack -> both contributions.

    Deterministic given config.seed.  The trajectory is generated with K
    extra points so each lag term averages exactly N samples.
    """
    s = model.validate_params(s)
    traj = generate_trajectory(model, s, config.seed, config.runup,
                               config.N + config.K)
    frames = run_tangent_stack(traj, model, s, param_index,
                               diagnostics=config.diagnostics)
    stable, se_s = stable_contribution(frames[:config.N], traj, J)
    unstable, se_u, per_k = unstable_contribution(frames, traj, J, config.K,
                                                  centered=config.centered)
    return SensitivityResult(
        param_index=param_index, s=s, K=config.K, N=config.N, seed=config.seed,
        stable=stable, unstable=unstable, stderr_stable=se_s,
        stderr_unstable=se_u, per_k_terms=per_k, centered=config.centered,
    )


@dataclass
class DirectRuelleResult:
    """Ensemble-tangent evaluation of the response series, term by term."""

    value: float
    per_k_means: np.ndarray
    per_k_variances: np.ndarray
    K: int
    ensemble_size: int
    seed: int


def direct_ruelle_estimate(model: MapModel, s: np.ndarray, param_index: int,
                           J: Observable, K: int, ensemble_size: int,
                           seed: int, runup: int = 1000) -> DirectRuelleResult:
    """Sample average of conventional-tangent sensitivities, per lag k.

    Each ensemble member starts from an independent post-run-up state and
    carries the conventional inhomogeneous tangent u_{n+1} = J_n u_n + chi;
    the lag-k term is the increment of dJ(x_k) . u_k, an unbiased sample of
    the k-th term of the response series.  The per-term ensemble variance
    grows like exp(2 lambda_1 k), which is this baseline's pathology.
    """
    s = model.validate_params(s)
    if ensemble_size < 2:
        raise ValueError("ensemble_size must be >= 2")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    xs = np.stack([model.sample_state(rng) for _ in range(ensemble_size)])
    for _ in range(runup):
        xs = model.apply_map_batch(xs, s)

    u = np.zeros_like(xs)
    d_prev = np.zeros(ensemble_size)
    terms = np.empty((K, ensemble_size))
    for k in range(K):
        jac = model.jacobian_batch(xs, s)
        chi = model.parameter_velocity_batch(xs, s, param_index)
        u = np.einsum("nij,nj->ni", jac, u) + chi
        xs = model.apply_map_batch(xs, s)
        d_cur = np.einsum("ni,ni->n", J.grad(xs), u)
        terms[k] = d_cur - d_prev
        d_prev = d_cur

    means = terms.mean(axis=1)
    variances = terms.var(axis=1, ddof=1)
    return DirectRuelleResult(
        value=float(means.sum()), per_k_means=means, per_k_variances=variances,
        K=K, ensemble_size=ensemble_size, seed=int(seed),
    )
