"""Map models, trajectory generation and empirical-measure histograms.

A map model is a parameterized diffeomorphism of a torus together with its
analytic first/second/mixed derivatives and the per-parameter perturbation
field.  The built-in benchmark is a four-parameter perturbation family of
the standard Baker's map on [0, 2pi)^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError

TWO_PI = 2.0 * math.pi


def wrap_angle(value: float) -> float:
    """Reduce a scalar into [0, 2*pi).  `%` may round up to exactly 2*pi."""
    out = value % TWO_PI
    if out >= TWO_PI:
        out = 0.0
    return out


def wrap_delta(delta: np.ndarray) -> np.ndarray:
    """Shortest torus representative of a coordinate difference, in [-pi, pi)."""
    return (np.asarray(delta) + math.pi) % TWO_PI - math.pi


class MapModel:
    """Base class for parameterized torus maps with analytic derivatives.

    Subclasses fix the state dimension `dim` and parameter count `param_dim`
    and implement the five evaluation methods below on single points
    (1-D arrays of length `dim`).  Batched variants have generic row-loop
    fallbacks; override them when a vectorized form exists.
    """

    dim: int = 0
    param_dim: int = 0
    name: str = "map"

    def apply_map(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Image point phi_s(x), wrapped into the domain."""
        raise NotImplementedError

    def jacobian(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        """d(phi_s) at x, as a (dim, dim) matrix."""
        raise NotImplementedError

    def second_derivative(self, x: np.ndarray, s: np.ndarray,
                          u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Bilinear form d2(phi_s)_x(u, v); symmetric in (u, v)."""
        raise NotImplementedError

    def parameter_velocity(self, x: np.ndarray, s: np.ndarray, k: int) -> np.ndarray:
        """d(phi_s)(x)/d s_k.  Attach to the image point phi_s(x)."""
        raise NotImplementedError

    def mixed_derivative(self, x: np.ndarray, s: np.ndarray, k: int) -> np.ndarray:
        """d/d s_k of the Jacobian at x, as a (dim, dim) matrix."""
        raise NotImplementedError

    def sample_state(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform draw on the domain (the physical-measure run-up start)."""
        return rng.uniform(0.0, TWO_PI, size=self.dim)

    # --- batched fallbacks (rows of xs are states) ---

    def apply_map_batch(self, xs: np.ndarray, s: np.ndarray) -> np.ndarray:
        return np.stack([self.apply_map(x, s) for x in xs])

    def jacobian_batch(self, xs: np.ndarray, s: np.ndarray) -> np.ndarray:
        return np.stack([self.jacobian(x, s) for x in xs])

    def parameter_velocity_batch(self, xs: np.ndarray, s: np.ndarray, k: int) -> np.ndarray:
        return np.stack([self.parameter_velocity(x, s, k) for x in xs])

    def validate_params(self, s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if s.shape != (self.param_dim,):
            raise ValueError(f"expected {self.param_dim} parameters, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("parameter vector must be finite")
        return s


class BakerMap(MapModel):
    """Perturbed Baker's map on the torus [0, 2pi)^2.

        x1' = 2 x1 + (s1 + s2 sin(2 x2)/2) sin(x1)                 (mod 2pi)
        x2' = (x2 + (s4 + s3 sin(x1)) sin(2 x2))/2 + pi*floor(x1/pi)  (mod 2pi)

    At s = 0 this is the standard Baker's map: uniform expansion by 2 along
    x1, contraction by 1/2 along x2, two branches split at x1 = pi.  The
    branch term is evaluated on the half-open branch containing x1; the
    branch boundary has zero measure and is ignored for averaging.
    """

    dim = 2
    param_dim = 4
    name = "baker"
    # parameter names s1..s4 map to indices 0..3
    param_names = ("s1", "s2", "s3", "s4")

    @staticmethod
    def _check_state(x1: float, x2: float) -> None:
        if not (math.isfinite(x1) and math.isfinite(x2)):
            raise InvalidStateError(f"non-finite state ({x1}, {x2})")

    def apply_map(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        x1, x2 = float(x[0]), float(x[1])
        self._check_state(x1, x2)
        s1, s2, s3, s4 = float(s[0]), float(s[1]), float(s[2]), float(s[3])
        branch = math.floor(x1 / math.pi)
        y1 = 2.0 * x1 + (s1 + s2 * math.sin(2.0 * x2) / 2.0) * math.sin(x1)
        y2 = (x2 + (s4 + s3 * math.sin(x1)) * math.sin(2.0 * x2)) / 2.0 + math.pi * branch
        return np.array([wrap_angle(y1), wrap_angle(y2)])

    def jacobian(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        x1, x2 = float(x[0]), float(x[1])
        self._check_state(x1, x2)
        s1, s2, s3, s4 = float(s[0]), float(s[1]), float(s[2]), float(s[3])
        sin1, cos1 = math.sin(x1), math.cos(x1)
        sin2, cos2 = math.sin(2.0 * x2), math.cos(2.0 * x2)
        return np.array([
            [2.0 + (s1 + s2 * sin2 / 2.0) * cos1, s2 * cos2 * sin1],
            [s3 * cos1 * sin2 / 2.0, (1.0 + 2.0 * (s4 + s3 * sin1) * cos2) / 2.0],
        ])

    def _hessian(self, x: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Full (2, 2, 2) tensor of second partials, T[i, j, k] = d2 phi_i / dx_j dx_k."""
        x1, x2 = float(x[0]), float(x[1])
        s1, s2, s3, s4 = float(s[0]), float(s[1]), float(s[2]), float(s[3])
        sin1, cos1 = math.sin(x1), math.cos(x1)
        sin2, cos2 = math.sin(2.0 * x2), math.cos(2.0 * x2)
        t = np.empty((2, 2, 2))
        t[0, 0, 0] = -(s1 + s2 * sin2 / 2.0) * sin1
        t[0, 0, 1] = t[0, 1, 0] = s2 * cos2 * cos1
        t[0, 1, 1] = -2.0 * s2 * sin2 * sin1
        t[1, 0, 0] = -s3 * sin1 * sin2 / 2.0
        t[1, 0, 1] = t[1, 1, 0] = s3 * cos1 * cos2
        t[1, 1, 1] = -2.0 * (s4 + s3 * sin1) * sin2
        return t

    def second_derivative(self, x: np.ndarray, s: np.ndarray,
                          u: np.ndarray, v: np.ndarray) -> np.ndarray:
        t = self._hessian(x, s)
        return np.einsum("ijk,j,k->i", t, np.asarray(u, dtype=float), np.asarray(v, dtype=float))

    def parameter_velocity(self, x: np.ndarray, s: np.ndarray, k: int) -> np.ndarray:
        x1, x2 = float(x[0]), float(x[1])
        self._check_state(x1, x2)
        if k == 0:
            return np.array([math.sin(x1), 0.0])
        if k == 1:
            return np.array([math.sin(x1) * math.sin(2.0 * x2) / 2.0, 0.0])
        if k == 2:
            return np.array([0.0, math.sin(x1) * math.sin(2.0 * x2) / 2.0])
        if k == 3:
            return np.array([0.0, math.sin(2.0 * x2) / 2.0])
        raise IndexError(f"parameter index {k} out of range for param_dim=4")

    def mixed_derivative(self, x: np.ndarray, s: np.ndarray, k: int) -> np.ndarray:
        x1, x2 = float(x[0]), float(x[1])
        self._check_state(x1, x2)
        sin1, cos1 = math.sin(x1), math.cos(x1)
        sin2, cos2 = math.sin(2.0 * x2), math.cos(2.0 * x2)
        if k == 0:
            return np.array([[cos1, 0.0], [0.0, 0.0]])
        if k == 1:
            return np.array([[sin2 * cos1 / 2.0, cos2 * sin1], [0.0, 0.0]])
        if k == 2:
            return np.array([[0.0, 0.0], [sin2 * cos1 / 2.0, sin1 * cos2]])
        if k == 3:
            return np.array([[0.0, 0.0], [0.0, cos2]])
        raise IndexError(f"parameter index {k} out of range for param_dim=4")

    # --- vectorized variants used by ensemble averaging and baselines ---

    def apply_map_batch(self, xs: np.ndarray, s: np.ndarray) -> np.ndarray:
        x1, x2 = xs[:, 0], xs[:, 1]
        s1, s2, s3, s4 = s
        branch = np.floor(x1 / math.pi)
        y1 = 2.0 * x1 + (s1 + s2 * np.sin(2.0 * x2) / 2.0) * np.sin(x1)
        y2 = (x2 + (s4 + s3 * np.sin(x1)) * np.sin(2.0 * x2)) / 2.0 + math.pi * branch
        out = np.stack([y1 % TWO_PI, y2 % TWO_PI], axis=1)
        out[out >= TWO_PI] = 0.0
        return out

    def jacobian_batch(self, xs: np.ndarray, s: np.ndarray) -> np.ndarray:
        x1, x2 = xs[:, 0], xs[:, 1]
        s1, s2, s3, s4 = s
        sin1, cos1 = np.sin(x1), np.cos(x1)
        sin2, cos2 = np.sin(2.0 * x2), np.cos(2.0 * x2)
        jac = np.empty((xs.shape[0], 2, 2))
        jac[:, 0, 0] = 2.0 + (s1 + s2 * sin2 / 2.0) * cos1
        jac[:, 0, 1] = s2 * cos2 * sin1
        jac[:, 1, 0] = s3 * cos1 * sin2 / 2.0
        jac[:, 1, 1] = (1.0 + 2.0 * (s4 + s3 * sin1) * cos2) / 2.0
        return jac

    def parameter_velocity_batch(self, xs: np.ndarray, s: np.ndarray, k: int) -> np.ndarray:
        x1, x2 = xs[:, 0], xs[:, 1]
        zeros = np.zeros_like(x1)
        if k == 0:
            return np.stack([np.sin(x1), zeros], axis=1)
        if k == 1:
            return np.stack([np.sin(x1) * np.sin(2.0 * x2) / 2.0, zeros], axis=1)
        if k == 2:
            return np.stack([zeros, np.sin(x1) * np.sin(2.0 * x2) / 2.0], axis=1)
        if k == 3:
            return np.stack([zeros, np.sin(2.0 * x2) / 2.0], axis=1)
        raise IndexError(f"parameter index {k} out of range for param_dim=4")


@dataclass(frozen=True)
class Trajectory:
    """An orbit x_{-runup} ... x_{length-1} sampled after a run-up.

    Row i of `points` holds x_{i - runup}; the first `runup` rows are the
    burn-in discarded from averages.  The seed that drew x_{-runup} is
    recorded so the orbit can be regenerated bit-identically.
    """

    points: np.ndarray
    runup: int
    length: int
    seed: int

    def __post_init__(self):
        assert self.points.shape[0] == self.runup + self.length

    @property
    def used(self) -> np.ndarray:
        """The `length` post-run-up states (rows n = 0 ... length-1)."""
        return self.points[self.runup:]

    def point(self, n: int) -> np.ndarray:
        """State x_n, for n in [-runup, length)."""
        return self.points[self.runup + n]

    def to_csv(self, path) -> None:
        """Export as `n,x1,x2` rows with indices starting at -runup."""
        with open(path, "w") as fh:
            cols = ",".join(f"x{i+1}" for i in range(self.points.shape[1]))
            fh.write(f"n,{cols}\n")
            for i, row in enumerate(self.points):
                vals = ",".join(f"{v:.17g}" for v in row)
                fh.write(f"{i - self.runup},{vals}\n")


def generate_trajectory(model: MapModel, s: np.ndarray, seed: int,
                        runup: int, length: int) -> Trajectory:
    """Iterate the map from a seeded uniform draw on the domain.

    The initial state is drawn uniformly (physicality of the SRB measure
    makes Lebesgue-a.e. starts equivalent); `runup` steps are kept as
    burn-in rows and `length` further states are used for averaging.
    """
    if runup < 0:
        raise ValueError("runup must be >= 0")
    if length < 1:
        raise ValueError("length must be >= 1")
    s = model.validate_params(s)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    x0 = model.sample_state(rng)

    n_total = runup + length
    if type(model) is BakerMap:
        from . import kernels
        points = kernels.baker_trajectory(x0, s, n_total)
        if np.isnan(points[0, 0]):
            raise InvalidStateError("trajectory left the domain (NaN state)")
    else:
        points = np.empty((n_total, model.dim))
        points[0] = x0
        for i in range(1, n_total):
            points[i] = model.apply_map(points[i - 1], s)
    return Trajectory(points=points, runup=runup, length=length, seed=int(seed))


def srb_histogram(trajectory: Trajectory, bins_x: int, bins_y: int) -> np.ndarray:
    """Normalized 2-D occupancy histogram of the post-run-up states.

    Returns bin probabilities over [0, 2pi)^2 summing to 1.
    """
    if trajectory.points.shape[1] != 2:
        raise ValueError("srb_histogram requires a 2-D state space")
    if bins_x < 1 or bins_y < 1:
        raise ValueError("bin counts must be >= 1")
    pts = trajectory.used
    hist, _, _ = np.histogram2d(
        pts[:, 0], pts[:, 1], bins=[bins_x, bins_y],
        range=[[0.0, TWO_PI], [0.0, TWO_PI]],
    )
    return hist / pts.shape[0]


MAPS: dict[str, type[MapModel]] = {"baker": BakerMap}
