"""Shared test utilities: torus-aware finite-difference oracles for the
analytic map derivatives, and small custom models."""
import numpy as np

from spacesplit import BakerMap
from spacesplit.dynamics import wrap_delta


def fd_jacobian(model, x, s, h=1e-5):
    m = model.dim
    out = np.empty((m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        d = wrap_delta(model.apply_map(x + e, s) - model.apply_map(x - e, s))
        out[:, j] = d / (2 * h)
    return out


def fd_hessian_tensor(model, x, s, h=1e-5):
    """T[i, j, k] = d^2 phi_i / dx_j dx_k via central differences of the Jacobian."""
    m = model.dim
    out = np.empty((m, m, m))
    for k in range(m):
        e = np.zeros(m)
        e[k] = h
        dj = (model.jacobian(x + e, s) - model.jacobian(x - e, s)) / (2 * h)
        out[:, :, k] = dj
    return out


def fd_parameter_velocity(model, x, s, k, h=1e-5):
    e = np.zeros(model.param_dim)
    e[k] = h
    d = wrap_delta(model.apply_map(x, s + e) - model.apply_map(x, s - e))
    return d / (2 * h)


def fd_mixed_derivative(model, x, s, k, h=1e-5):
    e = np.zeros(model.param_dim)
    e[k] = h
    return (model.jacobian(x, s + e) - model.jacobian(x, s - e)) / (2 * h)


def random_interior_points(rng, n, margin=1e-3):
    """Random states away from the branch boundary x1 in {0, pi} where the
    map's floor term switches."""
    pts = []
    while len(pts) < n:
        x = rng.uniform(0.0, 2 * np.pi, 2)
        r = x[0] % np.pi
        if min(r, np.pi - r) > margin:
            pts.append(x)
    return np.array(pts)


class InactiveParamBaker(BakerMap):
    """Baker map with a fifth parameter that does nothing (chi = 0)."""

    param_dim = 5
    param_names = ("s1", "s2", "s3", "s4", "dummy")

    def apply_map(self, x, s):
        return super().apply_map(x, s[:4])

    def apply_map_batch(self, xs, s):
        return super().apply_map_batch(xs, s[:4])

    def jacobian(self, x, s):
        return super().jacobian(x, s[:4])

    def jacobian_batch(self, xs, s):
        return super().jacobian_batch(xs, s[:4])

    def second_derivative(self, x, s, u, v):
        return super().second_derivative(x, s[:4], u, v)

    def parameter_velocity(self, x, s, k):
        if k == 4:
            return np.zeros(2)
        return super().parameter_velocity(x, s[:4], k)

    def parameter_velocity_batch(self, xs, s, k):
        if k == 4:
            return np.zeros_like(xs)
        return super().parameter_velocity_batch(xs, s[:4], k)

    def mixed_derivative(self, x, s, k):
        if k == 4:
            return np.zeros((2, 2))
        return super().mixed_derivative(x, s[:4], k)


class CollapsingMap(BakerMap):
    """Degenerate test model: the Jacobian annihilates every direction."""

    def jacobian(self, x, s):
        return np.zeros((2, 2))
