"""Two-band Bloch models H(k) = eps_k * 1 + h_k . sigma.

Energies are in units of the hopping scale (J = t = 1).  Every function here
is vectorised over arrays of (kx, ky) and pure.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import ValidationError

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class HVectorField:
    """k -> (eps_k, h_k) together with its analytic k-gradient.

    ``h_func(kx, ky)`` returns an array of shape (3, *k.shape);
    ``grad_func(kx, ky)`` returns (d_kx h, d_ky h), each of that shape.
    """

    name: str
    params: dict
    h_func: Callable
    grad_func: Callable
    eps_func: Callable | None = None
    label: str = field(default="", compare=False)

    def eval(self, kx, ky):
        kx = np.asarray(kx, dtype=float)
        ky = np.asarray(ky, dtype=float)
        h = np.asarray(self.h_func(kx, ky), dtype=float)
        if self.eps_func is None:
            eps = np.zeros(np.broadcast(kx, ky).shape)
        else:
            eps = np.asarray(self.eps_func(kx, ky), dtype=float)
        return eps, h

    def h(self, kx, ky):
        return self.eval(kx, ky)[1]

    def grad(self, kx, ky):
        kx = np.asarray(kx, dtype=float)
        ky = np.asarray(ky, dtype=float)
        dx, dy = self.grad_func(kx, ky)
        return np.asarray(dx, dtype=float), np.asarray(dy, dtype=float)

    def hamiltonian(self, kx, ky):
        """2x2 Bloch matrix at a single k point."""
        eps, h = self.eval(kx, ky)
        return float(eps) * np.eye(2) + sum(float(h[i]) * PAULI[i] for i in range(3))

    def hamiltonian_derivatives(self, kx, ky):
        dx, dy = self.grad(kx, ky)
        return (
            sum(float(dx[i]) * PAULI[i] for i in range(3)),
            sum(float(dy[i]) * PAULI[i] for i in range(3)),
        )

    def describe(self):
        return {"model": self.name, "params": dict(self.params)}


@dataclass(frozen=True)
class BandPair:
    E_minus: np.ndarray
    E_plus: np.ndarray

    @property
    def gap(self):
        return self.E_plus - self.E_minus


def _finite(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"parameter {name} must be a real number, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(f"parameter {name} must be finite, got {value}")
    return value


def qwz_field(u):
    """Qi-Wu-Zhang model, h = (sin kx, sin ky, u + cos kx + cos ky)."""
    u = _finite("u", u)

    def h(kx, ky):
        return np.stack(np.broadcast_arrays(np.sin(kx), np.sin(ky), u + np.cos(kx) + np.cos(ky)))

    def grad(kx, ky):
        zero = np.zeros(np.broadcast(kx, ky).shape)
        cx, cy = np.broadcast_arrays(np.cos(kx), np.cos(ky))
        sx, sy = np.broadcast_arrays(np.sin(kx), np.sin(ky))
        return np.stack([cx, zero, -sx]), np.stack([zero, cy, -sy])

    return HVectorField("qwz", {"u": u}, h, grad, label=f"qwz(u={u:g})")


def sticlet_field(t2):
    """High-Chern model with t1 = t3 = 1:
    h = 2 (cos kx, cos ky, t2 cos(kx + ky) + sin kx + sin ky).
    """
    t2 = _finite("t2", t2)

    def h(kx, ky):
        hz = t2 * np.cos(kx + ky) + np.sin(kx) + np.sin(ky)
        return 2.0 * np.stack(np.broadcast_arrays(np.cos(kx), np.cos(ky), hz))

    def grad(kx, ky):
        zero = np.zeros(np.broadcast(kx, ky).shape)
        s = t2 * np.sin(kx + ky)
        dx = np.stack(np.broadcast_arrays(-np.sin(kx), zero, np.cos(kx) - s))
        dy = np.stack(np.broadcast_arrays(zero, -np.sin(ky), np.cos(ky) - s))
        return 2.0 * dx, 2.0 * dy

    return HVectorField("sticlet", {"t2": t2}, h, grad, label=f"sticlet(t2={t2:g})")


MODELS = {
    "qwz": (qwz_field, ("u",)),
    "sticlet": (sticlet_field, ("t2",)),
}


def get_model(name, params):
    """Build a model from its registry name and a parameter mapping."""
    try:
        factory, names = MODELS[name]
    except KeyError:
        raise ValidationError(f"unknown model {name!r}; choose from {sorted(MODELS)}")
    params = dict(params or {})
    missing = [p for p in names if p not in params]
    extra = sorted(set(params) - set(names))
    if missing or extra:
        raise ValidationError(
            f"model {name!r} takes parameters {list(names)}; missing {missing}, unexpected {extra}"
        )
    return factory(*(params[p] for p in names))


def band_pair(field, kx, ky):
    eps, h = field.eval(kx, ky)
    norm = np.linalg.norm(h, axis=0)
    return BandPair(eps - norm, eps + norm)


def band_gap(field, grid):
    """Direct gap min_k 2|h_k|: grid minimum followed by one local refinement."""
    if min(grid.nx, grid.ny) < 64:
        raise ValidationError("band_gap needs at least 64 nodes per axis")
    kx, ky = grid.mesh()
    norm = np.linalg.norm(field.h(kx, ky), axis=0)
    idx = np.unravel_index(np.argmin(norm), norm.shape)
    best = float(norm[idx])
    if best == 0.0:
        return 0.0

    def objective(k):
        h = field.h(k[0], k[1])
        dx, dy = field.grad(k[0], k[1])
        return float(h @ h), 2.0 * np.array([h @ dx, h @ dy])

    start = np.array([kx[idx], ky[idx]])
    res = minimize(objective, start, jac=True, method="L-BFGS-B")
    if res.success or res.fun < best**2:
        best = min(best, math.sqrt(max(float(res.fun), 0.0)))
    return 2.0 * best
