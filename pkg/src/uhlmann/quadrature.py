"""Periodic Brillouin-zone quadrature and 1D frequency integration."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import ValidationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class BZGrid:
    """Uniform nx x ny grid on [0, 2pi)^2; nodes k = 2pi j / n, no endpoint."""

    nx: int
    ny: int | None = None

    def __post_init__(self):
        if self.ny is None:
            object.__setattr__(self, "ny", self.nx)
        for n in (self.nx, self.ny):
            if int(n) != n or n < 8:
                raise ValidationError(f"grid size must be an integer >= 8, got {n}")

    @property
    def spacing(self):
        return TWO_PI / self.nx, TWO_PI / self.ny

    @property
    def weight(self):
        dx, dy = self.spacing
        return dx * dy

    @property
    def size(self):
        return self.nx * self.ny

    def axes(self):
        return TWO_PI * np.arange(self.nx) / self.nx, TWO_PI * np.arange(self.ny) / self.ny

    def mesh(self):
        kx, ky = self.axes()
        return np.meshgrid(kx, ky, indexing="ij")

    def nodes(self):
        kx, ky = self.mesh()
        yield from zip(kx.ravel(), ky.ravel())

    def refined(self):
        return BZGrid(2 * self.nx, 2 * self.ny)


def grid_values(f, grid, workers=1):
    """Evaluate a vectorised f(kx, ky) on every node, in row blocks when workers > 1.

    Each node's value does not depend on the blocking, so the returned array is
    identical for any worker count.
    """
    kx_axis, ky_axis = grid.axes()
    if workers <= 1:
        kx, ky = np.meshgrid(kx_axis, ky_axis, indexing="ij")
        return np.asarray(f(kx, ky))
    blocks = np.array_split(np.arange(grid.nx), min(workers, grid.nx))

    def run(rows):
        kx, ky = np.meshgrid(kx_axis[rows], ky_axis, indexing="ij")
        return np.asarray(f(kx, ky))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, blocks))
    return np.concatenate(parts, axis=0)


def tree_sum(values):
    # numpy reduces contiguous 1D float arrays pairwise; the order depends only on length
    return np.sum(np.ascontiguousarray(values).ravel())


def bz_integrate(f, grid, workers=1):
    """Periodic trapezoid rule: (2pi/nx)(2pi/ny) * sum_nodes f.

    ``f`` is either a vectorised callable f(kx, ky) or an array of node values.
    """
    values = f if isinstance(f, np.ndarray) else grid_values(f, grid, workers)
    if values.shape != (grid.nx, grid.ny):
        raise ValidationError(f"expected node values of shape {(grid.nx, grid.ny)}, got {values.shape}")
    if not np.all(np.isfinite(values)):
        raise ValidationError("integrand is not finite on every grid node")
    return grid.weight * tree_sum(values)


def omega_integrate(f, nodes):
    """Composite Simpson on sorted (possibly non-uniform) nodes.

    Returns (integral, error) where the error is the change against the same
    rule on every other node.
    """
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or nodes.size < 3:
        raise ValidationError("need at least three frequency nodes")
    if np.any(np.diff(nodes) <= 0):
        raise ValidationError("frequency nodes must be strictly increasing")
    values = np.asarray(f(nodes) if callable(f) else f, dtype=float)
    if values.shape != nodes.shape:
        raise ValidationError("integrand values do not match the nodes")
    if not np.all(np.isfinite(values)):
        raise ValidationError("integrand is not finite on every frequency node")
    if nodes.size % 2 == 0:
        # keep the halved rule on the same interval
        coarse_idx = np.r_[np.arange(0, nodes.size - 1, 2), nodes.size - 1]
    else:
        coarse_idx = np.arange(0, nodes.size, 2)
    fine = simpson(values, x=nodes)
    if coarse_idx.size >= 3:
        coarse = simpson(values[coarse_idx], x=nodes[coarse_idx])
        err = abs(fine - coarse)
    else:
        err = abs(fine)
    return float(fine), float(err)


def sinh_nodes(scale, stop, step=0.05, start=0.0):
    """Nodes x = scale * sinh(t): linear spacing ~scale*step near 0,
    geometric (ratio e**step) once x >> scale."""
    if stop <= start:
        return np.array([start])
    t0 = math.asinh(start / scale)
    t1 = math.asinh(stop / scale)
    n = max(2, 2 * math.ceil((t1 - t0) / step / 2))
    return scale * np.sinh(np.linspace(t0, t1, n + 1))


def uniform_nodes(start, stop, step):
    n = max(2, 2 * math.ceil((stop - start) / step / 2))
    return np.linspace(start, stop, n + 1)


def join_nodes(*segments):
    """Concatenate contiguous node segments, dropping the shared endpoints."""
    out = [np.asarray(segments[0], dtype=float)]
    for seg in segments[1:]:
        seg = np.asarray(seg, dtype=float)
        if seg.size == 0:
            continue
        if abs(seg[0] - out[-1][-1]) > 1e-12 * max(1.0, abs(seg[0])):
            raise ValidationError("node segments are not contiguous")
        out.append(seg[1:])
    return np.concatenate(out)


def symmetric_nodes(positive):
    """Mirror nodes on [0, W] to [-W, W] keeping an exact 0."""
    positive = np.asarray(positive, dtype=float)
    if positive[0] != 0.0:
        raise ValidationError("positive half must start at 0")
    return np.concatenate([-positive[:0:-1], positive])
