"""Thermal kernel K_beta, dynamical transverse conductivity and the
frequency-side Uhlmann number.

Units: hbar = k_B = e = 1, so e^2/h = 1/(2 pi).  Conductivities are returned in
e^2/h unless ``units="e2/hbar"``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .geometry import _norm, berry_curvature, occupation_difference
from .quadrature import TWO_PI, grid_values, join_nodes, omega_integrate, sinh_nodes, uniform_nodes
from .special import APERY, ZETA5, trigamma

UNITS = {"e2/h": TWO_PI, "e2/hbar": 1.0}
K0_COEFF = 14.0 * APERY / math.pi**4


class PVAccuracyWarning(UserWarning):
    """The principal-value error estimate dominates a conductivity value."""


@dataclass
class SpectralTrace:
    omegas: np.ndarray
    values: np.ndarray
    beta: float
    errors: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.omegas = np.asarray(self.omegas, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.errors is None:
            self.errors = np.zeros_like(self.values)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.omegas.ndim != 1 or self.omegas.shape != self.values.shape:
            raise ValidationError("omegas and values must be 1D arrays of equal length")
        if np.any(np.diff(self.omegas) <= 0):
            raise ValidationError("omegas must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("trace contains non-finite values")

    def to_csv(self, path):
        from .io import write_table

        meta = dict(self.meta, beta=self.beta)
        write_table(path, ["omega", "value", "error_estimate"], zip(self.omegas, self.values, self.errors), meta)

    @classmethod
    def from_csv(cls, path):
        from .io import read_table

        meta, columns, rows = read_table(path)
        if columns != ["omega", "value", "error_estimate"]:
            raise ValueError(f"unexpected columns {columns}")
        data = np.array(rows, dtype=float)
        beta = meta.pop("beta")
        beta = math.inf if beta == "inf" else float(beta)
        return cls(data[:, 0], data[:, 1], beta, data[:, 2], meta)


def _require_finite_beta(ctx):
    if ctx.zero_temperature:
        raise ValidationError("K_beta needs a finite beta (it tends to delta(omega) as beta -> inf)")


def kernel_K(omega, ctx):
    """K_beta(w) = (2 / (pi^3 w)) * (-Im psi1(1/2 + i beta w / 2pi)),
    with K_beta(0) = 14 beta zeta(3) / pi^4."""
    _require_finite_beta(ctx)
    beta = ctx.beta
    w = np.asarray(omega, dtype=float)
    x = beta * w / TWO_PI
    out = np.empty_like(w)
    small = np.abs(x) < 1e-4
    # -Im psi1(1/2 + ix) / x = 14 zeta(3) - 124 zeta(5) x^2 + O(x^4)
    xs = x[small]
    out[small] = beta * K0_COEFF * (1.0 - (124.0 * ZETA5 / (14.0 * APERY)) * xs**2)
    wl = w[~small]
    if wl.size:
        out[~small] = -2.0 * trigamma(0.5 + 1j * x[~small]).imag / (math.pi**3 * wl)
    return out if out.ndim else float(out)


def kernel_trace(ctx, omegas):
    omegas = np.asarray(omegas, dtype=float)
    return SpectralTrace(omegas, kernel_K(omegas, ctx), ctx.beta, meta={"quantity": "K_beta", "units": "1/frequency"})


class ConductivityIntegrand:
    """Per-node data of the transverse-conductivity BZ integral.

    sigma(w) = -(e^2/hbar) (1/N) sum_k w_k^2 / (w_k^2 - w^2) * occ_k * F_k,
    with the transition frequency w_k = E_+ - E_- = 2|h_k|.
    """

    def __init__(self, field, ctx, grid, workers=1):
        self.field = field
        self.ctx = ctx
        self.grid = grid

        def node_data(kx, ky):
            eps, h = field.eval(kx, ky)
            norm = _norm(h)
            weight = occupation_difference(eps, norm, ctx) * berry_curvature(field, kx, ky)
            return np.stack([2.0 * norm, weight], axis=-1)

        data = grid_values(node_data, grid, workers).reshape(-1, 2)
        self.freqs = np.ascontiguousarray(data[:, 0])
        self.weights = np.ascontiguousarray(data[:, 1])
        self.freqs_sq = self.freqs**2

    @property
    def band(self):
        return float(self.freqs.min()), float(self.freqs.max())

    def default_eta(self):
        """Regulator tied to how finely the grid samples the transition band
        (about twice the typical jump of w_k between neighbouring nodes), kept
        below a quarter of the gap."""
        n = min(self.grid.nx, self.grid.ny)
        lo, hi = self.band
        return max(1e-3, min(2.0 * (hi - lo) / n, 0.25 * lo))

    def static(self):
        """sigma(0) in e^2/hbar: no pole, no regulator."""
        return -float(np.sum(self.weights)) / self.weights.size

    def regularized(self, omegas, eta, chunk=None):
        """Re of the sum with w -> w + i eta, in e^2/hbar."""
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        nk = self.freqs.size
        chunk = chunk or max(1, int(4_000_000 // nk))
        out = np.empty(omegas.size)
        a2 = self.freqs_sq
        for start in range(0, omegas.size, chunk):
            w = omegas[start : start + chunk, None]
            x = a2 - w * w + eta * eta
            y = 2.0 * w * eta
            terms = a2 * x / (x * x + y * y) * self.weights
            out[start : start + chunk] = -np.sum(terms, axis=1) / nk
        return out

    def extrapolated(self, omegas, eta=None):
        """Richardson eta -> 0 from (eta, 2 eta): returns (value, error) in e^2/hbar."""
        eta = self.default_eta() if eta is None else eta
        s1 = self.regularized(omegas, eta)
        s2 = self.regularized(omegas, 2.0 * eta)
        return 2.0 * s1 - s2, np.abs(s1 - s2)


def _unit_factor(units):
    try:
        return UNITS[units]
    except KeyError:
        raise ValidationError(f"units must be one of {sorted(UNITS)}")


def conductivity_trace(field, omegas, ctx, grid, eta=None, units="e2/h", workers=1):
    """sigma~_xy on a set of frequencies, with PV error estimates."""
    factor = _unit_factor(units)
    integrand = ConductivityIntegrand(field, ctx, grid, workers)
    omegas = np.asarray(omegas, dtype=float)
    values, errors = integrand.extrapolated(omegas, eta)
    lo, hi = integrand.band
    inside = (np.abs(omegas) >= lo) & (np.abs(omegas) <= hi)
    bad = inside & (errors > 0.1 * np.maximum(np.abs(values), 1e-3))
    if np.any(bad):
        warnings.warn(
            f"PV regularisation dominates the error at {int(bad.sum())} in-band frequencies",
            PVAccuracyWarning,
            stacklevel=2,
        )
    meta = dict(
        field.describe(),
        quantity="sigma_xy",
        units=units,
        ensemble=ctx.ensemble,
        grid=grid.nx,
        pv="richardson(eta, 2 eta)",
        eta=integrand.default_eta() if eta is None else eta,
        band=[lo, hi],
    )
    return SpectralTrace(omegas, factor * values, ctx.beta, factor * errors, meta)


def transverse_conductivity(field, omega, ctx, grid, eta=None, units="e2/h"):
    """Real antisymmetric transverse conductivity at one frequency."""
    factor = _unit_factor(units)
    integrand = ConductivityIntegrand(field, ctx, grid)
    if omega == 0:
        return factor * integrand.static()
    value, _ = integrand.extrapolated([omega], eta)
    return factor * float(value[0])


def tknn_nodes(beta, band, eta, max_nodes=660):
    """Positive frequency nodes for int K sigma dw.

    sinh-mapped below the transition band (dense at the kernel peak), uniform
    with spacing eta/2 across the band, sinh-mapped again above it.
    """
    lo, hi = band
    scale = TWO_PI / beta / 8.0
    a = max(lo - 6.0 * eta, 0.0)
    b = hi + 6.0 * eta
    stop = max(8.0 * hi, 400.0 / beta)
    below = sinh_nodes(scale, a, step=0.08) if a > 0 else np.array([0.0])
    above = sinh_nodes(scale, stop, step=0.08, start=b)
    room = max_nodes - below.size - above.size
    step = max(eta / 2.0, (b - a) / max(room, 16))
    return join_nodes(below, uniform_nodes(a, b, step), above)


def tknn_frequency_side(field, ctx, grid, omega_grid=None, eta=None, tol=0.05, workers=1):
    """n_U from -2pi * int dw sigma~_xy(w) K_beta(w) (e = hbar = 1).

    sigma~ is evaluated with regulators eta, 2 eta and 4 eta on the same nodes;
    the (eta, 2 eta) Richardson value is returned and the (2 eta, 4 eta) one
    bounds its residual.  Returns (n_U, error_estimate) and raises
    NumericalError if the estimate exceeds ``tol``.
    """
    integrand = ConductivityIntegrand(field, ctx, grid, workers)
    if ctx.zero_temperature:
        return -TWO_PI * integrand.static(), 0.0
    eta = integrand.default_eta() if eta is None else eta
    if omega_grid is None:
        nodes = tknn_nodes(ctx.beta, integrand.band, eta)
    else:
        nodes = np.asarray(omega_grid, dtype=float)
        if nodes[0] != 0.0:
            raise ValidationError("omega_grid must start at 0 (the integrand is even)")
    k = kernel_K(nodes, ctx)

    def half_line(eta_):
        sigma = integrand.regularized(nodes, eta_)
        body, err = omega_integrate(k * sigma, nodes)
        # beyond the last node sigma ~ w^-2 and K ~ w^-2
        tail = k[-1] * sigma[-1] * nodes[-1] / 3.0
        return body + tail, err + abs(tail)

    (i1, e1), (i2, _), (i4, _) = (half_line(m * eta) for m in (1.0, 2.0, 4.0))
    r1 = 2.0 * i1 - i2
    r2 = 2.0 * i2 - i4
    n_u = -2.0 * TWO_PI * r1
    err = 2.0 * TWO_PI * (abs(r1 - r2) / 3.0 + 3.0 * e1)
    if err > tol:
        raise NumericalError(f"frequency-side quadrature error {err:.3g} exceeds {tol}")
    return float(n_u), float(err)


def efield_muc_report(n_u):
    """MUC with respect to (E_x, E_y): -2 pi n_U in units e^2/hbar^2."""
    return -TWO_PI * float(n_u)
