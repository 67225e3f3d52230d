"""Berry curvature, Chern numbers, mean Uhlmann curvature and Uhlmann number."""

import math
from dataclasses import dataclass, field

import numpy as np

from . import sld
from .errors import GapClosureError, NumericalError, ValidationError
from .quadrature import TWO_PI, bz_integrate, grid_values

GAP_TOL = 1e-12
ENSEMBLES = ("fock", "single")


@dataclass(frozen=True)
class ThermalContext:
    """Inverse temperature with hbar = k_B = e = 1.

    ``beta = math.inf`` is the zero-temperature sentinel.  ``ensemble`` picks
    the Gibbs state at each k:

    * ``"fock"``: exp(-beta H)/Z of the second-quantised mode Hamiltonian
      Psi_k^dagger H(k) Psi_k on its four-dimensional Fock space (grand
      canonical, mu = 0).  Band occupations follow Fermi-Dirac.
    * ``"single"``: the 2x2 matrix exp(-beta H(k))/Z of one particle.
    """

    beta: float = math.inf
    ensemble: str = "fock"
    units: str = field(default="hbar = k_B = e = 1; conductivity e^2/h = 1/(2 pi)", compare=False)

    def __post_init__(self):
        beta = float(self.beta)
        if math.isnan(beta) or beta <= 0:
            raise ValidationError(f"beta must be > 0 (or inf), got {self.beta}")
        if self.ensemble not in ENSEMBLES:
            raise ValidationError(f"ensemble must be one of {ENSEMBLES}, got {self.ensemble!r}")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_temperature(cls, T, ensemble="fock"):
        T = float(T)
        if not T >= 0 or math.isinf(T):
            raise ValidationError(f"temperature must be finite and >= 0, got {T}")
        return cls(math.inf if T == 0 else 1.0 / T, ensemble)

    @property
    def T(self):
        return 0.0 if self.zero_temperature else 1.0 / self.beta

    @property
    def zero_temperature(self):
        return math.isinf(self.beta)


@dataclass(frozen=True)
class GibbsBlochState:
    """Gibbs state at one k point; 2x2 (single) or 4x4 Fock-space (fock)."""

    rho: np.ndarray
    populations: np.ndarray
    partition: float


@dataclass
class CurvatureMap:
    grid: object
    values: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    def to_csv(self, path):
        from .io import write_table

        kx, ky = self.grid.mesh()
        meta = dict(self.meta, kind=self.kind, nx=self.grid.nx, ny=self.grid.ny)
        write_table(path, ["kx", "ky", "value"], zip(kx.ravel(), ky.ravel(), self.values.ravel()), meta)


def _norm(h):
    return np.sqrt(np.einsum("i...,i...->...", h, h))


def _check_gap(norm):
    smallest = float(np.min(norm))
    if smallest < GAP_TOL:
        raise GapClosureError(f"|h_k| = {smallest:.3e} below {GAP_TOL:g}: the gap closes")


def berry_curvature(field, kx, ky):
    """F_xy = 1/2 (d_x h x d_y h) . h / |h|^3 of the lower band (vectorised)."""
    _, h = field.eval(kx, ky)
    dx, dy = field.grad(kx, ky)
    norm = _norm(h)
    _check_gap(norm)
    triple = np.einsum("i...,i...->...", np.cross(dx, dy, axis=0), h)
    return 0.5 * triple / norm**3


def occupation_difference(eps, norm, ctx):
    """n_lower - n_upper of the two bands at energies eps -/+ |h|."""
    if ctx.ensemble == "single":
        return np.ones_like(norm) if ctx.zero_temperature else np.tanh(ctx.beta * norm)
    if ctx.zero_temperature:
        return 0.5 * (np.sign(eps + norm) - np.sign(eps - norm))
    b = 0.5 * ctx.beta
    return 0.5 * (np.tanh(b * (eps + norm)) - np.tanh(b * (eps - norm)))


def thermal_factor(eps, norm, ctx):
    """MUC / Berry curvature ratio: (n_lower - n_upper) * tanh^2(beta |h|).

    For eps = 0 this is tanh(beta|h|/2) tanh^2(beta|h|) in the Fock ensemble and
    tanh^3(beta|h|) in the single-particle ensemble.
    """
    occ = occupation_difference(eps, norm, ctx)
    if ctx.zero_temperature:
        return occ
    return occ * np.tanh(ctx.beta * norm) ** 2


def muc_closed_form(field, kx, ky, ctx):
    """Mean Uhlmann curvature U_xy(k) = thermal_factor * F_xy (vectorised)."""
    eps, h = field.eval(kx, ky)
    return thermal_factor(eps, _norm(h), ctx) * berry_curvature(field, kx, ky)


def gibbs_bloch_state(field, kx, ky, ctx):
    H = field.hamiltonian(kx, ky)
    if ctx.ensemble == "fock":
        H = sld.second_quantize(H)
    state = sld.gibbs_state(H, ctx.beta)
    boltz = np.exp(-ctx.beta * state.energies)
    return GibbsBlochState(state.rho, state.populations, float(boltz.sum()))


def muc_sld(field, kx, ky, ctx):
    """MUC at one k point from (i/4) Tr(rho [L_x, L_y]) of the Gibbs state.

    Independent of the closed form: rho, its k-derivatives and the SLDs are
    built from the matrix H(k) (embedded in Fock space for ``ensemble="fock"``).
    """
    if ctx.zero_temperature:
        raise ValidationError("the SLD route needs a finite beta")
    _check_gap(_norm(field.h(kx, ky)))
    H = field.hamiltonian(kx, ky)
    dHx, dHy = field.hamiltonian_derivatives(kx, ky)
    if ctx.ensemble == "fock":
        H, dHx, dHy = (sld.second_quantize(m) for m in (H, dHx, dHy))
    return sld.mean_uhlmann_curvature(H, dHx, dHy, ctx.beta)


def curvature_map(field, grid, ctx=None, workers=1):
    """Berry curvature (ctx None) or MUC on every grid node."""
    if ctx is None:
        values = grid_values(lambda kx, ky: berry_curvature(field, kx, ky), grid, workers)
        kind, beta = "berry", None
    else:
        values = grid_values(lambda kx, ky: muc_closed_form(field, kx, ky, ctx), grid, workers)
        kind, beta = "muc", ctx.beta
    meta = dict(field.describe(), beta=beta)
    if ctx is not None:
        meta["ensemble"] = ctx.ensemble
    return CurvatureMap(grid, values, kind, meta)


def chern_number(field, grid, workers=1):
    """(1/2pi) * periodic-trapezoid integral of the Berry curvature."""
    values = grid_values(lambda kx, ky: berry_curvature(field, kx, ky), grid, workers)
    return float(bz_integrate(values, grid) / TWO_PI)


def _lower_band_states(field, grid):
    kx, ky = grid.mesh()
    eps, h = field.eval(kx, ky)
    _check_gap(_norm(h))
    H = np.empty(kx.shape + (2, 2), dtype=complex)
    H[..., 0, 0] = eps + h[2]
    H[..., 1, 1] = eps - h[2]
    H[..., 0, 1] = h[0] - 1j * h[1]
    H[..., 1, 0] = h[0] + 1j * h[1]
    _, vecs = np.linalg.eigh(H)
    return vecs[..., :, 0]


def plaquette_phases(states):
    """Lattice field strength arg(U_x(k) U_y(k+x) U_x(k+y)^* U_y(k)^*) on a periodic mesh."""
    def link(axis):
        ov = np.einsum("...i,...i->...", states.conj(), np.roll(states, -1, axis=axis))
        mag = np.abs(ov)
        if np.min(mag) < 1e-14:
            raise NumericalError("vanishing link overlap; grid too coarse near a gap closure")
        return ov / mag

    ux, uy = link(0), link(1)
    loop = ux * np.roll(uy, -1, axis=0) * np.roll(ux, -1, axis=1).conj() * uy.conj()
    return np.angle(loop)


def chern_fhs(field, grid, tol=1e-8):
    """Integer Chern number from the gauge-invariant lattice field strength.

    Sign matches ``chern_number``: the plaquette phase is -F_xy * area.
    """
    phases = plaquette_phases(_lower_band_states(field, grid))
    total = -float(np.sum(phases)) / TWO_PI
    nearest = round(total)
    if abs(total - nearest) > tol:
        raise NumericalError(f"lattice Chern sum {total:.12f} is not an integer; gap closure or grid too coarse")
    return int(nearest)


def uhlmann_number(field, ctx, grid, workers=1):
    """n_U = (1/2pi) * BZ integral of the mean Uhlmann curvature."""
    values = grid_values(lambda kx, ky: muc_closed_form(field, kx, ky, ctx), grid, workers)
    return float(bz_integrate(values, grid) / TWO_PI)
