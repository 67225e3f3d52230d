"""Exact Lehmann-line representations of chi'' and S on small Gibbs systems,
and the two frequency-sum routes to the mean Uhlmann curvature.

For H = H0 + sum_mu O_mu lambda_mu at lambda = 0 (hbar = 1):

    chi''_{mu nu}(w) = pi sum_ij (O_mu)_ij (O_nu)_ji (p_i - p_j) delta(w - w_ij)
    S_{mu nu}(w)     = 2 pi sum_ij p_i (O_mu)_ij (O_nu)_ji delta(w - w_ij)

with w_ij = E_j - E_i.  Delta lines are integrated analytically.
"""

from dataclasses import dataclass

import numpy as np

from . import sld
from .errors import NumericalError, ValidationError

MAX_DIM = 64


@dataclass(frozen=True)
class LehmannSystem:
    hamiltonian: np.ndarray
    observables: tuple
    beta: float
    energies: np.ndarray
    vectors: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_hamiltonian(cls, hamiltonian, observables, beta):
        H = np.asarray(hamiltonian, dtype=complex)
        dim = H.shape[0]
        if H.shape != (dim, dim) or dim > MAX_DIM:
            raise ValidationError(f"need a square Hamiltonian of dimension <= {MAX_DIM}")
        ops = tuple(np.asarray(o, dtype=complex) for o in observables)
        for m in (H,) + ops:
            if m.shape != (dim, dim) or not np.allclose(m, m.conj().T, atol=1e-12):
                raise ValidationError("Hamiltonian and observables must be Hermitian and equally sized")
        state = sld.gibbs_state(H, beta)
        resid = np.linalg.norm(H @ state.vectors - state.vectors * state.energies)
        if resid > 1e-10 * max(1.0, np.linalg.norm(H)):
            raise NumericalError(f"eigendecomposition residual {resid:.2e}")
        return cls(H, ops, float(beta), state.energies, state.vectors, state.populations)

    @property
    def dim(self):
        return self.energies.size

    def eigen_observable(self, mu):
        v = self.vectors
        return v.conj().T @ self.observables[mu] @ v

    def transition_frequencies(self):
        return self.energies[None, :] - self.energies[:, None]


@dataclass(frozen=True)
class SpectralLines:
    """Delta-line decomposition sum_l weights[l] * delta(w - omegas[l])."""

    omegas: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return self.omegas.size


def _degeneracy_tol(system):
    return 1e-10 * max(1.0, float(np.max(np.abs(system.energies))))


def _line_matrices(system, mu, nu):
    A = system.eigen_observable(mu)
    B = system.eigen_observable(nu)
    return A * B.T, system.transition_frequencies()


def chi_lehmann(system, mu, nu):
    """chi''_{mu nu} as exact delta lines; zero-weight lines are dropped."""
    prod, w = _line_matrices(system, mu, nu)
    p = system.weights
    weights = np.pi * prod * (p[:, None] - p[None, :])
    keep = weights != 0
    return SpectralLines(w[keep], weights[keep])


def structure_factor_lines(system, mu, nu):
    prod, w = _line_matrices(system, mu, nu)
    weights = 2.0 * np.pi * system.weights[:, None] * prod
    return w, weights


def _line_sum(omegas, weights, beta, tol):
    """sum_l tanh^2(beta w_l / 2) / w_l^2 * weight_l over finite-frequency lines."""
    zero = np.abs(omegas) <= tol
    if np.any(zero):
        leftover = np.max(np.abs(weights[zero]))
        scale = max(1.0, float(np.max(np.abs(weights))) if weights.size else 1.0)
        if leftover > 1e-9 * scale:
            raise NumericalError(f"zero-frequency line carries weight {leftover:.2e}")
    w = omegas[~zero]
    return np.sum(np.tanh(0.5 * beta * w) ** 2 / w**2 * weights[~zero])


def _real(value):
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise NumericalError(f"MUC picked up an imaginary part {value.imag:.3e}")
    return float(value.real)


def muc_from_chi(system, mu, nu):
    """U = (i/pi) int dw/w^2 tanh^2(beta w/2) chi''(w), summed over lines."""
    lines = chi_lehmann(system, mu, nu)
    total = _line_sum(lines.omegas, lines.weights, system.beta, _degeneracy_tol(system))
    return _real(1j / np.pi * total)


def muc_from_structure_factor(system, mu, nu):
    """U = (i/2pi) int dw/w^2 tanh^2(beta w/2) [S_{mu nu}(w) - S_{nu mu}(-w)].

    S_{nu mu}(-w) has its line from (i, j) at -w_ij = w_ji, so it is aligned with
    S_{mu nu} by transposing the line matrix.
    """
    w, s_mn = structure_factor_lines(system, mu, nu)
    _, s_nm = structure_factor_lines(system, nu, mu)
    diff = s_mn - s_nm.T
    total = _line_sum(w.ravel(), diff.ravel(), system.beta, _degeneracy_tol(system))
    return _real(1j / (2.0 * np.pi) * total)


def muc_direct(system, mu, nu):
    """(i/4) Tr(rho [L_mu, L_nu]) straight from the SLDs."""
    return sld.mean_uhlmann_curvature(
        system.hamiltonian, system.observables[mu], system.observables[nu], system.beta
    )


def random_hermitian(dim, rng, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (a + a.conj().T) / 2.0


def random_gibbs_system(dim, rng, n_observables=2, beta=None):
    if beta is None:
        beta = float(rng.uniform(0.2, 3.0))
    H = random_hermitian(dim, rng)
    ops = [random_hermitian(dim, rng) for _ in range(n_observables)]
    return LehmannSystem.from_hamiltonian(H, ops, beta)


def oracle_suite(seed, count=50, dims=(2, 8)):
    """Run chi / S / direct-SLD routes on seeded random systems.

    Returns a list of dicts with the three values per system.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        dim = int(rng.integers(dims[0], dims[1] + 1))
        system = random_gibbs_system(dim, rng)
        out.append(
            {
                "dim": dim,
                "beta": system.beta,
                "chi": muc_from_chi(system, 0, 1),
                "structure_factor": muc_from_structure_factor(system, 0, 1),
                "sld": muc_direct(system, 0, 1),
            }
        )
    return out
