"""Symmetric logarithmic derivatives of Gibbs states and the mean Uhlmann
curvature U = (i/4) Tr(rho [L_mu, L_nu]).

Everything is done in the eigenbasis of H; the derivative of exp(-beta H) comes
from the Daleckii-Krein divided differences, so no finite differences are used.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError


@dataclass(frozen=True)
class GibbsState:
    hamiltonian: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    populations: np.ndarray
    beta: float

    @property
    def rho(self):
        v = self.vectors
        return (v * self.populations) @ v.conj().T

    def to_eigenbasis(self, op):
        v = self.vectors
        return v.conj().T @ op @ v


def gibbs_state(hamiltonian, beta):
    """rho = exp(-beta H) / Z for a Hermitian matrix H and finite beta > 0."""
    if not np.isfinite(beta) or beta <= 0:
        raise ValueError("the SLD route needs a finite beta > 0")
    H = np.asarray(hamiltonian, dtype=complex)
    energies, vectors = np.linalg.eigh(H)
    boltz = np.exp(-beta * (energies - energies[0]))
    return GibbsState(H, energies, vectors, boltz / boltz.sum(), float(beta))


def _divided_differences(state):
    """dd[i, j] = (p_i - p_j) / (E_i - E_j), with -beta p_i on (near) degeneracies."""
    E, p = state.energies, state.populations
    dE = E[:, None] - E[None, :]
    dp = p[:, None] - p[None, :]
    scale = max(1.0, float(np.max(np.abs(E))))
    degenerate = np.abs(dE) <= 1e-12 * scale
    safe = np.where(degenerate, 1.0, dE)
    return np.where(degenerate, -state.beta * 0.5 * (p[:, None] + p[None, :]), dp / safe)


def density_derivative(state, dH):
    """d rho / d lambda in the eigenbasis for H -> H + lambda dH."""
    A = state.to_eigenbasis(np.asarray(dH, dtype=complex))
    D = _divided_differences(state) * A
    # normalisation: d(1/Z) term keeps Tr(d rho) = 0
    D -= np.diag(state.populations * np.trace(D))
    return D


def sld(state, dH):
    """Eigenbasis SLD: L_ij = 2 (d rho)_ij / (p_i + p_j).

    Pairs whose combined weight underflows to exactly zero lie in the kernel of
    rho; their entries are set to zero since they never reach Tr(rho ...).
    """
    D = density_derivative(state, dH)
    p = state.populations
    psum = p[:, None] + p[None, :]
    if psum[0, 0] < 1e-30:
        raise NumericalError("ground-state weight vanished; Gibbs state is degenerate")
    with np.errstate(divide="ignore", invalid="ignore"):
        L = np.where(psum > 0, 2.0 * D / psum, 0.0)
    return L


def mean_uhlmann_curvature(hamiltonian, dH_mu, dH_nu, beta):
    """(i/4) Tr(rho [L_mu, L_nu]) for the Gibbs state of ``hamiltonian``."""
    state = gibbs_state(hamiltonian, beta)
    L_mu = sld(state, dH_mu)
    L_nu = sld(state, dH_nu)
    rho = np.diag(state.populations)
    value = 0.25j * np.trace(rho @ (L_mu @ L_nu - L_nu @ L_mu))
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise NumericalError(f"MUC picked up an imaginary part {value.imag:.3e}")
    return float(value.real)


def _two_mode_annihilators():
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    eye = np.eye(2, dtype=complex)
    # Jordan-Wigner on modes (first orbital, second orbital)
    return np.kron(a, eye), np.kron(z, a)


_C = _two_mode_annihilators()


def second_quantize(matrix):
    """Psi^dagger M Psi on the 4-dim Fock space of two fermionic orbitals."""
    M = np.asarray(matrix, dtype=complex)
    out = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            out += M[i, j] * (_C[i].conj().T @ _C[j])
    return out
