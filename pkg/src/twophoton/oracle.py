"""Independent references: the exact omega0 = 0 collapse-point results and
brute-force diagonalization of truncated chains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import ModelParams, ParitySector, coefficients


def oscillator_functions(m_max: int, xi):
    """Normalized oscillator eigenfunctions psi_0..psi_{m_max} at ``xi``.

    psi_m = H_m(xi) exp(-xi^2/2) / sqrt(2^m m! sqrt(pi)), built with the
    three-term recurrence so neither H_m nor m! is ever formed.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.empty((m_max + 1,) + xi.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * xi**2)
    if m_max >= 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for m in range(1, m_max):
        out[m + 1] = np.sqrt(2.0 / (m + 1)) * xi * out[m] - np.sqrt(m / (m + 1)) * out[m - 1]
    return out


def rho0_exact(n: int, E, omega: float = 1.0):
    """Exact spectral density of the chain state |2n,-> at g = omega/2, omega0 = 0.

    rho_0(E) = psi_{2n}(xi)^2 / sqrt(omega (E + omega/2)), xi = sqrt(E/omega + 1/2).
    """
    E = np.asarray(E, dtype=float)
    shifted = E / omega + 0.5
    if np.any(shifted <= 0):
        raise ValueError("rho0_exact is defined only for E > -omega/2")
    xi = np.sqrt(shifted)
    psi = oscillator_functions(2 * n, xi)[2 * n]
    rho = psi**2 / (omega * xi)
    return rho if rho.ndim else float(rho)


def rho0_band_density(n: int, u, omega: float = 1.0):
    """rho_0 dE / du with E = omega (u^2 - 1/2); regular at the band edge."""
    u = np.asarray(u, dtype=float)
    psi = oscillator_functions(2 * n, u)[2 * n]
    return 2.0 * psi**2


def hermite_roots(m: int) -> np.ndarray:
    """Real roots of H_m (Golub-Welsch), ascending."""
    if m == 0:
        return np.empty(0)
    k = np.arange(1, m)
    return eigh_tridiagonal(np.zeros(m), np.sqrt(k / 2.0), eigvals_only=True)


def rho0_zeros(n: int, omega: float = 1.0) -> np.ndarray:
    """Energies where rho_0(E, |2n,->) vanishes: xi^2 = root^2 of H_{2n}."""
    roots = hermite_roots(2 * n)
    pos = roots[roots > 0]
    return omega * (pos**2 - 0.5)


def survival_exact(t, omega: float = 1.0):
    """Vacuum survival probability 1/sqrt(1 + omega^2 t^2) at the collapse, omega0 = 0."""
    t = np.asarray(t, dtype=float)
    p = 1.0 / np.sqrt(1.0 + (omega * t) ** 2)
    return p if p.ndim else float(p)


def amplitude_exact(t, omega: float = 1.0):
    """Survival amplitude <0,-|exp(-iHt)|0,-> for the same exact case."""
    t = np.asarray(t, dtype=float)
    amp = np.exp(0.5j * omega * t) / np.sqrt(1.0 + 1j * omega * t)
    return amp if amp.ndim else complex(amp)


@dataclass
class EigenSolution:
    truncation: int
    eigenvalues: np.ndarray
    ground_overlaps: np.ndarray
    overlaps: dict

    def overlap(self, index: int) -> np.ndarray:
        return self.overlaps[index]


def diagonalize_truncated(params: ModelParams, sector: ParitySector, N: int,
                          indices=(0,)) -> EigenSolution:
    """Eigenvalues and |<eps_lambda|site k>|^2 of the N x N chain truncation."""
    if N < 2:
        raise ValueError("N must be at least 2")
    diag, off = coefficients(params, sector).arrays(N)
    vals, vecs = eigh_tridiagonal(diag, off)
    overlaps = {k: vecs[k, :] ** 2 for k in indices}
    if 0 not in overlaps:
        overlaps[0] = vecs[0, :] ** 2
    return EigenSolution(N, vals, overlaps[0], overlaps)


def truncated_matrix(params: ModelParams, sector: ParitySector, N: int) -> np.ndarray:
    diag, off = coefficients(params, sector).arrays(N)
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
