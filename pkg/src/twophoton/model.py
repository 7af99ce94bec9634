"""Two-photon Rabi model: parameters, Z4 parity sectors and chain coefficients.

The Hamiltonian

    H = omega a^dag a + (omega0/2) sigma_z + g (a^2 + a^dag^2) sigma_x

commutes with Pi_4 = -exp(i pi a^dag a / 2) sigma_z. After the parity-basis
rotation each of the four invariant subspaces is a semi-infinite chain on
which H is tridiagonal, with diagonal A_j and off-diagonal R_j.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters, all in the same energy unit."""

    omega: float = 1.0
    omega0: float = 0.0
    g: float = 0.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.omega0 < 0:
            raise ValueError(f"omega0 must be non-negative, got {self.omega0}")
        if self.g < 0:
            raise ValueError(f"g must be non-negative, got {self.g}")

    @property
    def g_ratio(self) -> float:
        return self.g / self.omega

    @property
    def omega0_ratio(self) -> float:
        return self.omega0 / self.omega

    def dimensionless(self) -> "ModelParams":
        """Same model in units of omega."""
        return ModelParams(1.0, self.omega0_ratio, self.g_ratio)

    def scaled(self, factor: float) -> "ModelParams":
        return ModelParams(factor * self.omega, factor * self.omega0, factor * self.g)


class ParitySector(enum.Enum):
    """Eigenvalue w of Pi_4. Labels only; never used as complex numbers."""

    PLUS_ONE = "+1"
    MINUS_ONE = "-1"
    PLUS_I = "+i"
    MINUS_I = "-i"

    @property
    def is_even(self) -> bool:
        """Even sectors hold even photon numbers."""
        return self in (ParitySector.PLUS_ONE, ParitySector.MINUS_ONE)

    @classmethod
    def parse(cls, label: str) -> "ParitySector":
        aliases = {"1": "+1", "i": "+i", "+j": "+i", "-j": "-i", "j": "+i"}
        label = label.strip().lower()
        return cls(aliases.get(label, label))

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SectorState:
    """The index-th basis state of a rotated sector chain.

    For the +1 sector this is |2n,-> in the rotated basis.
    """

    sector: ParitySector
    index: int = 0

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"chain index must be >= 0, got {self.index}")

    @property
    def photon_number(self) -> int:
        return 2 * self.index + (0 if self.sector.is_even else 1)

    @classmethod
    def from_fock(cls, photon_number: int, spin: int) -> "SectorState":
        """Chain state reached by rotating the factorized state |n, sigma>."""
        return cls(sector_of(photon_number, spin), photon_number // 2)


def sector_of(photon_number: int, spin: int) -> ParitySector:
    """Parity sector containing the factorized state |photon_number, spin>.

    ``spin`` is the sigma_z eigenvalue (+1 or -1). The sector is the Pi_4
    eigenvalue w = -i**n * spin.
    """
    if photon_number < 0:
        raise ValueError("photon number must be non-negative")
    if spin not in (1, -1):
        raise ValueError("spin must be +1 or -1")
    phase = photon_number % 4
    # -i**n for n = 0, 1, 2, 3
    w = {0: (-1, 0), 1: (0, -1), 2: (1, 0), 3: (0, 1)}[phase]
    w = (w[0] * spin, w[1] * spin)
    return {
        (1, 0): ParitySector.PLUS_ONE,
        (-1, 0): ParitySector.MINUS_ONE,
        (0, 1): ParitySector.PLUS_I,
        (0, -1): ParitySector.MINUS_I,
    }[w]


class CoefficientSequence:
    """Lazy diagonal/off-diagonal coefficients of one sector chain.

    ``diag(j)`` and ``offdiag(j)`` accept integers or integer arrays and
    return values in the units of ``params``.
    """

    def __init__(self, params: ModelParams, sector: ParitySector):
        self.params = params
        self.sector = sector
        p = params.dimensionless()
        self._scale = params.omega
        self._half_w0 = 0.5 * p.omega0
        self._g = p.g
        # sign s in A_j = (2j + shift) - s (-1)^j omega0/2
        self._shift = 0 if sector.is_even else 1
        self._sign = 1.0 if sector in (ParitySector.PLUS_ONE, ParitySector.PLUS_I) else -1.0

    def diag(self, j):
        j = np.asarray(j)
        alt = 1.0 - 2.0 * (j % 2)
        a = (2 * j + self._shift) - self._sign * alt * self._half_w0
        return self._scale * a if a.ndim else float(self._scale * a)

    def offdiag(self, j):
        """R_j couples chain sites j-1 and j; R_0 = 0."""
        j = np.asarray(j, dtype=float)
        m = 2.0 * j
        prod = m * (m - 1.0) if self._shift == 0 else m * (m + 1.0)
        r = self._g * np.sqrt(np.where(j > 0, prod, 0.0))
        return self._scale * r if r.ndim else float(self._scale * r)

    def offdiag_sq(self, j):
        j = np.asarray(j, dtype=float)
        m = 2.0 * j
        prod = m * (m - 1.0) if self._shift == 0 else m * (m + 1.0)
        r2 = self._g**2 * np.where(j > 0, prod, 0.0)
        return self._scale**2 * r2 if r2.ndim else float(self._scale**2 * r2)

    def arrays(self, size: int):
        """(A_0..A_{size-1}, R_1..R_{size-1}) as float arrays."""
        j = np.arange(size)
        return np.asarray(self.diag(j), dtype=float), np.asarray(self.offdiag(j[1:]), dtype=float)


def coefficients(params: ModelParams, sector: ParitySector) -> CoefficientSequence:
    return CoefficientSequence(params, sector)


def rotated_basis_vector(sector: ParitySector, index: int, n_photons: int) -> np.ndarray:
    """Rotated chain state as a vector in the Fock (x) spin product basis.

    Layout: component 2*m + s with s = 0 for spin up, 1 for spin down.
    """
    v = np.zeros(2 * n_photons, dtype=complex)
    if sector is ParitySector.MINUS_ONE:
        v[2 * (2 * index)] = 1.0
    elif sector is ParitySector.PLUS_ONE:
        v[2 * (2 * index) + 1] = 1.0
    else:
        m = 2 * index + 1
        phase = 1j if sector is ParitySector.MINUS_I else -1j
        v[2 * m] = 1 / np.sqrt(2)
        v[2 * m + 1] = phase / np.sqrt(2)
    return v


def rotated_hamiltonian_matrix(params: ModelParams, n_photons: int) -> np.ndarray:
    """Dense rotated Hamiltonian in a Fock space cut at ``n_photons`` levels.

    omega N + (omega0/2) [cos(pi N/2) sigma_z + sin(pi N/2) sigma_y]
    + g (a^2 + a^dag^2), used only to cross-check the chain coefficients.
    """
    n = np.arange(n_photons)
    a = np.diag(np.sqrt(n[1:].astype(float)), 1)
    num = np.diag(n.astype(float))
    sz = np.diag([1.0, -1.0])
    sy = np.array([[0, -1j], [1j, 0]])
    cos_n = np.diag(np.round(np.cos(np.pi * n / 2)))
    sin_n = np.diag(np.round(np.sin(np.pi * n / 2)))
    boson = params.omega * num + params.g * (a @ a + a.T @ a.T)
    h = np.kron(boson, np.eye(2)).astype(complex)
    h += 0.5 * params.omega0 * (np.kron(cos_n, sz) + np.kron(sin_n, sy))
    return h


def lab_hamiltonian_matrix(params: ModelParams, n_photons: int) -> np.ndarray:
    """Dense unrotated Hamiltonian in the same product basis."""
    n = np.arange(n_photons)
    a = np.diag(np.sqrt(n[1:].astype(float)), 1)
    num = np.diag(n.astype(float))
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    h = np.kron(params.omega * num, np.eye(2))
    h += 0.5 * params.omega0 * np.kron(np.eye(n_photons), sz)
    h += params.g * np.kron(a @ a + a.T @ a.T, sx)
    return h
