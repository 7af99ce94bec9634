"""Continued-fraction evaluation of diagonal resolvent elements on a sector chain.

For chain site n of a tridiagonal operator with diagonal A_j and couplings R_j,

    G_nn(z) = 1 / (z - A_n - R_{n+1}^2 T_up - R_n^2 T_down)

where T_up is the infinite ascending fraction (truncated at site N with a
zero tail, evaluated tail-to-head) and T_down the finite descending fraction
that terminates at z - A_0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, SectorState, coefficients

log = logging.getLogger(__name__)

PIVOT_FLOOR = 1e-300
DEFAULT_DELTA = 0.01


class DivergentPivot(ArithmeticError):
    """A partial denominator fell below the magnitude floor."""


class NotConverged(RuntimeError):
    """Adaptive truncation hit n_max before reaching the tolerance."""

    def __init__(self, result: "CFResult", tol: float):
        self.result = result
        super().__init__(
            f"residual {result.residual:.3g} > tol {tol:.3g} at truncation {result.truncation}"
        )


@dataclass(frozen=True)
class ProbeEnergy:
    """Probe point z = E - i*epsilon below the real axis."""

    E: float
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")

    @property
    def z(self) -> complex:
        return complex(self.E, -self.epsilon)


@dataclass(frozen=True)
class CFResult:
    value: complex
    truncation: int
    converged: bool
    residual: float


@dataclass(frozen=True)
class ConvergenceReport:
    g_ratio: float
    delta: float
    c: float
    beta_odd_limit: float
    beta_even_limit: float
    guaranteed: bool


def _chain_arrays(params: ModelParams, state: SectorState, truncation: int):
    """Dimensionless A_0..A_N and R_0^2..R_N^2 (R_0 = 0)."""
    coef = coefficients(params.dimensionless(), state.sector)
    j = np.arange(truncation + 1)
    return np.asarray(coef.diag(j), dtype=float), np.asarray(coef.offdiag_sq(j), dtype=float)


def resolvent(params: ModelParams, state: SectorState, z, truncation: int,
              pivot_floor: float = PIVOT_FLOOR):
    """Vectorized G_nn(z) on the chain truncated at site ``truncation``.

    ``z`` may be any complex scalar or array off the real axis; values are
    returned in units of 1/energy of ``params``. The truncated chain keeps
    sites 0..truncation, i.e. a (truncation+1)-dimensional matrix.
    """
    n = state.index
    if truncation < n + 1:
        raise ValueError(f"truncation {truncation} must exceed the state index {n}")
    zs = np.asarray(z, dtype=complex) / params.omega
    scalar = zs.ndim == 0
    zs = np.atleast_1d(zs)
    a, r2 = _chain_arrays(params, state, truncation)

    # |Im d| >= |Im z| holds for every partial denominator, so per-step checks
    # are only needed when the probe itself is closer than the floor.
    check = np.min(np.abs(zs.imag)) < pivot_floor

    def pivot(d):
        if check and np.min(np.abs(d)) < pivot_floor:
            raise DivergentPivot("partial denominator below floor; perturb epsilon")
        return d

    tail = np.zeros_like(zs)
    for j in range(truncation, n, -1):
        tail = r2[j] / pivot(zs - a[j] - tail)
    lower = np.zeros_like(zs)
    for j in range(n):
        lower = r2[j + 1] / pivot(zs - a[j] - lower)
    value = 1.0 / pivot(zs - a[n] - tail - lower)
    if not np.all(np.isfinite(value)):
        raise DivergentPivot("non-finite resolvent value; perturb epsilon")
    value = value / params.omega
    return value[0] if scalar else value


def evaluate_cf(params: ModelParams, state: SectorState, z: ProbeEnergy,
                truncation: int, pivot_floor: float = PIVOT_FLOOR) -> CFResult:
    if truncation < state.index + 2:
        raise ValueError("truncation must be at least state.index + 2")
    value = resolvent(params, state, z.z, truncation, pivot_floor)
    return CFResult(complex(value), truncation, True, float("nan"))


def initial_truncation(state: SectorState) -> int:
    return max(64, 4 * state.index, state.index + 2)


def evaluate_adaptive(params: ModelParams, state: SectorState, z: ProbeEnergy,
                      tol: float = 1e-8, n_max: int = 24000,
                      strict: bool = False) -> CFResult:
    """Double the truncation until the relative change drops below ``tol``.

    With ``strict`` a non-converged result raises NotConverged (the result is
    attached); otherwise it is returned with ``converged=False``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    values, used, ok, res = resolvent_adaptive(params, state, np.array([z.z]), tol, n_max)
    result = CFResult(complex(values[0]), int(used[0]), bool(ok[0]), float(res[0]))
    if not result.converged:
        if strict:
            raise NotConverged(result, tol)
        log.warning("continued fraction not converged: residual %.3g at N=%d",
                    result.residual, result.truncation)
    return result


def resolvent_adaptive(params: ModelParams, state: SectorState, z, tol: float = 1e-8,
                       n_max: int = 24000, n_start: int | None = None):
    """Per-point adaptive evaluation over an array of probe points.

    Returns (values, truncation_used, converged, residual). Points that
    converge early keep the value from their own final truncation.
    """
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    n0 = min(n_start or initial_truncation(state), n_max)
    values = resolvent(params, state, zs, n0)
    used = np.full(zs.shape, n0, dtype=int)
    residual = np.full(zs.shape, np.inf)
    converged = np.zeros(zs.shape, dtype=bool)
    if params.g == 0:
        # decoupled chain: the value does not depend on the truncation
        return values, used, np.ones(zs.shape, bool), np.zeros(zs.shape)
    n_cur = n0
    active = np.arange(zs.size)
    while active.size and n_cur < n_max:
        n_next = min(2 * n_cur, n_max)
        new = resolvent(params, state, zs[active], n_next)
        old = values[active]
        scale = np.maximum(np.abs(new), np.finfo(float).tiny)
        res = np.abs(new - old) / scale
        values[active] = new
        used[active] = n_next
        residual[active] = res
        done = res < tol
        converged[active[done]] = True
        active = active[~done]
        n_cur = n_next
    return values, used, converged, residual


def pringsheim_report(params: ModelParams, delta: float = DEFAULT_DELTA) -> ConvergenceReport:
    """Asymptotic Pringsheim analysis of the equivalence-transformed fraction."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not params.g > 0:
        raise ValueError("the convergence report needs g > 0")
    gr = params.g_ratio
    k = math.gamma(0.5) * math.gamma(0.25) / math.gamma(0.75)
    c = -k / ((2.0 + delta) * 4.0 * gr**2)
    return ConvergenceReport(
        g_ratio=gr,
        delta=delta,
        c=c,
        beta_odd_limit=2.0 + delta,
        beta_even_limit=1.0 / ((2.0 + delta) * gr**2),
        guaranteed=gr**2 < 1.0 / (2.0 * (2.0 + delta)),
    )


def equivalence_coefficients(params: ModelParams, z: complex, n_terms: int,
                             delta: float = DEFAULT_DELTA):
    """alpha_n and beta_n of the vacuum (+1 sector) fraction at probe ``z``.

    The fraction a_0/(b_0 - a_1/(b_1 - ...)) with a_n = R_n^2, b_n = z - A_n
    is rewritten with unit partial numerators via alpha_n = c_n b_n,
    c_0 = 1/omega, c_{n+1} = 1/(a_{n+1} c_n); then beta_{2n+1} = alpha/c,
    beta_{2n} = c alpha.
    """
    from .model import ParitySector

    p = params
    coef = coefficients(p, ParitySector.PLUS_ONE)
    j = np.arange(n_terms)
    a = np.asarray(coef.offdiag_sq(j), dtype=float)
    b = z - np.asarray(coef.diag(j), dtype=float)
    cn = np.empty(n_terms)
    cn[0] = 1.0 / p.omega
    for i in range(n_terms - 1):
        cn[i + 1] = 1.0 / (a[i + 1] * cn[i])
    alpha = cn * b
    c = pringsheim_report(p, delta).c
    beta = np.where(j % 2 == 1, alpha / c, alpha * c)
    return alpha, beta
