"""Survival probabilities P(t) = |<psi|exp(-iHt)|psi>|^2 from spectral data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import czt

from .model import ModelParams, SectorState
from .spectral import Peak, PeakSet, SpectralCurve

PLATEAU_FRACTION = 0.2
_CHUNK = 2**22


class IncompleteWeights(ValueError):
    """Peak weights do not account for the whole state."""


class AliasingRisk(ValueError):
    """The energy grid is too coarse for the requested times."""


@dataclass
class SurvivalCurve:
    state: SectorState | None
    params: ModelParams | None
    times: np.ndarray
    P: np.ndarray
    plateau: float | None = None
    renormalization: float = 1.0
    metadata: dict = field(default_factory=dict)


def plateau_estimate(times, P, fraction: float = PLATEAU_FRACTION) -> float:
    """Median of P over the final ``fraction`` of the time window."""
    times = np.asarray(times)
    cut = times.min() + (1.0 - fraction) * (times.max() - times.min())
    return float(np.median(np.asarray(P)[times >= cut]))


def _uniform_step(x) -> float | None:
    if x.size < 2:
        return None
    d = np.diff(x)
    return float(d[0]) if np.allclose(d, d[0], rtol=1e-9, atol=0) else None


def _phase_sum(weights, energies, times):
    """sum_k weights_k exp(-i E_k t) for every t.

    Uniform energy and time grids go through a chirp-z transform; anything
    else falls back to direct summation in memory-bounded chunks.
    """
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    h, tau = _uniform_step(energies), _uniform_step(times)
    if h is not None and tau is not None and energies.size > 64 and times.size > 64:
        k = np.arange(energies.size)
        x = weights * np.exp(-1j * k * h * times[0])
        s = czt(x, m=times.size, w=np.exp(-1j * h * tau), a=1.0)
        return np.exp(-1j * energies[0] * times) * s
    out = np.empty(times.shape, dtype=complex)
    step = max(1, _CHUNK // max(1, energies.size))
    for i in range(0, times.size, step):
        t = times[i:i + step]
        out[i:i + step] = np.exp(-1j * np.outer(t, energies)) @ weights
    return out


def survival_from_peaks(peaks: PeakSet, times, state: SectorState | None = None,
                        params: ModelParams | None = None) -> SurvivalCurve:
    """P(t) = |sum_l w_l exp(-i E_l t)|^2, renormalized by the weight sum squared."""
    total = peaks.weight_sum
    if total < 0.99:
        raise IncompleteWeights(f"peak weights sum to {total:.4f} < 0.99; widen the window")
    if total > 1.01:
        raise ValueError(f"peak weights sum to {total:.4f} > 1.01")
    times = np.asarray(times, dtype=float)
    amp = _phase_sum(peaks.weights, peaks.energies, times)
    renorm = 1.0 / total**2
    P = np.abs(amp) ** 2 * renorm
    return SurvivalCurve(state, params, times, P, plateau_estimate(times, P), renorm,
                         {"path": "peaks", "weight_sum": total, "peaks": len(peaks)})


def band_quadrature_weights(energies, band_edge: float, omega: float = 1.0):
    """Trapezoid weights W with  int f dE ~ sum W_k f(E_k).

    Below ``band_edge`` the rule is the plain trapezoid in E. Above it the
    trapezoid runs in u = sqrt((E - band_edge)/omega), dE = 2 omega u du, so
    the steep inverse-square-root rise of a broadened band is sampled evenly
    in u. The integrand must stay finite at the edge (any eps-broadened
    density does). The interval straddling the edge is a plain E-trapezoid.
    """
    e = np.asarray(energies, dtype=float)
    w = np.zeros_like(e)
    nb = int(np.searchsorted(e, band_edge))
    if nb > 0:
        h = np.diff(e[:nb + 1]) if nb < e.size else np.diff(e[:nb])
        w[:h.size] += 0.5 * h
        w[1:h.size + 1] += 0.5 * h
    if e.size - nb >= 2:
        u = np.sqrt(np.maximum(e[nb:] - band_edge, 0.0) / omega)
        du = np.diff(u)
        jac = 2.0 * omega * u
        w[nb:-1] += 0.5 * du * jac[:-1]
        w[nb + 1:] += 0.5 * du * jac[1:]
    return w


def survival_from_curve(curve: SpectralCurve, ground_peak: Peak | None, times,
                        band_edge: float | None = None,
                        deconvolve: bool = True) -> SurvivalCurve:
    """A(t) = w_0 exp(-i E_0 t) + int rho_cont(E) exp(-iEt) dE, P = |A|^2 / |A(0)|^2.

    ``curve`` must already exclude the isolated line (see spectral.remove_peak).
    With ``deconvolve`` the continuum transform is multiplied by exp(eps |t|),
    which undoes the Lorentzian broadening of the sampled density exactly.
    """
    times = np.asarray(times, dtype=float)
    e = curve.energies
    h = curve.spacing
    if times.size and np.max(np.abs(times)) * h > 0.5:
        raise AliasingRisk(f"max|t| * dE = {np.max(np.abs(times)) * h:.3g} > 0.5")
    omega = curve.params.omega if curve.params is not None else 1.0
    if band_edge is None:
        band_edge = -0.5 * omega
    w = band_quadrature_weights(e, band_edge, omega) * curve.rho
    amp = _phase_sum(w, e, times)
    amp0 = complex(w.sum())
    if deconvolve and curve.epsilon > 0:
        amp = amp * np.exp(curve.epsilon * np.abs(times))
    if ground_peak is not None:
        amp = amp + ground_peak.weight * np.exp(-1j * ground_peak.energy * times)
        amp0 += ground_peak.weight
    renorm = 1.0 / abs(amp0) ** 2
    P = np.abs(amp) ** 2 * renorm
    meta = {"path": "curve", "band_edge": band_edge, "deconvolved": bool(deconvolve),
            "continuum_weight": float(w.sum()),
            "ground": ground_peak.as_record() if ground_peak else None}
    return SurvivalCurve(curve.state, curve.params, times, P, plateau_estimate(times, P)
                         if times.size > 1 else None, renorm, meta)


def long_time_limit(ground_peak: Peak | None) -> float:
    """lim P(t) = (weight of the isolated state)^2; 0 without one."""
    if ground_peak is None:
        return 0.0
    return float(ground_peak.weight) ** 2


def time_grid(t_max: float, points: int, omega: float = 1.0) -> np.ndarray:
    """Uniform times 0..t_max (t in units of 1/omega)."""
    if points < 2:
        raise ValueError("need at least two time points")
    return np.linspace(0.0, t_max / omega, points)


def min_points_for(t_max: float, window) -> int:
    """Grid size keeping max t * dE <= 0.5 on ``window``."""
    return int(math.ceil((window[1] - window[0]) * t_max / 0.5)) + 1
