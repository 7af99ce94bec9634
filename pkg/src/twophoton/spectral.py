"""Spectral densities rho(E) = Im G(E - i eps) / pi, peak extraction and the
collapse-point gap scan."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .contfrac import resolvent, resolvent_adaptive
from .model import ModelParams, SectorState

DEFAULT_POINTS_PER_12 = 20000
ONSET_FRACTION = 0.05


class UnresolvedSpectrum(ValueError):
    """Peaks are too dense for the broadening to separate them."""


class NoIsolatedState(LookupError):
    """No discrete peak below the collapse band."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Either a fixed chain truncation or adaptive doubling up to ``n_max``."""

    fixed: int | None = None
    tol: float = 1e-8
    n_max: int = 24000

    @classmethod
    def fixed_at(cls, n: int) -> "TruncationPolicy":
        return cls(fixed=int(n))

    def describe(self) -> dict:
        if self.fixed is not None:
            return {"truncation": self.fixed}
        return {"tol": self.tol, "n_max": self.n_max}


@dataclass
class SpectralCurve:
    state: SectorState
    params: ModelParams
    epsilon: float
    energies: np.ndarray
    rho: np.ndarray
    converged: np.ndarray
    truncation: int
    metadata: dict = field(default_factory=dict)

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.energies)))

    def __len__(self):
        return self.energies.size


@dataclass(frozen=True)
class Peak:
    energy: float
    weight: float
    width: float

    def as_record(self) -> dict:
        return {"energy": self.energy, "weight": self.weight, "width": self.width}


@dataclass
class PeakSet:
    peaks: list
    weight_sum: float

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.peaks])

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.peaks])

    def above(self, min_weight: float) -> "PeakSet":
        kept = [p for p in self.peaks if p.weight > min_weight]
        return PeakSet(kept, float(sum(p.weight for p in kept)))


def default_points(window) -> int:
    width = window[1] - window[0]
    return max(2, int(math.ceil(DEFAULT_POINTS_PER_12 * width / 12.0)))


def _evaluate(params, state, z, policy: TruncationPolicy):
    if policy.fixed is not None:
        values = resolvent(params, state, z, policy.fixed)
        return values, np.ones(z.shape, bool), np.full(z.shape, policy.fixed)
    values, used, ok, _ = resolvent_adaptive(params, state, z, policy.tol, policy.n_max)
    return values, ok, used


def scan(params: ModelParams, state: SectorState, window, points: int | None = None,
         epsilon: float = 0.0005, truncation=None, workers: int = 1,
         energies=None) -> SpectralCurve:
    """Sample rho(E) on a uniform grid over ``window`` (or on ``energies``).

    ``truncation`` is an int (fixed depth), a TruncationPolicy, or None for
    adaptive doubling. Samples are split into contiguous chunks for the
    workers and reassembled in index order, so the result does not depend
    on ``workers``.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if energies is None:
        e_min, e_max = window
        if not e_min < e_max:
            raise ValueError("window must satisfy E_min < E_max")
        points = points or default_points(window)
        if points < 2:
            raise ValueError("need at least two points")
        energies = np.linspace(e_min, e_max, points)
    else:
        energies = np.asarray(energies, dtype=float)
        if energies.size < 2 or np.any(np.diff(energies) <= 0):
            raise ValueError("energies must be strictly increasing")
    if truncation is None:
        policy = TruncationPolicy()
    elif isinstance(truncation, TruncationPolicy):
        policy = truncation
    else:
        policy = TruncationPolicy.fixed_at(truncation)

    z = energies - 1j * epsilon
    if workers > 1:
        chunks = np.array_split(np.arange(z.size), workers)
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda idx: _evaluate(params, state, z[idx], policy), chunks))
        values = np.concatenate([p[0] for p in parts])
        ok = np.concatenate([p[1] for p in parts])
        used = np.concatenate([p[2] for p in parts])
    else:
        values, ok, used = _evaluate(params, state, z, policy)

    rho = np.maximum(values.imag / np.pi, 0.0)
    meta = {"window": [float(energies[0]), float(energies[-1])], "points": int(energies.size),
            "epsilon": epsilon, **policy.describe(), "max_truncation_used": int(np.max(used)),
            "unconverged_samples": int(np.count_nonzero(~ok))}
    return SpectralCurve(state, params, epsilon, energies, rho, ok, int(np.max(used)), meta)


def _lorentz_vertex(e3, r3):
    """Fit 1/rho = a (E - E0)^2 + c through three samples.

    Exact for an isolated Lorentzian; returns (E0, c, a) or None when the
    samples do not bracket a minimum of 1/rho.
    """
    q = 1.0 / r3
    x0, x1, x2 = e3
    d01 = (q[1] - q[0]) / (x1 - x0)
    d12 = (q[2] - q[1]) / (x2 - x1)
    a = (d12 - d01) / (x2 - x0)
    if not a > 0:
        return None
    b = d01 - a * (x0 + x1)
    e0 = -b / (2 * a)
    c = q[1] - a * (x1 - e0) ** 2
    if not c > 0:
        return None
    return e0, c, a


def extract_peaks(curve: SpectralCurve, min_weight: float = 0.0,
                  check_resolution: bool = True) -> PeakSet:
    """Locate Lorentzian peaks and assign weights w = pi * eps * rho_max.

    Each local maximum is refined by interpolating 1/rho with a parabola
    through the three nearest samples; peaks closer than 2 eps are merged
    into the stronger one.
    """
    e, r, eps = curve.energies, curve.rho, curve.epsilon
    if check_resolution and curve.spacing >= eps / 2:
        raise ValueError(f"grid spacing {curve.spacing:.3g} must be below eps/2 = {eps / 2:.3g}")
    floor = 1e-12 * float(np.max(r)) if r.size else 0.0
    interior = (r[1:-1] >= r[:-2]) & (r[1:-1] > r[2:]) & (r[1:-1] > floor)
    found = []
    for k in np.nonzero(interior)[0] + 1:
        fit = _lorentz_vertex(e[k - 1:k + 2], r[k - 1:k + 2])
        if fit is None:
            e0, rho_max, width = e[k], r[k], eps
        else:
            e0, c, a = fit
            rho_max, width = 1.0 / c, math.sqrt(c / a)
        found.append(Peak(float(e0), float(math.pi * eps * rho_max), float(width)))

    merged = []
    for p in found:
        if merged and p.energy - merged[-1].energy < 2 * eps:
            if p.weight > merged[-1].weight:
                merged[-1] = p
            continue
        merged.append(p)

    if check_resolution and len(merged) > 2:
        spacing = np.median(np.diff([p.energy for p in merged]))
        if spacing < 4 * eps:
            raise UnresolvedSpectrum(
                f"typical peak spacing {spacing:.3g} < 4 eps; treat the band as continuum")
    kept = [p for p in merged if p.weight > min_weight]
    return PeakSet(kept, float(sum(p.weight for p in kept)))


def remove_peak(curve: SpectralCurve, peak: Peak) -> SpectralCurve:
    """Subtract the broadened line of ``peak`` from the curve (clipped at 0)."""
    eps = curve.epsilon
    line = peak.weight * (eps / math.pi) / ((curve.energies - peak.energy) ** 2 + eps**2)
    rho = np.maximum(curve.rho - line, 0.0)
    meta = dict(curve.metadata, removed_peak=peak.as_record())
    return replace(curve, rho=rho, metadata=meta)


def integrate(curve: SpectralCurve, tail_correction: bool = True) -> float:
    """Total spectral weight by the trapezoid rule.

    With ``tail_correction`` the Lorentzian mass each sample's line leaves
    outside the window is added back, treating rho dE as line weights.
    """
    e, r, eps = curve.energies, curve.rho, curve.epsilon
    total = float(np.trapezoid(r, e))
    if tail_correction:
        a, b = e[0], e[-1]
        inside = (np.arctan((b - e) / eps) - np.arctan((a - e) / eps)) / math.pi
        total += float(np.trapezoid(r * (1.0 - inside), e))
    return total


def ground_and_onset(curve: SpectralCurve, band_edge: float | None = None,
                     onset_fraction: float = ONSET_FRACTION):
    """Isolated peak below ``band_edge`` and the continuum onset above it.

    The search starts at the minimum of rho between the ground peak and the
    band edge. Past it, the ground line is subtracted and the onset is the
    first sample where the remainder exceeds ``onset_fraction`` times its
    median over the band (E >= band_edge).
    """
    if band_edge is None:
        band_edge = -0.5 * curve.params.omega
    peaks = extract_peaks(curve, check_resolution=False)
    below = [p for p in peaks if p.energy < band_edge - curve.epsilon]
    if not below:
        raise NoIsolatedState("no discrete peak below the band edge")
    ground = below[0]
    e = curve.energies
    rest = remove_peak(curve, ground).rho
    band = rest[e >= band_edge]
    if band.size == 0:
        raise NoIsolatedState("window ends before the band")
    threshold = onset_fraction * float(np.median(band))
    gap = np.nonzero((e > ground.energy) & (e < band_edge))[0]
    start = gap[np.argmin(curve.rho[gap])] if gap.size else int(np.searchsorted(e, band_edge))
    hits = np.nonzero((np.arange(e.size) >= start) & (rest > threshold))[0]
    if hits.size == 0:
        raise NoIsolatedState("no continuum found above the ground peak")
    onset = float(e[hits[0]])
    return ground, onset, {"threshold": threshold, "onset_fraction": onset_fraction,
                           "isolated_peaks": len(below)}


def gap_scan(params_base: ModelParams, omega0_values, epsilon: float = 0.0005,
             truncation: int = 8000, window=None, points: int | None = None,
             workers: int = 1):
    """Continuum onset minus isolated ground energy of |0,-> versus omega0.

    Requires g = omega/2. Returns a list of (omega0, gap, info) tuples; raises
    NoIsolatedState for an omega0 without an isolated peak.
    """
    from .model import ParitySector

    w = params_base.omega
    if not math.isclose(params_base.g, 0.5 * w, rel_tol=1e-12):
        raise ValueError("gap_scan is defined at the collapse point g = omega/2")
    state = SectorState(ParitySector.PLUS_ONE, 0)
    out = []
    for w0 in omega0_values:
        if w0 < 0:
            raise ValueError("omega0 must be non-negative")
        p = ModelParams(w, w0, params_base.g)
        win = window or (-(1.0 * w + w0), 2.0 * w)
        n_pts = points or int(math.ceil((win[1] - win[0]) / (0.4 * epsilon))) + 1
        curve = scan(p, state, win, n_pts, epsilon, truncation, workers=workers)
        ground, onset, info = ground_and_onset(curve)
        info.update(ground=ground.as_record(), onset=onset)
        out.append((float(w0), onset - ground.energy, info))
    return out


def comb_envelope(peaks: PeakSet):
    """Density envelope w_k / dE_k of a dense discrete comb.

    dE_k is the centred spacing of neighbouring peaks, so the envelope
    approximates the continuum density the comb discretizes. End peaks
    are dropped.
    """
    e, w = peaks.energies, peaks.weights
    if e.size < 3:
        return np.empty(0), np.empty(0)
    spacing = 0.5 * (e[2:] - e[:-2])
    return e[1:-1], w[1:-1] / spacing


def node_positions(energies, density, depth: float = 0.1) -> np.ndarray:
    """Interior local minima that dip below ``depth`` times the smaller of
    the highest values on either side."""
    x = np.asarray(energies)
    d = np.asarray(density)
    if d.size < 3:
        return np.empty(0)
    left = np.maximum.accumulate(d)
    right = np.maximum.accumulate(d[::-1])[::-1]
    k = np.nonzero((d[1:-1] < d[:-2]) & (d[1:-1] <= d[2:]))[0] + 1
    deep = d[k] < depth * np.minimum(left[k - 1], right[k + 1])
    return x[k[deep]]


def band_nodes(curve: SpectralCurve, band_edge: float | None = None,
               depth: float = 0.1) -> np.ndarray:
    """Node energies of the band part of a collapse-regime curve.

    The band is read as a discrete comb (peaks above ``band_edge``) and the
    nodes are the deep minima of its density envelope.
    """
    if band_edge is None:
        band_edge = -0.5 * curve.params.omega
    peaks = extract_peaks(curve, check_resolution=False)
    band = PeakSet([p for p in peaks if p.energy > band_edge - curve.epsilon], 0.0)
    x, d = comb_envelope(band)
    return node_positions(x, d, depth)
