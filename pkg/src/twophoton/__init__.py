"""Spectral functions and survival probabilities of the two-photon quantum
Rabi model via continued-fraction resolvents."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    CoefficientSequence,
    ModelParams,
    ParitySector,
    SectorState,
    coefficients,
    sector_of,
)
from .contfrac import (  # noqa: E402
    CFResult,
    ConvergenceReport,
    DivergentPivot,
    NotConverged,
    ProbeEnergy,
    evaluate_adaptive,
    evaluate_cf,
    pringsheim_report,
    resolvent,
)
from .spectral import (  # noqa: E402
    NoIsolatedState,
    Peak,
    PeakSet,
    SpectralCurve,
    TruncationPolicy,
    UnresolvedSpectrum,
    extract_peaks,
    gap_scan,
    scan,
)
from .dynamics import (  # noqa: E402
    AliasingRisk,
    IncompleteWeights,
    SurvivalCurve,
    long_time_limit,
    survival_from_curve,
    survival_from_peaks,
)
from .oracle import diagonalize_truncated, rho0_exact, survival_exact  # noqa: E402
