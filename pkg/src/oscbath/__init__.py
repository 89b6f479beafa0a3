"""Non-Markovian master equations for a damped harmonic oscillator."""
from .bath import BathSpec, DomainError, KernelSample, SpectralFamily, kernels, spectral_density
from .coeffs import (CoefficientTable, ConfigError, QuadratureDivergence, RangeError, fv_coefficients,
                     lindblad_window, rwa_coefficients, tabulate)
from .config import RunConfig, load_config
from .evolve import (ComparisonReport, FitError, ModelKind, MomentState, Trajectory, TruncationError,
                     build_liouvillian, evolve_density, evolve_moments, heating_report)
from .oracle import OracleBath, RecurrenceError, discretize, exact_evolution

__all__ = [
    "BathSpec", "DomainError", "KernelSample", "SpectralFamily", "kernels", "spectral_density",
    "CoefficientTable", "ConfigError", "QuadratureDivergence", "RangeError", "fv_coefficients",
    "lindblad_window", "rwa_coefficients", "tabulate", "RunConfig", "load_config",
    "ComparisonReport", "FitError", "ModelKind", "MomentState", "Trajectory", "TruncationError",
    "build_liouvillian", "evolve_density", "evolve_moments", "heating_report",
    "OracleBath", "RecurrenceError", "discretize", "exact_evolution",
]
__version__ = "0.1.0"
