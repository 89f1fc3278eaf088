"""Leave-one-out prediction intervals for linear regression with many variables."""

from loopi._core import (
    EstimatorSpec,
    FitResult,
    PredictionInterval,
    SpectralDiagnostics,
    __version__,
    asymptotic_length_oracle,
    empirical_quantile,
    fit,
    loo_residuals,
    loo_residuals_brute_force,
    prediction_interval,
    projection_normality_ks,
    sample_design,
    spectral_diagnostics,
    split_prediction_interval,
)

__all__ = [
    "EstimatorSpec",
    "FitResult",
    "PredictionInterval",
    "SpectralDiagnostics",
    "__version__",
    "asymptotic_length_oracle",
    "empirical_quantile",
    "fit",
    "loo_residuals",
    "loo_residuals_brute_force",
    "prediction_interval",
    "projection_normality_ks",
    "sample_design",
    "spectral_diagnostics",
    "split_prediction_interval",
]
