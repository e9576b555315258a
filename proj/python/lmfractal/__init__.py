"""Holder and Hurst exponents of per-token log-perplexity streams."""

from ._lmfractal import (
    EmptySelectionError,
    Error,
    EstimationConfig,
    EstimationError,
    FractalEstimate,
    InsufficientScalesError,
    ParseError,
    PowerLawFit,
    StandardizeMode,
    ValidationError,
    autocorrelation,
    bin_values,
    bootstrap,
    entropy,
    estimate_holder,
    estimate_hurst,
    fit_power_law,
    generate,
    load_scores,
    mutual_information,
    parse_quality_rating,
    pearson,
    rs_statistic,
    standardize_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
