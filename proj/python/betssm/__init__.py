"""Beta-inflated state-space model for in-game betting stakes."""

import json

from ._core import (  # noqa: F401
    ConfigError,
    DataError,
    DomainError,
    Error,
    InvalidParameter,
    MatchSeries,
    ModelParams,
    NumericalError,
    __version__,
    backtest,
    basis_matrix,
    beinf_cdf,
    beinf_density,
    beinf_mean,
    beinf_sample,
    flag_outliers,
    forecast,
    implied_probability,
    load_series,
    log_likelihood,
    relative_stakes,
    set_thread_count,
    simulate,
)
from ._core import fit_json as _fit_json


def fit(matches, variant="baseline", K=10, m=100, span_sds=5.0, lambda_alpha=0.0, lambda_beta=0.0):
    """Fit the model and return the result document as a dict."""
    return json.loads(_fit_json(matches, variant, K, m, span_sds, lambda_alpha, lambda_beta))
