"""Two-sample test for equality of high-dimensional covariance matrices."""

from ._covtest import (
    CovtestError,
    __version__,
    b_stat,
    b_stat_naive,
    c_stat,
    c_stat_naive,
    chi2_4_quantile,
    generate_sample,
    model_diagonal,
    psi,
    psi_prime,
    run_test,
    sample_eigenvalues,
    simulate,
    spike_estimates,
    theta_roots,
    validate,
)

__all__ = [
    "CovtestError",
    "__version__",
    "b_stat",
    "b_stat_naive",
    "c_stat",
    "c_stat_naive",
    "chi2_4_quantile",
    "generate_sample",
    "model_diagonal",
    "psi",
    "psi_prime",
    "run_test",
    "sample_eigenvalues",
    "simulate",
    "spike_estimates",
    "theta_roots",
    "validate",
]
