"""Polyspectral means, asymptotic variances and the bispectral linearity test."""

from ._polyspec import (
    ComputationError,
    InputError,
    SingularFilterError,
    UnsupportedOrderError,
    adjusted_rand_index,
    cov_matrix,
    estimate_means,
    features,
    kmeans,
    lintest,
    partition_count,
    simulate,
    weighted_chisq_pvalue,
)

__all__ = [
    "ComputationError",
    "InputError",
    "SingularFilterError",
    "UnsupportedOrderError",
    "adjusted_rand_index",
    "cov_matrix",
    "estimate_means",
    "features",
    "kmeans",
    "lintest",
    "partition_count",
    "simulate",
    "weighted_chisq_pvalue",
]
