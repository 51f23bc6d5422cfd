"""The sample covariance estimator, its masked variant, and error functionals."""

from __future__ import annotations

from dataclasses import dataclass

from .masks import Mask
from .matrix_core import SymMatrix, schur_product, spectral_norm
from .models import SampleSet, center_samples

__all__ = [
    "ErrorDecomposition",
    "sample_covariance",
    "masked_estimator",
    "decompose_error",
    "relative_spectral_error",
]


@dataclass(frozen=True)
class ErrorDecomposition:
    """Spectral-norm error of a masked estimate, split into variance and bias.

    variance_term = ||M o Cov_hat - M o Sigma|| fluctuates with the samples;
    bias_term = ||M o Sigma - Sigma|| is deterministic, induced by the mask.
    The triangle inequality gives total_actual <= total_bound.
    """

    variance_term: float
    bias_term: float
    total_bound: float
    total_actual: float


def sample_covariance(s: SampleSet) -> SymMatrix:
    """Empirical second moment n^-1 sum_i x_i x_i^T (normalization 1/n, not 1/(n-1))."""
    return SymMatrix(s.samples.T @ s.samples / s.n)


def masked_estimator(m: Mask, s: SampleSet, centered: bool = False) -> SymMatrix:
    """Schur product of the mask with the (optionally centered) sample covariance.

    The centered variant subtracts the sample mean first and keeps the 1/n
    normalization.
    """
    if m.dim != s.p:
        raise ValueError(f"mask dim {m.dim} does not match sample dim {s.p}")
    data = center_samples(s) if centered else s
    return schur_product(m.matrix, sample_covariance(data))


def decompose_error(m: Mask, sigma: SymMatrix, s: SampleSet) -> ErrorDecomposition:
    """Bias-variance split of the masked estimator's spectral-norm error."""
    if m.dim != sigma.dim or m.dim != s.p:
        raise ValueError(
            f"dimension mismatch: mask {m.dim}, sigma {sigma.dim}, samples {s.p}"
        )
    masked_cov = schur_product(m.matrix, sigma)
    estimate = masked_estimator(m, s)
    variance_term = spectral_norm(estimate - masked_cov)
    bias_term = spectral_norm(masked_cov - sigma)
    total_actual = spectral_norm(estimate - sigma)
    return ErrorDecomposition(
        variance_term=variance_term,
        bias_term=bias_term,
        total_bound=variance_term + bias_term,
        total_actual=total_actual,
    )


def relative_spectral_error(estimate: SymMatrix, target: SymMatrix) -> float:
    """||estimate - target|| / ||target||; rejects a zero target."""
    denom = spectral_norm(target)
    if denom <= 0.0:
        raise ValueError("target has zero spectral norm")
    return spectral_norm(estimate - target) / denom
