"""Mask matrices and their complexity metrics.

A mask is a fixed symmetric matrix whose entries weight how much attention the
estimator pays to each covariance entry.  Two metrics drive all downstream
error bounds: the squared maximum column norm (local complexity) and the
spectral norm (global complexity).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .matrix_core import (
    SymMatrix,
    one_to_two_norm,
    read_matrix_text,
    spectral_norm,
)

__all__ = [
    "Mask",
    "MaskComplexity",
    "MaskRangeWarning",
    "banded_mask",
    "all_ones_mask",
    "tapered_mask",
    "custom_mask",
    "zero_mask",
    "mask_complexity",
    "load_mask",
]

# Entries of custom masks may exceed [0, 1] (the theory only needs symmetry);
# anything outside this slightly padded interval triggers a warning.
_RANGE_LO = -1e-12
_RANGE_HI = 1.0 + 1e-12


class MaskRangeWarning(UserWarning):
    """Custom mask has entries outside [0, 1]."""


@dataclass(frozen=True)
class Mask:
    """A symmetric weighting matrix, tagged with how it was built."""

    matrix: SymMatrix
    kind: str  # banded | all_ones | tapered | custom
    bandwidth: int | None = None

    @property
    def dim(self) -> int:
        return self.matrix.dim


@dataclass(frozen=True)
class MaskComplexity:
    """The two mask complexity metrics: squared max column norm and spectral norm."""

    col_norm_sq: float
    spec_norm: float


def _check_bandwidth(p: int, bandwidth: int) -> None:
    if bandwidth < 1 or bandwidth % 2 == 0:
        raise ValueError(f"bandwidth must be a positive odd integer, got {bandwidth}")
    if bandwidth > 2 * p - 1:
        raise ValueError(f"bandwidth {bandwidth} exceeds 2p-1 = {2 * p - 1}")


def banded_mask(p: int, bandwidth: int) -> Mask:
    """0-1 mask keeping the band |i - j| <= (bandwidth - 1) / 2."""
    _check_bandwidth(p, bandwidth)
    offs = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
    half = (bandwidth - 1) // 2
    return Mask(SymMatrix((offs <= half).astype(np.float64)), "banded", bandwidth)


def all_ones_mask(p: int) -> Mask:
    """Mask of all ones: estimate the full covariance matrix."""
    if p < 1:
        raise ValueError("p must be positive")
    return Mask(SymMatrix(np.ones((p, p))), "all_ones")


def tapered_mask(p: int, bandwidth: int) -> Mask:
    """Linearly tapered mask: entries max(0, 1 - |i-j| / ((bandwidth+1)/2)).

    The linear shape is one convenient choice among many; it is illustrative,
    not canonical.  Entries stay in [0, 1] and vanish outside the band.
    """
    _check_bandwidth(p, bandwidth)
    offs = np.abs(np.subtract.outer(np.arange(p), np.arange(p))).astype(np.float64)
    vals = np.maximum(0.0, 1.0 - offs / ((bandwidth + 1) / 2.0))
    return Mask(SymMatrix(vals), "tapered", bandwidth)


def custom_mask(matrix: SymMatrix) -> Mask:
    """Wrap an arbitrary symmetric matrix as a mask, warning on out-of-range entries."""
    lo = float(np.min(matrix.mat))
    hi = float(np.max(matrix.mat))
    if lo < _RANGE_LO or hi > _RANGE_HI:
        warnings.warn(
            f"custom mask entries span [{lo:.6g}, {hi:.6g}], outside [0, 1]",
            MaskRangeWarning,
            stacklevel=2,
        )
    return Mask(matrix, "custom")


def zero_mask(p: int) -> Mask:
    """All-zero mask (estimate nothing); useful as a degenerate reference."""
    if p < 1:
        raise ValueError("p must be positive")
    return Mask(SymMatrix(np.zeros((p, p))), "custom")


def mask_complexity(m: Mask) -> MaskComplexity:
    """Compute (squared max column norm, spectral norm) for a mask."""
    return MaskComplexity(
        col_norm_sq=one_to_two_norm(m.matrix) ** 2,
        spec_norm=spectral_norm(m.matrix),
    )


def load_mask(path) -> Mask:
    """Read a mask from the dense matrix text format; tags it as custom."""
    return custom_mask(read_matrix_text(path))
