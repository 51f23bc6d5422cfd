"""Population models: covariance matrices, zero-mean samplers, concentration parameters.

The diagonal moment mu_r is the worst-coordinate L_r norm of the random
vector; the uniform fourth moment nu is the worst-direction L_4 norm over
unit vectors.  For Gaussian vectors both have closed forms; for everything
else they are estimated from samples.

Model objects are immutable and sample sets hold read-only arrays, so
everything here can be shared across threads; sampling parallelizes across
derived RNG streams (see ``derive_rng``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matrix_core import (
    NotPositiveSemidefiniteError,
    SymMatrix,
    is_psd,
    psd_sqrt,
    spectral_norm,
)

__all__ = [
    "CovarianceSpec",
    "DistributionSpec",
    "SampleSet",
    "ConcentrationParams",
    "COVARIANCE_KINDS",
    "FAMILIES",
    "derive_rng",
    "materialize",
    "make_sampler",
    "draw_samples",
    "center_samples",
    "gaussian_mu",
    "gaussian_nu",
    "gaussian_params",
    "empirical_mu",
    "empirical_nu",
    "empirical_params",
]

COVARIANCE_KINDS = ("identity", "ar1", "decaying", "rank_one_plus", "custom")
FAMILIES = ("gaussian", "student_t", "sphere_bounded")


@dataclass(frozen=True)
class CovarianceSpec:
    """Parametric description of a population covariance matrix."""

    kind: str
    p: int
    rho: float | None = None
    alpha: float | None = None
    lam: float | None = None
    delta: float | None = None
    matrix: SymMatrix | None = None

    def __post_init__(self) -> None:
        if self.kind not in COVARIANCE_KINDS:
            raise ValueError(f"unknown covariance kind {self.kind!r}")
        if self.p < 1:
            raise ValueError("p must be positive")
        if self.kind == "ar1":
            if self.rho is None or not -1.0 < self.rho < 1.0:
                raise ValueError("ar1 requires rho in (-1, 1)")
        if self.kind == "decaying":
            if self.alpha is None or self.alpha <= 1.0:
                raise ValueError("decaying requires alpha > 1")
        if self.kind == "rank_one_plus":
            if self.lam is None or self.lam < 0.0:
                raise ValueError("rank_one_plus requires lam >= 0")
            if self.delta is None or self.delta <= 0.0:
                raise ValueError("rank_one_plus requires delta > 0")
        if self.kind == "custom":
            if self.matrix is None:
                raise ValueError("custom covariance requires a matrix")
            if self.matrix.dim != self.p:
                raise ValueError(
                    f"custom matrix dim {self.matrix.dim} does not match p={self.p}"
                )

    @classmethod
    def identity(cls, p: int) -> "CovarianceSpec":
        return cls("identity", p)

    @classmethod
    def ar1(cls, p: int, rho: float) -> "CovarianceSpec":
        return cls("ar1", p, rho=rho)

    @classmethod
    def decaying(cls, p: int, alpha: float) -> "CovarianceSpec":
        return cls("decaying", p, alpha=alpha)

    @classmethod
    def rank_one_plus(cls, p: int, lam: float, delta: float) -> "CovarianceSpec":
        return cls("rank_one_plus", p, lam=lam, delta=delta)

    @classmethod
    def custom(cls, matrix: SymMatrix) -> "CovarianceSpec":
        return cls("custom", matrix.dim, matrix=matrix)


@dataclass(frozen=True)
class DistributionSpec:
    """A zero-mean sampling distribution with a target covariance.

    student_t draws are rescaled so the covariance equals the target exactly;
    df must exceed 4 so fourth moments exist (default 9 keeps eighth moments
    finite as well).  sphere_bounded draws sqrt(p) * root(Sigma) * u with u
    uniform on the unit sphere, again with covariance exactly Sigma.
    """

    covariance: CovarianceSpec
    family: str = "gaussian"
    df: float = 9.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "student_t" and self.df <= 4.0:
            raise ValueError("student_t requires df > 4 (finite fourth moments)")

    @property
    def p(self) -> int:
        return self.covariance.p


@dataclass(frozen=True)
class SampleSet:
    """n sample vectors in R^p, stored as a read-only (n, p) array."""

    samples: np.ndarray
    seed: int | None = None
    model: DistributionSpec | None = None

    def __post_init__(self) -> None:
        a = np.array(self.samples, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"samples must be a nonempty (n, p) array, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("samples must be finite")
        a.flags.writeable = False
        object.__setattr__(self, "samples", a)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def p(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class ConcentrationParams:
    """Diagonal moments mu_r (keyed by the moment order r) and uniform fourth moment nu."""

    mu: dict = field(default_factory=dict)
    nu: float = 0.0
    provenance: str = "closed_form"  # closed_form | empirical

    def __post_init__(self) -> None:
        if self.provenance not in ("closed_form", "empirical"):
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if not (math.isfinite(self.nu) and self.nu >= 0.0):
            raise ValueError("nu must be finite and nonnegative")
        prev_order, prev_val = None, None
        for order in sorted(self.mu):
            val = self.mu[order]
            if order < 1.0:
                raise ValueError("moment orders must be >= 1")
            if not (math.isfinite(val) and val >= 0.0):
                raise ValueError("mu values must be finite and nonnegative")
            if prev_val is not None and val < prev_val * (1.0 - 1e-12):
                raise ValueError(
                    f"mu must be non-decreasing in the order: mu[{order}] = {val} "
                    f"< mu[{prev_order}] = {prev_val}"
                )
            prev_order, prev_val = order, val

    def mu_at(self, order: float) -> float:
        try:
            return self.mu[order]
        except KeyError:
            raise KeyError(f"mu at order {order} not present (have {sorted(self.mu)})")


def derive_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for (master seed, stream index).

    Streams are derived through SeedSequence spawn keys, so parallel and
    serial execution over stream indices produce identical draws.
    """
    entropy = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=(int(stream),)))


def materialize(spec: CovarianceSpec) -> SymMatrix:
    """Build the covariance matrix for a spec.

    decaying and custom kinds are verified PSD and rejected on failure; no
    silent repair, since any shift or projection would change the bias
    analysis downstream.
    """
    p = spec.p
    if spec.kind == "identity":
        return SymMatrix(np.eye(p))
    if spec.kind == "ar1":
        offs = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        return SymMatrix(np.power(spec.rho, offs))
    if spec.kind == "decaying":
        offs = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        sigma = SymMatrix((offs + 1.0) ** (-spec.alpha))
        if not is_psd(sigma):
            raise NotPositiveSemidefiniteError(
                f"decaying(alpha={spec.alpha}, p={p}) materialized to a non-PSD matrix"
            )
        return sigma
    if spec.kind == "rank_one_plus":
        v = np.full(p, 1.0 / math.sqrt(p))
        return SymMatrix(spec.lam * np.outer(v, v) + spec.delta * np.eye(p))
    sigma = spec.matrix
    if not is_psd(sigma):
        raise NotPositiveSemidefiniteError("custom covariance is not PSD")
    return sigma


def make_sampler(model: DistributionSpec):
    """Precompute the covariance square root and return draw(n, rng) -> (n, p) array.

    Draw order is fixed per family, so a given generator state always yields
    the same samples.
    """
    root = psd_sqrt(materialize(model.covariance)).mat
    p = model.p
    family = model.family
    df = model.df

    def draw(n: int, rng: np.random.Generator) -> np.ndarray:
        if n < 1:
            raise ValueError("n must be >= 1")
        g = rng.standard_normal((n, p))
        if family == "gaussian":
            return g @ root
        if family == "student_t":
            w = rng.chisquare(df, size=n)
            scale = np.sqrt(df / w) * math.sqrt((df - 2.0) / df)
            return (g * scale[:, None]) @ root
        # sphere_bounded: sqrt(p) * root * u, u uniform on the unit sphere
        u = g / np.linalg.norm(g, axis=1, keepdims=True)
        return math.sqrt(p) * (u @ root)

    return draw


def draw_samples(model: DistributionSpec, n: int, seed: int) -> SampleSet:
    """Draw n i.i.d. zero-mean vectors; deterministic given (model, n, seed)."""
    draw = make_sampler(model)
    return SampleSet(draw(n, derive_rng(seed, 0)), seed=int(seed), model=model)


def center_samples(s: SampleSet) -> SampleSet:
    """Subtract the sample mean from every vector."""
    centered = s.samples - s.samples.mean(axis=0, keepdims=True)
    return SampleSet(centered, seed=s.seed, model=s.model)


def _gaussian_abs_moment(order: float) -> float:
    """E|Z|^order for Z standard normal, valid for any real order >= 1."""
    return math.exp(
        0.5 * order * math.log(2.0)
        + math.lgamma(0.5 * (order + 1.0))
        - 0.5 * math.log(math.pi)
    )


def gaussian_mu(sigma: SymMatrix, r: float, exact: bool = False) -> float:
    """Diagonal moment mu_{2r} of a zero-mean Gaussian with covariance sigma.

    Note the half-order convention: the argument r refers to the (2r)-th
    moment.  The default is the bound form sqrt(r * max_i sigma_ii), which
    dominates the exact value; exact=True evaluates the Gaussian absolute
    moment itself (equal to ((2r)!/(2^r r!))^(1/2r) * sqrt(max_i sigma_ii)
    at integer r, and extended continuously in between).
    """
    if r < 1.0:
        raise ValueError("r must be >= 1")
    top_var = float(np.max(np.diag(sigma.mat)))
    if top_var < 0.0:
        raise ValueError("covariance has a negative diagonal entry")
    if exact:
        return _gaussian_abs_moment(2.0 * r) ** (1.0 / (2.0 * r)) * math.sqrt(top_var)
    return math.sqrt(r * top_var)


def gaussian_nu(sigma: SymMatrix) -> float:
    """Uniform fourth moment of a zero-mean Gaussian: 3^(1/4) * ||sigma||^(1/2).

    By rotational invariance the worst direction is the top eigenvector, so
    this value is exact, not merely an upper bound.
    """
    return 3.0**0.25 * math.sqrt(spectral_norm(sigma))


def gaussian_params(
    sigma: SymMatrix, orders: tuple = (2.0, 4.0), exact: bool = False
) -> ConcentrationParams:
    """Closed-form concentration parameters for a Gaussian model."""
    mu = {float(k): gaussian_mu(sigma, float(k) / 2.0, exact=exact) for k in orders}
    return ConcentrationParams(mu=mu, nu=gaussian_nu(sigma), provenance="closed_form")


def empirical_mu(s: SampleSet, r: float) -> float:
    """Empirical diagonal moment: max_i (n^-1 sum_k |X_ki|^r)^(1/r)."""
    if r < 1.0:
        raise ValueError("r must be >= 1")
    return float(np.max(np.mean(np.abs(s.samples) ** r, axis=0) ** (1.0 / r)))


def empirical_nu(s: SampleSet, n_directions: int, seed: int) -> float:
    """Empirical uniform fourth moment over candidate unit directions.

    Candidates are n_directions random sphere points plus the eigenvectors of
    the sample covariance.  Maximizing over a finite candidate set gives a
    lower estimate of the true supremum; use it for diagnostics only.
    """
    if n_directions < 1:
        raise ValueError("n_directions must be >= 1")
    rng = derive_rng(seed, 0)
    dirs = rng.standard_normal((n_directions, s.p))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    cov = s.samples.T @ s.samples / s.n
    _, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    candidates = np.vstack([dirs, vecs.T])
    proj = s.samples @ candidates.T
    vals = np.mean(proj**4, axis=0) ** 0.25
    return float(np.max(vals))


def empirical_params(
    s: SampleSet,
    orders: tuple = (4.0,),
    n_directions: int = 256,
    seed: int = 0,
) -> ConcentrationParams:
    """Concentration parameters estimated from samples; flagged empirical."""
    mu = {float(k): empirical_mu(s, float(k)) for k in orders}
    return ConcentrationParams(
        mu=mu, nu=empirical_nu(s, n_directions, seed), provenance="empirical"
    )
