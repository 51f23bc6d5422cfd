"""Seeded Monte Carlo engine: variance experiments and inequality verifiers.

Every routine derives one RNG stream per trial from the master seed, reduces
results in trial-index order, and is therefore bit-reproducible at any worker
count.  Statistical acceptance uses 3 standard errors for inequality checks
and 5 for entrywise/eigenvalue checks; deterministic inequalities get no
statistical slack, only a relative floating-point guard.
"""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    BoundReport,
    default_r_grid,
    expected_max_bound,
    gaussian_bound,
    khintchine_rhs,
    main_bound,
    moment_bound_psd,
    moment_bound_selfadj,
)
from .masks import Mask, all_ones_mask, banded_mask, mask_complexity, tapered_mask
from .matrix_core import SymMatrix, _spectral_norms_stacked
from .models import (
    ConcentrationParams,
    DistributionSpec,
    SampleSet,
    derive_rng,
    empirical_mu,
    empirical_nu,
    gaussian_mu,
    gaussian_nu,
    make_sampler,
    materialize,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "StudyRow",
    "VerifierReport",
    "EnsembleSpec",
    "run_variance_experiment",
    "scaling_study",
    "verify_variance_lemma",
    "verify_schur_norm_lemma",
    "verify_expected_max_lemma",
    "verify_symmetrization",
    "verify_khintchine",
    "verify_moment_inequality",
    "random_sym_matrices",
]

# Trial indices occupy streams [0, trials); calibration draws use this one.
_CALIBRATION_STREAM = 2**32
# Relative guard for deterministic inequalities evaluated in floating point.
_FLOAT_GUARD = 1e-12


@dataclass(frozen=True)
class ExperimentConfig:
    """Configuration of one Monte Carlo variance experiment."""

    model: DistributionSpec
    mask: Mask
    n: int
    trials: int = 100
    seed: int = 0
    centered: bool = False
    eps: float | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.trials < 2:
            raise ValueError("trials must be >= 2")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.eps is not None and not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0,1)")
        if self.mask.dim != self.model.p:
            raise ValueError(
                f"mask dim {self.mask.dim} does not match model dim {self.model.p}"
            )

    def describe(self) -> dict:
        cov = self.model.covariance
        cov_doc = {"kind": cov.kind, "p": cov.p}
        for key in ("rho", "alpha", "lam", "delta"):
            val = getattr(cov, key)
            if val is not None:
                cov_doc[key] = val
        model_doc = {"covariance": cov_doc, "family": self.model.family}
        if self.model.family == "student_t":
            model_doc["df"] = self.model.df
        mask_doc = {"kind": self.mask.kind, "p": self.mask.dim}
        if self.mask.bandwidth is not None:
            mask_doc["bandwidth"] = self.mask.bandwidth
        doc = {
            "model": model_doc,
            "mask": mask_doc,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "centered": self.centered,
            "workers": self.workers,
        }
        if self.eps is not None:
            doc["eps"] = self.eps
        return doc


@dataclass(frozen=True)
class ExperimentResult:
    """Monte Carlo estimate of the estimator's RMS spectral error vs its bound."""

    empirical_rms: float
    std_error: float
    theoretical: BoundReport
    ratio: float
    per_trial: tuple
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class StudyRow:
    axis: str
    value: float
    result: ExperimentResult


@dataclass(frozen=True)
class VerifierReport:
    """Outcome of one inequality verifier."""

    name: str
    holds: bool
    lhs: float | None = None
    rhs: float | None = None
    ratio: float | None = None
    max_violation: float | None = None
    slack: float | None = None
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {"name": self.name, "holds": self.holds}
        for key in ("lhs", "rhs", "ratio", "max_violation", "slack"):
            val = getattr(self, key)
            if val is not None:
                doc[key] = val
        if self.detail:
            doc["detail"] = dict(self.detail)
        return doc


def _usable_r_grid(model: DistributionSpec, n: int, p: int, r_grid=None) -> tuple:
    """Restrict the expected-max grid to orders whose moments exist.

    student_t only has moments of order strictly below df, so grid points with
    4r >= df would make the empirical diagonal moment meaningless.
    """
    grid = default_r_grid(n, p) if r_grid is None else tuple(r_grid)
    if model.family == "student_t":
        grid = tuple(r for r in grid if 4.0 * r < model.df)
    return grid


def _empirical_theoretical(
    cfg: ExperimentConfig, sigma: SymMatrix, draw
) -> BoundReport:
    """Diagnostic bound for non-Gaussian models, from empirical concentration parameters.

    The empirical nu is a lower estimate of the true supremum, so this report
    is diagnostic, never certified.
    """
    n_cal = max(4096, cfg.n)
    cal = SampleSet(
        draw(n_cal, derive_rng(cfg.seed, _CALIBRATION_STREAM)),
        seed=cfg.seed,
        model=cfg.model,
    )
    cp = ConcentrationParams(
        mu={4.0: empirical_mu(cal, 4.0)},
        nu=empirical_nu(cal, 256, cfg.seed),
        provenance="empirical",
    )
    grid = _usable_r_grid(cfg.model, cfg.n, cfg.model.p)
    emax = expected_max_bound(
        cfg.n, cfg.model.p, lambda order: empirical_mu(cal, order), grid
    )
    return main_bound(mask_complexity(cfg.mask), cp, emax, cfg.n, cfg.model.p)


def run_variance_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Estimate the RMS spectral fluctuation of the masked estimator over seeded trials.

    Gaussian models are compared against the certified explicit-constant
    bound; other families against the empirical-parameter diagnostic bound.
    """
    sigma = materialize(cfg.model.covariance)
    draw = make_sampler(cfg.model)
    mask_arr = cfg.mask.matrix.mat
    target = mask_arr * sigma.mat
    n = cfg.n

    def one_trial(t: int) -> float:
        rng = derive_rng(cfg.seed, t)
        x = draw(n, rng)
        if cfg.centered:
            x = x - x.mean(axis=0, keepdims=True)
        dev = mask_arr * (x.T @ x) / n - target
        return float(_spectral_norms_stacked(0.5 * (dev + dev.T)))

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            errors = list(pool.map(one_trial, range(cfg.trials)))
    else:
        errors = [one_trial(t) for t in range(cfg.trials)]

    sq = np.asarray(errors) ** 2
    mean_sq = float(np.mean(sq))
    rms = math.sqrt(mean_sq)
    se_mean = float(np.std(sq, ddof=1)) / math.sqrt(cfg.trials)
    std_error = se_mean / (2.0 * rms) if rms > 0.0 else 0.0

    if cfg.model.family == "gaussian":
        theoretical = gaussian_bound(cfg.mask, sigma, n, cfg.model.p, explicit=True)
    else:
        theoretical = _empirical_theoretical(cfg, sigma, draw)
    ratio = rms / theoretical.total if theoretical.total > 0.0 else 0.0

    return ExperimentResult(
        empirical_rms=rms,
        std_error=std_error,
        theoretical=theoretical,
        ratio=ratio,
        per_trial=tuple(errors),
        metadata=cfg.describe(),
    )


def _rebuild_mask(mask: Mask, p: int, bandwidth: int | None = None) -> Mask:
    if mask.kind == "banded":
        return banded_mask(p, mask.bandwidth if bandwidth is None else bandwidth)
    if mask.kind == "tapered":
        return tapered_mask(p, mask.bandwidth if bandwidth is None else bandwidth)
    if mask.kind == "all_ones" and bandwidth is None:
        return all_ones_mask(p)
    raise ValueError(f"cannot rebuild a {mask.kind!r} mask along this axis")


def scaling_study(base: ExperimentConfig, vary: str, values) -> list:
    """Run the base experiment along one axis (n, B, or p); one row per value."""
    if vary not in ("n", "B", "p"):
        raise ValueError(f"vary must be one of n, B, p; got {vary!r}")
    rows = []
    for value in values:
        value = int(value)
        if vary == "n":
            cfg = dataclasses.replace(base, n=value)
        elif vary == "B":
            cfg = dataclasses.replace(base, mask=_rebuild_mask(base.mask, base.model.p, value))
        else:
            if base.model.covariance.kind == "custom":
                raise ValueError("cannot scale a custom covariance along the p axis")
            cov = dataclasses.replace(base.model.covariance, p=value)
            model = dataclasses.replace(base.model, covariance=cov)
            cfg = dataclasses.replace(base, model=model, mask=_rebuild_mask(base.mask, value))
        rows.append(StudyRow(axis=vary, value=float(value), result=run_variance_experiment(cfg)))
    return rows


def verify_variance_lemma(
    model: DistributionSpec, mask: Mask, trials: int, seed: int
) -> VerifierReport:
    """Check E (M o xx*)^2 <= mu_4^2 nu^2 ||M||_{1->2}^2 I in the PSD order, by Monte Carlo.

    Uses the exact Gaussian closed-form parameters, so the bound can be tight
    (it is an equality at p = 1 with the identity mask); acceptance therefore
    allows 5 standard errors of slack on the top eigenvalue.
    """
    if model.family != "gaussian":
        raise ValueError("the variance-lemma verifier requires a gaussian model")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    if mask.dim != model.p:
        raise ValueError("mask and model dimensions differ")
    sigma = materialize(model.covariance)
    mu4 = gaussian_mu(sigma, 2.0, exact=True)
    nu = gaussian_nu(sigma)
    bound = mu4**2 * nu**2 * mask_complexity(mask).col_norm_sq

    p = model.p
    draw = make_sampler(model)
    x = draw(trials, derive_rng(seed, 0))
    m = mask.matrix.mat

    total = np.zeros((p, p))
    chunk = max(1, 2**22 // (p * p))
    for lo in range(0, trials, chunk):
        xs = x[lo : lo + chunk]
        z = m * (xs[:, :, None] * xs[:, None, :])
        total += np.einsum("tij,tjk->ik", z, z)
    mean = total / trials

    dev = mean - bound * np.eye(p)
    lam, vecs = np.linalg.eigh(0.5 * (dev + dev.T))
    max_violation = float(lam[-1])
    u = vecs[:, -1]
    # per-trial scalars u' Z^2 u = ||Z u||^2 without forming Z
    w = (x * u[None, :]) @ m
    per_trial = np.sum((x * w) ** 2, axis=1)
    se = float(np.std(per_trial, ddof=1)) / math.sqrt(trials)
    slack = 5.0 * se
    return VerifierReport(
        name="variance_lemma",
        holds=max_violation <= slack,
        max_violation=max_violation,
        slack=slack,
        detail={"bound_scalar": bound, "trials": trials, "seed": seed},
    )


def verify_schur_norm_lemma(trials: int, p: int, seed: int) -> VerifierReport:
    """Check ||M o xx*|| <= ||M|| * ||x||_inf^2 on random draws.

    The inequality is deterministic, so any violation beyond the relative
    floating-point guard counts as a failure.
    """
    if trials < 1 or p < 1:
        raise ValueError("trials and p must be >= 1")
    rng = derive_rng(seed, 0)
    violations = 0
    worst = -math.inf
    chunk = max(1, 2**21 // (p * p))
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        a = rng.standard_normal((c, p, p))
        ms = 0.5 * (a + np.transpose(a, (0, 2, 1)))
        xs = rng.standard_normal((c, p))
        z = ms * (xs[:, :, None] * xs[:, None, :])
        lhs = _spectral_norms_stacked(z)
        rhs = _spectral_norms_stacked(ms) * np.max(np.abs(xs), axis=1) ** 2
        excess = lhs - rhs * (1.0 + _FLOAT_GUARD)
        violations += int(np.sum(excess > 0.0))
        worst = max(worst, float(np.max(lhs - rhs)))
        done += c
    return VerifierReport(
        name="schur_norm_lemma",
        holds=violations == 0,
        max_violation=worst,
        detail={"violations": violations, "trials": trials, "p": p, "seed": seed},
    )


def verify_expected_max_lemma(
    model: DistributionSpec, n: int, trials: int, r_grid=None, seed: int = 0
) -> VerifierReport:
    """Compare the Monte Carlo expected maximum entry against its infimum bound.

    lhs = [E max_i ||x_i||_inf^4]^(1/4) over `trials` replicates of n draws;
    rhs = min over the grid of (np)^(1/(4r)) mu_{4r}.  Gaussian models use the
    exact closed-form moments; other families fall back to empirical moments
    from a calibration draw (recorded in the detail block).
    """
    if n < 1 or trials < 2:
        raise ValueError("need n >= 1 and trials >= 2")
    p = model.p
    draw = make_sampler(model)
    grid = _usable_r_grid(model, n, p, r_grid)
    if not grid:
        raise ValueError("no usable grid points for this model")

    if model.family == "gaussian":
        sigma = materialize(model.covariance)
        mu_fn = lambda order: gaussian_mu(sigma, order / 2.0, exact=True)
        provenance = "closed_form"
    else:
        cal = SampleSet(
            draw(max(8192, n), derive_rng(seed, _CALIBRATION_STREAM)),
            seed=seed,
            model=model,
        )
        mu_fn = lambda order: empirical_mu(cal, order)
        provenance = "empirical"

    rng = derive_rng(seed, 0)
    maxima = np.empty(trials)
    chunk = max(1, 2**22 // max(1, n * p))
    done = 0
    while done < trials:
        c = min(chunk, trials - done)
        x = draw(c * n, rng).reshape(c, n, p)
        maxima[done : done + c] = np.max(np.abs(x), axis=(1, 2)) ** 4
        done += c

    mean = float(np.mean(maxima))
    lhs = mean**0.25
    se_mean = float(np.std(maxima, ddof=1)) / math.sqrt(trials)
    se = se_mean / (4.0 * mean**0.75) if mean > 0.0 else 0.0
    rhs = min((n * p) ** (1.0 / (4.0 * r)) * mu_fn(4.0 * r) for r in grid)
    slack = 3.0 * se
    return VerifierReport(
        name="expected_max_lemma",
        holds=lhs <= rhs + slack,
        lhs=lhs,
        rhs=rhs,
        ratio=lhs / rhs if rhs > 0.0 else 0.0,
        slack=slack,
        detail={"n": n, "trials": trials, "seed": seed, "mu_provenance": provenance},
    )


def verify_symmetrization(
    model: DistributionSpec, mask: Mask, n: int, trials: int, seed: int
) -> VerifierReport:
    """Check E||sum_i (Z_i - E Z_i)|| <= 2 E||sum_i xi_i Z_i|| for Z_i = M o x_i x_i*.

    Both sides are estimated on the same per-trial samples with fresh
    Rademacher signs, and compared with 3 standard errors of the difference.
    """
    if n < 1 or trials < 2:
        raise ValueError("need n >= 1 and trials >= 2")
    if mask.dim != model.p:
        raise ValueError("mask and model dimensions differ")
    sigma = materialize(model.covariance)
    m = mask.matrix.mat
    target = n * (m * sigma.mat)
    draw = make_sampler(model)

    lhs_vals = np.empty(trials)
    rhs_vals = np.empty(trials)
    for t in range(trials):
        rng = derive_rng(seed, t)
        x = draw(n, rng)
        signs = rng.integers(0, 2, size=n) * 2.0 - 1.0
        centered = m * (x.T @ x) - target
        signed = m * ((x * signs[:, None]).T @ x)
        lhs_vals[t] = _spectral_norms_stacked(0.5 * (centered + centered.T))
        rhs_vals[t] = 2.0 * _spectral_norms_stacked(0.5 * (signed + signed.T))

    diff = lhs_vals - rhs_vals
    se_diff = float(np.std(diff, ddof=1)) / math.sqrt(trials)
    lhs = float(np.mean(lhs_vals))
    rhs = float(np.mean(rhs_vals))
    slack = 3.0 * se_diff
    return VerifierReport(
        name="symmetrization",
        holds=lhs <= rhs + slack,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        detail={"n": n, "trials": trials, "seed": seed},
    )


def verify_khintchine(
    matrices, r: float, trials: int = 0, seed: int = 0, exact: bool | None = None
) -> VerifierReport:
    """Check the sign-sum Schatten-norm inequality (E||sum xi_i A_i||_r^r)^(1/r) <= rhs.

    With k <= 20 summands the expectation is enumerated over all 2^k sign
    patterns and the check carries zero statistical slack (only the relative
    floating-point guard).  Larger ensembles are sampled, with 3-SE slack.
    """
    mats = [a.mat for a in matrices]
    if not mats:
        raise ValueError("need at least one matrix")
    k = len(mats)
    p = mats[0].shape[0]
    if exact is None:
        exact = k <= 20
    if exact and k > 20:
        raise ValueError("exact enumeration supported only for k <= 20 summands")
    rhs = khintchine_rhs(matrices, r)
    stack = np.stack(mats)

    def schatten_pow(chunk_signs: np.ndarray) -> np.ndarray:
        sums = np.tensordot(chunk_signs, stack, axes=(1, 0))
        lam = np.linalg.eigvalsh(sums)
        return np.sum(np.abs(lam) ** r, axis=1)

    if exact:
        count = 2**k
        acc = 0.0
        chunk = 1 << 16
        for lo in range(0, count, chunk):
            idx = np.arange(lo, min(lo + chunk, count), dtype=np.uint64)
            signs = 1.0 - 2.0 * ((idx[:, None] >> np.arange(k, dtype=np.uint64)) & 1)
            acc += float(np.sum(schatten_pow(signs)))
        mean = acc / count
        lhs = mean ** (1.0 / r)
        holds = lhs <= rhs * (1.0 + _FLOAT_GUARD)
        slack = None
    else:
        if trials < 2:
            raise ValueError("sampled mode needs trials >= 2")
        rng = derive_rng(seed, 0)
        signs = rng.integers(0, 2, size=(trials, k)) * 2.0 - 1.0
        vals = schatten_pow(signs)
        mean = float(np.mean(vals))
        lhs = mean ** (1.0 / r)
        se_mean = float(np.std(vals, ddof=1)) / math.sqrt(trials)
        se = se_mean / (r * mean ** (1.0 - 1.0 / r)) if mean > 0.0 else 0.0
        slack = 3.0 * se
        holds = lhs <= rhs + slack
    return VerifierReport(
        name="khintchine",
        holds=holds,
        lhs=lhs,
        rhs=rhs,
        ratio=lhs / rhs if rhs > 0.0 else 0.0,
        slack=slack,
        detail={"k": k, "p": p, "r": r, "mode": "exact" if exact else "sampled"},
    )


@dataclass(frozen=True)
class EnsembleSpec:
    """Random matrix ensemble for the moment-inequality verifier.

    Summands are W_i = M o x_i x_i* when a mask is present, else plain
    rank-one outer products x_i x_i*; the self-adjoint part attaches fresh
    Rademacher signs.
    """

    model: DistributionSpec
    k: int
    mask: Mask | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.mask is not None and self.mask.dim != self.model.p:
            raise ValueError("mask and model dimensions differ")


def verify_moment_inequality(
    ensemble: EnsembleSpec, q: float, trials: int, seed: int, part: str
) -> VerifierReport:
    """Monte Carlo check of the PSD-sum or symmetric-sum moment inequality.

    Estimates (E||sum_i S_i||^q)^(1/q) and the bound ingredients from the same
    trials, with r = max(q, 2 log p); holds when lhs <= rhs + 3 SE(lhs).
    """
    if part not in ("psd", "selfadj"):
        raise ValueError("part must be 'psd' or 'selfadj'")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    p = ensemble.model.p
    k = ensemble.k
    r = max(q, 2.0 * math.log(p))
    draw = make_sampler(ensemble.model)
    mask_arr = None if ensemble.mask is None else ensemble.mask.matrix.mat

    norm_q = np.empty(trials)
    max_q = np.empty(trials)
    mean_mat = np.zeros((p, p))
    mean_sq = np.zeros((p, p))
    for t in range(trials):
        rng = derive_rng(seed, t)
        x = draw(k, rng)
        if mask_arr is None:
            w = x[:, :, None] * x[:, None, :]
            norms = np.sum(x**2, axis=1)
        else:
            w = mask_arr * (x[:, :, None] * x[:, None, :])
            norms = _spectral_norms_stacked(w)
        if part == "psd":
            total = np.sum(w, axis=0)
            mean_mat += total
        else:
            signs = rng.integers(0, 2, size=k) * 2.0 - 1.0
            total = np.sum(signs[:, None, None] * w, axis=0)
            mean_sq += np.einsum("tij,tjk->ik", w, w)
        norm_q[t] = _spectral_norms_stacked(0.5 * (total + total.T)) ** q
        max_q[t] = np.max(norms) ** q

    mean_norm_q = float(np.mean(norm_q))
    lhs = mean_norm_q ** (1.0 / q)
    se_mean = float(np.std(norm_q, ddof=1)) / math.sqrt(trials)
    se = se_mean / (q * mean_norm_q ** (1.0 - 1.0 / q)) if mean_norm_q > 0.0 else 0.0
    max_term = float(np.mean(max_q))

    detail = {"k": k, "p": p, "q": q, "r": r, "trials": trials, "seed": seed,
              "max_term": max_term}
    if part == "psd":
        summed_mean = mean_mat / trials  # estimates sum_i E W_i
        mean_norm = float(
            _spectral_norms_stacked(0.5 * (summed_mean + summed_mean.T))
        )
        rhs = moment_bound_psd(mean_norm, max_term, q, r)
        detail["mean_norm"] = mean_norm
    else:
        summed_sq = mean_sq / trials  # estimates sum_i E Y_i^2
        variance_norm = math.sqrt(
            float(_spectral_norms_stacked(0.5 * (summed_sq + summed_sq.T)))
        )
        rhs = moment_bound_selfadj(variance_norm, max_term, q, r)
        detail["variance_norm"] = variance_norm

    slack = 3.0 * se
    return VerifierReport(
        name=f"moment_inequality_{part}",
        holds=lhs <= rhs + slack,
        lhs=lhs,
        rhs=rhs,
        ratio=lhs / rhs if rhs > 0.0 else 0.0,
        slack=slack,
        detail=detail,
    )


def random_sym_matrices(k: int, p: int, seed: int) -> list:
    """k independent symmetric matrices with standard normal entries (symmetrized)."""
    rng = derive_rng(seed, 0)
    a = rng.standard_normal((k, p, p))
    return [SymMatrix(0.5 * (m + m.T)) for m in a]
