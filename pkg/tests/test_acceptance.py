"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Statistical checks carry the slack stated with each criterion (3 standard
errors for Monte Carlo inequality checks, 5 for eigenvalue/entrywise checks);
deterministic identities get only a floating-point guard.  Run with
``pytest tests/test_acceptance.py -v -s`` to see the per-criterion lines.
"""

import dataclasses
import math

import numpy as np

import maskcov.cli_io as cli
from maskcov.bounds import banded_bias_bound, sample_complexity_lv, sample_complexity_masked
from maskcov.experiments import (
    EnsembleSpec,
    ExperimentConfig,
    run_variance_experiment,
    verify_khintchine,
    verify_moment_inequality,
    verify_schur_norm_lemma,
    verify_variance_lemma,
)
from maskcov.masks import all_ones_mask, banded_mask
from maskcov.matrix_core import SymMatrix, schur_product, spectral_norm
from maskcov.models import CovarianceSpec, DistributionSpec, derive_rng, materialize


def report(num: int, label: str, ok: bool, extra: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    tail = f" ({extra})" if extra else ""
    print(f"[criterion {num:02d}] {status} - {label}{tail}")
    assert ok, f"criterion {num} failed: {label}{tail}"


def gaussian(spec: CovarianceSpec) -> DistributionSpec:
    return DistributionSpec(spec, "gaussian")


def test_criterion_01_schur_identity():
    """M o xx* equals diag(x) M diag(x) entrywise to 1e-12, 1e4 random pairs."""
    rng = derive_rng(101, 0)
    sizes = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64]
    pairs_per_size = 850  # 12 * 850 >= 1e4 pairs
    worst = 0.0
    for p in sizes:
        a = rng.standard_normal((pairs_per_size, p, p))
        m = 0.5 * (a + np.transpose(a, (0, 2, 1)))
        x = rng.standard_normal((pairs_per_size, p))
        lhs = m * (x[:, :, None] * x[:, None, :])
        diag = np.zeros_like(m)
        idx = np.arange(p)
        diag[:, idx, idx] = x
        rhs = diag @ m @ diag
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    report(1, "Schur rank-one identity", worst <= 1e-12, f"max entry gap {worst:.2e}")


def test_criterion_02_schur_norm_lemma():
    """||M o xx*|| <= ||M|| ||x||_inf^2 with zero violations over 1e4 draws at p=32."""
    rep = verify_schur_norm_lemma(10_000, 32, 202)
    report(
        2,
        "Schur product norm bound, 1e4 draws at p=32",
        rep.holds and rep.detail["violations"] == 0,
        f"max lhs-rhs {rep.max_violation:.2e}",
    )


def test_criterion_03_khintchine_exact():
    """Enumerated sign-sum Schatten moments beat sqrt(r)||(sum A^2)^(1/2)||_r, zero slack."""
    rng = derive_rng(303, 0)
    ok = True
    worst_ratio = 0.0
    for _ in range(50):
        k = int(rng.integers(1, 13))
        p = int(rng.integers(1, 7))
        mats = [SymMatrix(0.5 * (g + g.T)) for g in rng.standard_normal((k, p, p))]
        for r in (2.0, 4.0, 8.0):
            rep = verify_khintchine(mats, r, exact=True)
            ok = ok and rep.holds
            worst_ratio = max(worst_ratio, rep.ratio)
    report(3, "matrix Khintchine, exact enumeration, 50 ensembles", ok,
           f"worst lhs/rhs {worst_ratio:.4f}")


def test_criterion_04_variance_lemma():
    """lambda_max(E_hat (M o xx*)^2 - mu4^2 nu^2 ||M||_{1->2}^2 I) <= 5 SE at p=8."""
    configs = [
        (CovarianceSpec.identity(8), banded_mask(8, 3)),
        (CovarianceSpec.identity(8), all_ones_mask(8)),
        (CovarianceSpec.ar1(8, 0.5), banded_mask(8, 5)),
        (CovarianceSpec.rank_one_plus(8, 0.9, 0.1), all_ones_mask(8)),
    ]
    ok = True
    worst = -math.inf
    for i, (spec, mask) in enumerate(configs):
        rep = verify_variance_lemma(gaussian(spec), mask, 10_000, 404 + i)
        ok = ok and rep.holds
        worst = max(worst, rep.max_violation - rep.slack)
    report(4, "matrix variance bound, 4 Gaussian models at p=8", ok,
           f"worst violation-minus-slack {worst:.2e}")


def test_criterion_05_main_theorem_domination():
    """Empirical RMS error <= explicit-constant bound on a 12-config battery."""
    ok = True
    worst_ratio = 0.0
    for p in (16, 64):
        masks = {"banded5": banded_mask(p, 5), "identity": banded_mask(p, 1),
                 "all_ones": all_ones_mask(p)}
        for name, mask in masks.items():
            for n in (128, 1024):
                cfg = ExperimentConfig(
                    model=gaussian(CovarianceSpec.ar1(p, 0.6)),
                    mask=mask,
                    n=n,
                    trials=100,
                    seed=505,
                )
                res = run_variance_experiment(cfg)
                bound = res.theoretical.total
                holds = res.empirical_rms <= bound + 3.0 * res.std_error
                ok = ok and holds
                worst_ratio = max(worst_ratio, res.ratio)
    report(5, "explicit Gaussian bound dominates on 12 configs", ok,
           f"worst empirical/bound {worst_ratio:.3f}")


def test_criterion_06_n_scaling_slope():
    """log-log slope of RMS error vs n lies in [-0.6, -0.4]."""
    base = ExperimentConfig(
        model=gaussian(CovarianceSpec.ar1(64, 0.5)),
        mask=banded_mask(64, 5),
        n=128,
        trials=50,
        seed=606,
    )
    ns = [2**k for k in range(7, 14)]
    rms = []
    for n in ns:
        res = run_variance_experiment(dataclasses.replace(base, n=n))
        rms.append(res.empirical_rms)
    slope = float(np.polyfit(np.log(ns), np.log(rms), 1)[0])
    report(6, "RMS error scales like n^(-1/2)", -0.6 <= slope <= -0.4,
           f"slope {slope:.3f}")


def test_criterion_07_banded_bias():
    """Direct ||M o Sigma - Sigma|| never exceeds 2/(alpha-1)(b+1)^(1-alpha), p=512."""
    alpha, p = 2.0, 512
    sigma = materialize(CovarianceSpec.decaying(p, alpha))
    ok = True
    detail = []
    for b in (1, 2, 4, 8, 16):
        mask = banded_mask(p, 2 * b + 1)
        direct = spectral_norm(schur_product(mask.matrix, sigma) - sigma)
        closed = banded_bias_bound(alpha, b)
        ok = ok and direct <= closed + 1e-12
        detail.append(f"b={b}: {direct:.4f}<={closed:.4f}")
    report(7, "banded bias closed form dominates, decaying alpha=2 p=512", ok,
           "; ".join(detail))


def test_criterion_08_log_factor_improvement():
    """Comparison sample complexity never beats the masked one at ratio 1."""
    ok = True
    for p in (8, 64, 512):
        sigma = materialize(CovarianceSpec.identity(p))
        for bandwidth in (3, 9):
            mask = banded_mask(p, bandwidth)
            for eps in (0.1, 0.5):
                lv = sample_complexity_lv(mask, eps, 1.0)
                masked = sample_complexity_masked(mask, sigma, eps, 1.0)
                ok = ok and lv >= masked
    report(8, "log-factor improvement over the comparison bound", ok)


def test_criterion_09_correlation_effect():
    """Rank-one-dominated covariance at matched norm: smaller bound, no-larger error."""
    p, n = 64, 512
    mask = all_ones_mask(p)
    flat = ExperimentConfig(
        model=gaussian(CovarianceSpec.identity(p)), mask=mask, n=n, trials=100, seed=909
    )
    spiked = dataclasses.replace(
        flat, model=gaussian(CovarianceSpec.rank_one_plus(p, 0.9, 0.1))
    )
    res_flat = run_variance_experiment(flat)
    res_spiked = run_variance_experiment(spiked)
    bound_strict = res_spiked.theoretical.total < res_flat.theoretical.total
    rms_ok = (
        res_spiked.empirical_rms
        <= res_flat.empirical_rms + 3.0 * (res_flat.std_error + res_spiked.std_error)
    )
    report(
        9,
        "correlation lowers both bound and error at matched norm",
        bound_strict and rms_ok,
        f"bounds {res_spiked.theoretical.total:.3f}<{res_flat.theoretical.total:.3f}, "
        f"rms {res_spiked.empirical_rms:.3f} vs {res_flat.empirical_rms:.3f}",
    )


def test_criterion_10_moment_inequality():
    """PSD and signed matrix moment bounds hold on 20 random ensembles."""
    specs = [
        CovarianceSpec.identity(8),
        CovarianceSpec.ar1(8, 0.5),
        CovarianceSpec.ar1(8, -0.3),
        CovarianceSpec.decaying(8, 2.0),
        CovarianceSpec.rank_one_plus(8, 0.9, 0.1),
    ]
    ok = True
    worst_ratio = 0.0
    num = 0
    for part in ("psd", "selfadj"):
        for i, spec in enumerate(specs):
            for mask in (None, banded_mask(8, 3)):
                ensemble = EnsembleSpec(model=gaussian(spec), k=32, mask=mask)
                rep = verify_moment_inequality(ensemble, 2.0, 2000, 1000 + num, part)
                ok = ok and rep.holds
                worst_ratio = max(worst_ratio, rep.ratio)
                num += 1
    report(10, f"matrix moment inequality, {num} ensembles at p=8 k=32 q=2", ok,
           f"worst lhs/rhs {worst_ratio:.3f}")


def test_criterion_11_reproducibility(tmp_path):
    """Identical config reruns produce bit-identical CSV at any worker count."""
    import json

    config = {
        "model": {"covariance": {"kind": "ar1", "p": 16, "rho": 0.5}, "family": "gaussian"},
        "mask": {"kind": "banded", "p": 16, "bandwidth": 3},
        "n": 64,
        "trials": 20,
        "seed": 1111,
    }
    serial_cfg = tmp_path / "serial.json"
    serial_cfg.write_text(json.dumps(config))
    threaded_cfg = tmp_path / "threaded.json"
    threaded_cfg.write_text(json.dumps(dict(config, workers=8)))

    outputs = []
    for name, cfg_path in [("a", serial_cfg), ("b", serial_cfg), ("c", threaded_cfg)]:
        out = tmp_path / f"{name}.csv"
        code = cli.main(["experiment", "run", "--config", str(cfg_path), "--out", str(out)])
        assert code == 0
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    report(11, "bit-identical CSV across reruns and worker counts", ok)
