"""Command-line surface, config ingestion, and result persistence.

The experiment config is a strict JSON document: unknown keys are rejected,
validation reports every violation at once, and the canonical hash of the
document goes into the run manifest so reruns are diffable.

Exit codes: 0 success, 1 validation/usage error, 2 verification failure.
Failures print a single-line JSON diagnostic to stderr.  Output files are
written to a temporary name and renamed on success, so a failed run never
leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .bounds import (
    banded_bias_bound,
    decaying_norm_bound,
    gaussian_bound,
    main_bound,
    sample_complexity_banded,
    sample_complexity_classical,
    sample_complexity_lv,
    sample_complexity_masked,
)
from .estimator import decompose_error, masked_estimator
from .masks import (
    Mask,
    all_ones_mask,
    banded_mask,
    load_mask,
    mask_complexity,
    tapered_mask,
)
from .matrix_core import read_matrix_text, write_matrix_text
from .models import (
    ConcentrationParams,
    CovarianceSpec,
    DistributionSpec,
    SampleSet,
    center_samples,
    draw_samples,
    materialize,
)
from .experiments import (
    EnsembleSpec,
    ExperimentConfig,
    StudyRow,
    run_variance_experiment,
    scaling_study,
    random_sym_matrices,
    verify_expected_max_lemma,
    verify_khintchine,
    verify_moment_inequality,
    verify_schur_norm_lemma,
    verify_symmetrization,
    verify_variance_lemma,
)

__all__ = [
    "ConfigError",
    "parse_config",
    "config_hash",
    "RunManifest",
    "write_manifest",
    "emit_csv",
    "read_csv",
    "read_samples",
    "write_samples",
    "main",
]

CSV_COLUMNS = (
    "axis_value",
    "empirical_rms",
    "std_error",
    "theoretical_total",
    "theoretical_moderate",
    "theoretical_large_dev",
    "ratio",
    "trials",
    "seed",
)

SEED_ENV_VAR = "MASKCOV_SEED"


class ConfigError(ValueError):
    """Invalid experiment config; carries the complete list of violations."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


# ---------------------------------------------------------------------------
# config parsing


def _check_keys(doc: dict, allowed, where: str, errors) -> None:
    for key in doc:
        if key not in allowed:
            errors.append(f"{where}: unknown key {key!r}")


def _get_int(doc, key, where, errors, minimum=None):
    if key not in doc:
        return None
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, int):
        errors.append(f"{where}.{key}: expected an integer, got {val!r}")
        return None
    if minimum is not None and val < minimum:
        errors.append(f"{where}.{key}: must be >= {minimum}, got {val}")
        return None
    return val


def _get_number(doc, key, where, errors):
    if key not in doc:
        return None
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.append(f"{where}.{key}: expected a number, got {val!r}")
        return None
    return float(val)


def _parse_covariance(doc, errors) -> CovarianceSpec | None:
    where = "model.covariance"
    if not isinstance(doc, dict):
        errors.append(f"{where}: expected an object")
        return None
    _check_keys(doc, {"kind", "p", "rho", "alpha", "lam", "delta", "path"}, where, errors)
    kind = doc.get("kind")
    if kind not in ("identity", "ar1", "decaying", "rank_one_plus", "custom"):
        errors.append(f"{where}.kind: unknown covariance kind {kind!r}")
        return None
    if kind == "custom":
        path = doc.get("path")
        if not isinstance(path, str):
            errors.append(f"{where}.path: custom covariance requires a file path")
            return None
        try:
            return CovarianceSpec.custom(read_matrix_text(path))
        except (OSError, ValueError) as exc:
            errors.append(f"{where}.path: {exc}")
            return None
    p = _get_int(doc, "p", "model.covariance", errors, minimum=1)
    if p is None:
        if "p" not in doc:
            errors.append(f"{where}.p: required")
        return None
    needed = {"identity": (), "ar1": ("rho",), "decaying": ("alpha",),
              "rank_one_plus": ("lam", "delta")}[kind]
    params = {}
    missing = False
    for name in needed:
        if name not in doc:
            errors.append(f"{where}.{name}: required for kind {kind!r}")
            missing = True
            continue
        val = _get_number(doc, name, where, errors)
        if val is None:
            missing = True
        params[name] = val
    if missing:
        return None
    try:
        return CovarianceSpec(kind, p, **params)
    except ValueError as exc:
        errors.append(f"{where}: {exc}")
        return None


def _parse_model(doc, errors) -> DistributionSpec | None:
    where = "model"
    if not isinstance(doc, dict):
        errors.append(f"{where}: expected an object")
        return None
    _check_keys(doc, {"covariance", "family", "df"}, where, errors)
    if "covariance" not in doc:
        errors.append(f"{where}.covariance: required")
        return None
    cov = _parse_covariance(doc["covariance"], errors)
    family = doc.get("family", "gaussian")
    if family not in ("gaussian", "student_t", "sphere_bounded"):
        errors.append(f"{where}.family: unknown family {family!r}")
        return None
    df = _get_number(doc, "df", where, errors)
    if "df" in doc and family != "student_t":
        errors.append(f"{where}.df: only valid for the student_t family")
        return None
    if cov is None:
        return None
    try:
        if family == "student_t" and df is not None:
            return DistributionSpec(cov, family, df=df)
        return DistributionSpec(cov, family)
    except ValueError as exc:
        errors.append(f"{where}: {exc}")
        return None


def _parse_mask(doc, errors, p_hint: int | None) -> Mask | None:
    where = "mask"
    if not isinstance(doc, dict):
        errors.append(f"{where}: expected an object")
        return None
    _check_keys(doc, {"kind", "p", "bandwidth", "path"}, where, errors)
    kind = doc.get("kind")
    if kind not in ("banded", "all_ones", "tapered", "custom"):
        errors.append(f"{where}.kind: unknown mask kind {kind!r}")
        return None
    if kind == "custom":
        path = doc.get("path")
        if not isinstance(path, str):
            errors.append(f"{where}.path: custom mask requires a file path")
            return None
        try:
            return load_mask(path)
        except (OSError, ValueError) as exc:
            errors.append(f"{where}.path: {exc}")
            return None
    p = _get_int(doc, "p", where, errors, minimum=1)
    if p is None and "p" not in doc:
        p = p_hint
        if p is None:
            errors.append(f"{where}.p: required")
            return None
    if p is None:
        return None
    try:
        if kind == "all_ones":
            return all_ones_mask(p)
        bandwidth = _get_int(doc, "bandwidth", where, errors)
        if bandwidth is None:
            if "bandwidth" not in doc:
                errors.append(f"{where}.bandwidth: required for {kind} masks")
            return None
        return banded_mask(p, bandwidth) if kind == "banded" else tapered_mask(p, bandwidth)
    except ValueError as exc:
        errors.append(f"{where}: {exc}")
        return None


def parse_config(path) -> ExperimentConfig:
    """Parse and fully validate an experiment config document.

    Raises ``ConfigError`` carrying every violation found, not just the first.
    """
    errors: list[str] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"config: cannot read {path}: {exc}"])
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config: invalid JSON: {exc}"])
    if not isinstance(doc, dict):
        raise ConfigError(["config: top level must be an object"])

    allowed = {"model", "mask", "n", "trials", "seed", "centered", "eps", "workers"}
    _check_keys(doc, allowed, "config", errors)

    model = _parse_model(doc.get("model"), errors) if "model" in doc else None
    if "model" not in doc:
        errors.append("config.model: required")

    p_hint = model.p if model is not None else None
    mask = _parse_mask(doc.get("mask"), errors, p_hint) if "mask" in doc else None
    if "mask" not in doc:
        errors.append("config.mask: required")

    n = _get_int(doc, "n", "config", errors, minimum=1)
    if "n" not in doc:
        errors.append("config.n: required")
    trials = _get_int(doc, "trials", "config", errors, minimum=2)
    seed = _get_int(doc, "seed", "config", errors)
    workers = _get_int(doc, "workers", "config", errors, minimum=1)

    centered = doc.get("centered", False)
    if not isinstance(centered, bool):
        errors.append(f"config.centered: expected a boolean, got {centered!r}")
        centered = False

    eps = None
    if "eps" in doc:
        eps = _get_number(doc, "eps", "config", errors)
        if eps is not None and not 0.0 < eps < 1.0:
            errors.append("config.eps: eps must lie in (0,1)")
            eps = None

    if model is not None and mask is not None and mask.dim != model.p:
        errors.append(
            f"config: mask dim {mask.dim} does not match model dim {model.p}"
        )

    if errors:
        raise ConfigError(errors)
    try:
        return ExperimentConfig(
            model=model,
            mask=mask,
            n=n,
            trials=trials if trials is not None else 100,
            seed=seed if seed is not None else 0,
            centered=centered,
            eps=eps,
            workers=workers if workers is not None else 1,
        )
    except ValueError as exc:
        raise ConfigError([f"config: {exc}"])


def config_hash(doc: dict) -> str:
    """64-bit hash of the canonical JSON form; stable under key reordering."""
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_hash: str
    tool_version: str
    started: str
    finished: str
    outputs: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "tool_version": self.tool_version,
            "started": self.started,
            "finished": self.finished,
            "outputs": list(self.outputs),
        }


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def _atomic_write(path, writer) -> None:
    """Write via a sibling temp file and rename, so failures leave no partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".maskcov-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_manifest(path, manifest: RunManifest) -> None:
    _atomic_write(path, lambda fh: fh.write(json.dumps(manifest.to_dict(), indent=2) + "\n"))


def emit_csv(rows, path) -> None:
    """Write study rows to CSV with a fixed column order and full float precision."""
    def writer(fh):
        out = csv.writer(fh)
        out.writerow(CSV_COLUMNS)
        for row in rows:
            res = row.result
            out.writerow(
                [
                    format(row.value, ".17e"),
                    format(res.empirical_rms, ".17e"),
                    format(res.std_error, ".17e"),
                    format(res.theoretical.total, ".17e"),
                    format(res.theoretical.moderate_term, ".17e"),
                    format(res.theoretical.large_dev_term, ".17e"),
                    format(res.ratio, ".17e"),
                    str(res.metadata.get("trials", "")),
                    str(res.metadata.get("seed", "")),
                ]
            )

    _atomic_write(path, writer)


def read_csv(path) -> list:
    """Read back an emitted CSV into a list of typed row dicts."""
    with open(path, "r", encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        rows = []
        for raw in reader:
            row = dict(zip(CSV_COLUMNS, raw))
            for key in CSV_COLUMNS[:-2]:
                row[key] = float(row[key])
            for key in CSV_COLUMNS[-2:]:
                row[key] = int(row[key])
            rows.append(row)
    return rows


def write_samples(path, samples: np.ndarray) -> None:
    """Samples text format: first line `n p`, then n rows of p numbers."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("samples must be a 2-d array")

    def writer(fh):
        fh.write(f"{arr.shape[0]} {arr.shape[1]}\n")
        for row in arr:
            fh.write(" ".join(format(v, ".17g") for v in row) + "\n")

    _atomic_write(path, writer)


def read_samples(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: expected `n p` header")
    try:
        n, p = int(tokens[0]), int(tokens[1])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed header") from exc
    if n < 1 or p < 1:
        raise ValueError(f"{path}: n and p must be positive")
    if len(tokens) != 2 + n * p:
        raise ValueError(f"{path}: expected {n * p} values, found {len(tokens) - 2}")
    try:
        values = np.array([float(t) for t in tokens[2:]], dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry") from exc
    return values.reshape(n, p)


# ---------------------------------------------------------------------------
# CLI


def _fail(message: str) -> int:
    print(json.dumps({"error": message}), file=sys.stderr)
    return 1


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors as single-line diagnostics, exit code 1."""

    def error(self, message):
        raise _UsageError(message)


def _print_json(doc: dict) -> None:
    print(json.dumps(doc))


def _mask_from_args(args) -> Mask:
    if getattr(args, "mask", None):
        return load_mask(args.mask)
    kind = args.mask_kind
    if kind == "all_ones":
        return all_ones_mask(args.p)
    if kind == "banded":
        return banded_mask(args.p, args.bandwidth)
    if kind == "tapered":
        return tapered_mask(args.p, args.bandwidth)
    raise ValueError(f"unknown mask kind {kind!r}")


def _covariance_from_args(args) -> CovarianceSpec:
    kind = args.cov
    if kind == "identity":
        return CovarianceSpec.identity(args.p)
    if kind == "ar1":
        return CovarianceSpec.ar1(args.p, args.rho)
    if kind == "decaying":
        return CovarianceSpec.decaying(args.p, args.alpha)
    if kind == "rank_one_plus":
        return CovarianceSpec.rank_one_plus(args.p, args.lam, args.delta)
    raise ValueError(f"unknown covariance kind {kind!r}")


def _resolve_seed(flag_seed, config_seed=None, default=0) -> int:
    """Seed precedence: command-line flag, then MASKCOV_SEED, then config/default."""
    if flag_seed is not None:
        return flag_seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {env!r}")
    if config_seed is not None:
        return config_seed
    return default


def _cmd_mask_gen(args) -> int:
    mask = _mask_from_args(args)
    write_matrix_text(mask.matrix, args.out)
    mc = mask_complexity(mask)
    _print_json(
        {
            "written": args.out,
            "kind": mask.kind,
            "p": mask.dim,
            "col_norm_sq": mc.col_norm_sq,
            "spec_norm": mc.spec_norm,
        }
    )
    return 0


def _cmd_model_gen(args) -> int:
    spec = _covariance_from_args(args)
    sigma = materialize(spec)
    outputs = []
    if args.out:
        write_matrix_text(sigma, args.out)
        outputs.append(args.out)
    if args.draw:
        if not args.samples_out:
            return _fail("model gen: --draw requires --samples-out")
        model = DistributionSpec(spec, args.family, df=args.df)
        seed = _resolve_seed(args.seed)
        samples = draw_samples(model, args.draw, seed)
        write_samples(args.samples_out, samples.samples)
        outputs.append(args.samples_out)
    _print_json({"written": outputs, "kind": spec.kind, "p": spec.p})
    return 0


def _cmd_estimate(args) -> int:
    mask = load_mask(args.mask)
    samples = SampleSet(read_samples(args.samples))
    estimate = masked_estimator(mask, samples, centered=args.centered)
    write_matrix_text(estimate, args.out)
    doc = {"written": args.out, "n": samples.n, "p": samples.p}
    if args.sigma:
        # the bias term needs the true covariance; without --sigma it is not reported
        sigma = read_matrix_text(args.sigma)
        working = center_samples(samples) if args.centered else samples
        dec = decompose_error(mask, sigma, working)
        doc["error_decomposition"] = {
            "variance_term": dec.variance_term,
            "bias_term": dec.bias_term,
            "total_bound": dec.total_bound,
            "total_actual": dec.total_actual,
        }
    _print_json(doc)
    return 0


def _require_flags(args, names, formula: str) -> None:
    missing = [f"--{name.replace('_', '-')}" for name in names if getattr(args, name) is None]
    if missing:
        raise ValueError(f"bound --formula {formula} requires {', '.join(missing)}")


def _cmd_bound(args) -> int:
    formula = args.formula
    if formula == "gaussian":
        _require_flags(args, ("mask", "sigma"), formula)
        mask = load_mask(args.mask)
        sigma = read_matrix_text(args.sigma)
        report = gaussian_bound(
            mask, sigma, args.n, mask.dim, explicit=not args.abstract, c=args.c
        )
        _print_json(report.to_dict())
        return 0
    if formula == "main":
        _require_flags(args, ("mask", "mu4", "nu", "emax_sq_root"), formula)
        mask = load_mask(args.mask)
        cp = ConcentrationParams(mu={4.0: args.mu4}, nu=args.nu, provenance="empirical")
        report = main_bound(
            mask_complexity(mask), cp, args.emax_sq_root, args.n, mask.dim
        )
        _print_json(report.to_dict())
        return 0
    if formula == "complexity-masked":
        _require_flags(args, ("mask", "sigma"), formula)
        mask = load_mask(args.mask)
        sigma = read_matrix_text(args.sigma)
        n_req = sample_complexity_masked(mask, sigma, args.eps, args.c)
    elif formula == "complexity-banded":
        _require_flags(args, ("B", "p"), formula)
        n_req = sample_complexity_banded(args.B, args.p, args.ratio, args.eps, args.c)
    elif formula == "complexity-lv":
        _require_flags(args, ("mask",), formula)
        mask = load_mask(args.mask)
        n_req = sample_complexity_lv(mask, args.eps, args.c)
    elif formula == "classical":
        _require_flags(args, ("p",), formula)
        n_req = sample_complexity_classical(args.p, args.eps, args.c)
    else:  # bias-banded
        _print_json(
            {
                "formula": "bias-banded",
                "bias_bound": banded_bias_bound(args.alpha, args.b),
                "norm_bound": decaying_norm_bound(args.alpha),
            }
        )
        return 0
    _print_json({"formula": formula, "n_required": n_req})
    return 0


def _cmd_experiment_run(args) -> int:
    cfg = parse_config(args.config)
    with open(args.config, "r", encoding="utf-8") as fh:
        raw_doc = json.load(fh)
    started = _utcnow()
    seed = _resolve_seed(args.seed, cfg.seed)
    if seed != cfg.seed:
        cfg = dataclasses.replace(cfg, seed=seed)
    if args.vary:
        values = [int(v) for v in args.values.split(",")]
        rows = scaling_study(cfg, args.vary, values)
    else:
        result = run_variance_experiment(cfg)
        rows = [StudyRow(axis="n", value=float(cfg.n), result=result)]
    emit_csv(rows, args.out)
    manifest = RunManifest(
        command="experiment run",
        config_hash=config_hash(raw_doc),
        tool_version=__version__,
        started=started,
        finished=_utcnow(),
        outputs=(args.out,),
    )
    write_manifest(args.out + ".manifest.json", manifest)
    _print_json({"written": args.out, "rows": len(rows), "config_hash": manifest.config_hash})
    return 0


def _cmd_verify(args) -> int:
    seed = _resolve_seed(args.seed)
    what = args.what
    def mask_or_all_ones():
        if args.mask or args.mask_kind:
            return _mask_from_args(args)
        return all_ones_mask(args.p)

    if what == "schur-lemma":
        report = verify_schur_norm_lemma(args.trials, args.p, seed)
    elif what == "variance-lemma":
        model = DistributionSpec(_covariance_from_args(args), "gaussian")
        report = verify_variance_lemma(model, mask_or_all_ones(), args.trials, seed)
    elif what == "expected-max":
        model = DistributionSpec(_covariance_from_args(args), args.family, df=args.df)
        report = verify_expected_max_lemma(model, args.n, args.trials, None, seed)
    elif what == "symmetrization":
        model = DistributionSpec(_covariance_from_args(args), args.family, df=args.df)
        report = verify_symmetrization(model, mask_or_all_ones(), args.n, args.trials, seed)
    elif what == "khintchine":
        matrices = random_sym_matrices(args.k, args.p, seed)
        report = verify_khintchine(
            matrices, args.r, trials=args.trials, seed=seed, exact=not args.sampled
        )
    else:  # moment-inequality
        model = DistributionSpec(_covariance_from_args(args), args.family, df=args.df)
        mask = _mask_from_args(args) if args.mask_kind or args.mask else None
        ensemble = EnsembleSpec(model=model, k=args.k, mask=mask)
        report = verify_moment_inequality(ensemble, args.q, args.trials, seed, args.part)
    _print_json(report.to_dict())
    return 0 if report.holds else 2


def _add_mask_args(parser, required: bool = False) -> None:
    parser.add_argument("--mask", help="path to a mask file (dense matrix text format)")
    parser.add_argument(
        "--mask-kind",
        choices=["banded", "all_ones", "tapered"],
        required=False,
        help="generate the mask instead of loading it",
    )
    parser.add_argument("--bandwidth", type=int, default=3)


def _add_cov_args(parser) -> None:
    parser.add_argument(
        "--cov",
        choices=["identity", "ar1", "decaying", "rank_one_plus"],
        default="identity",
    )
    parser.add_argument("--rho", type=float, default=0.5)
    parser.add_argument("--alpha", type=float, default=2.0)
    parser.add_argument("--lam", type=float, default=0.9)
    parser.add_argument("--delta", type=float, default=0.1)


def _add_family_args(parser) -> None:
    parser.add_argument(
        "--family",
        choices=["gaussian", "student_t", "sphere_bounded"],
        default="gaussian",
    )
    parser.add_argument("--df", type=float, default=9.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="maskcov",
        description="Masked covariance estimation: estimator, bounds, Monte Carlo verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mask_cmd = sub.add_parser("mask", help="mask utilities")
    mask_sub = mask_cmd.add_subparsers(dest="subcommand", required=True)
    gen = mask_sub.add_parser("gen", help="generate a mask file")
    gen.add_argument("--kind", dest="mask_kind", required=True,
                     choices=["banded", "all_ones", "tapered"])
    gen.add_argument("--p", type=int, required=True)
    gen.add_argument("--bandwidth", type=int, default=3)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_mask_gen, mask=None)

    model_cmd = sub.add_parser("model", help="model utilities")
    model_sub = model_cmd.add_subparsers(dest="subcommand", required=True)
    mgen = model_sub.add_parser("gen", help="materialize a covariance and optionally draw samples")
    mgen.add_argument("--kind", dest="cov", required=True,
                      choices=["identity", "ar1", "decaying", "rank_one_plus"])
    mgen.add_argument("--p", type=int, required=True)
    mgen.add_argument("--rho", type=float, default=0.5)
    mgen.add_argument("--alpha", type=float, default=2.0)
    mgen.add_argument("--lam", type=float, default=0.9)
    mgen.add_argument("--delta", type=float, default=0.1)
    mgen.add_argument("--out", help="covariance output file")
    mgen.add_argument("--draw", type=int, help="number of samples to draw")
    _add_family_args(mgen)
    mgen.add_argument("--seed", type=int, default=None)
    mgen.add_argument("--samples-out")
    mgen.set_defaults(func=_cmd_model_gen)

    est = sub.add_parser("estimate", help="apply the masked estimator to a samples file")
    est.add_argument("--mask", required=True)
    est.add_argument("--samples", required=True)
    est.add_argument("--centered", action="store_true")
    est.add_argument("--sigma", help="true covariance; enables the error decomposition report")
    est.add_argument("--out", required=True)
    est.set_defaults(func=_cmd_estimate)

    bound = sub.add_parser("bound", help="evaluate a closed-form bound")
    bound.add_argument(
        "--formula",
        required=True,
        choices=[
            "main",
            "gaussian",
            "complexity-masked",
            "complexity-banded",
            "complexity-lv",
            "classical",
            "bias-banded",
        ],
    )
    bound.add_argument("--mask")
    bound.add_argument("--sigma")
    bound.add_argument("--n", type=int, default=1)
    bound.add_argument("--p", type=float, default=None)
    bound.add_argument("--B", type=float, default=None)
    bound.add_argument("--eps", type=float, default=0.5)
    bound.add_argument("--ratio", type=float, default=1.0)
    bound.add_argument("--c", type=float, default=1.0)
    bound.add_argument("--alpha", type=float, default=2.0)
    bound.add_argument("--b", type=int, default=1)
    bound.add_argument("--mu4", type=float, default=None)
    bound.add_argument("--nu", type=float, default=None)
    bound.add_argument("--emax-sq-root", dest="emax_sq_root", type=float, default=None)
    bound.add_argument("--abstract", action="store_true",
                       help="gaussian formula with an abstract constant c instead of the explicit chain")
    bound.set_defaults(func=_cmd_bound)

    exp = sub.add_parser("experiment", help="Monte Carlo experiments")
    exp_sub = exp.add_subparsers(dest="subcommand", required=True)
    run = exp_sub.add_parser("run", help="run a config and write a CSV")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--vary", choices=["n", "B", "p"], default=None)
    run.add_argument("--values", help="comma-separated axis values for --vary")
    run.set_defaults(func=_cmd_experiment_run)

    ver = sub.add_parser("verify", help="verify an inequality by simulation")
    ver.add_argument(
        "what",
        choices=[
            "variance-lemma",
            "schur-lemma",
            "expected-max",
            "symmetrization",
            "khintchine",
            "moment-inequality",
        ],
    )
    ver.add_argument("--p", type=int, default=8)
    ver.add_argument("--n", type=int, default=32)
    ver.add_argument("--k", type=int, default=8)
    ver.add_argument("--q", type=float, default=2.0)
    ver.add_argument("--r", type=float, default=2.0)
    ver.add_argument("--trials", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=None)
    ver.add_argument("--part", choices=["psd", "selfadj"], default="psd")
    ver.add_argument("--sampled", action="store_true",
                     help="khintchine: sample sign patterns instead of enumerating")
    _add_mask_args(ver)
    _add_cov_args(ver)
    _add_family_args(ver)
    ver.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _fail(f"usage: {exc}")
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "violations": exc.errors}), file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
