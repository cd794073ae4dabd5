"""Batch command-line front end.

Subcommands: spectra | integrate | fit | regularize | check | resum.  Each
reads a JSON config (--config), writes plot-ready CSV/JSON into --out, prints
a one-line summary on stdout and diagnostics on stderr.

Exit codes: 0 success, 1 check-suite failure, 2 invalid config, 3 integrand
parse error, 4 singular integrand, 5 model mismatch / unclassified divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import asymfit, ballquad, deviation, dirac
from .asymfit import (
    LogModel,
    ModelMismatchError,
    PolyLogModel,
    PowerLogModel,
    UnclassifiedDivergenceError,
)
from .ballquad import CutoffSamples, QuadratureSpec, SingularIntegrandError
from .integrand import IntegrandSyntaxError, parse_integrand

EXIT_CHECK_FAILED = 1
EXIT_BAD_CONFIG = 2
EXIT_PARSE_ERROR = 3
EXIT_SINGULAR = 4
EXIT_MODEL_MISMATCH = 5


class ConfigError(ValueError):
    pass


def _fmt(x):
    return f"{float(x):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_json(path, payload):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_config(args):
    if args.config is None:
        return {}
    try:
        with open(args.config) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from None


def _need(config, key, types, what=""):
    if key not in config:
        raise ConfigError(f"config is missing required key '{key}' {what}".rstrip())
    value = config[key]
    if not isinstance(value, types):
        raise ConfigError(f"config key '{key}' has the wrong type: {value!r}")
    return value


def _l_grid(config):
    spec = _need(config, "L_grid", dict)
    start = float(_need(spec, "start", (int, float)))
    ratio = float(_need(spec, "ratio", (int, float)))
    count = int(_need(spec, "count", int))
    if start <= 0 or ratio <= 1 or count < 1:
        raise ConfigError("L_grid needs start > 0, ratio > 1, count >= 1")
    return start * ratio ** np.arange(count)


def _quad_spec(config, args):
    spec = dict(config.get("quadrature", {}))
    if args.quad_orders:
        try:
            r, a1, a2, a3 = (int(x) for x in args.quad_orders.split(","))
        except ValueError:
            raise ConfigError("--quad-orders expects four integers r,a1,a2,a3")
        spec["radial_order"] = r
        spec["angular_orders"] = [a1, a2, a3]
    if args.seed is not None:
        spec["seed"] = args.seed
    try:
        return QuadratureSpec(
            method=spec.get("method", "tensor-gauss"),
            radial_order=int(spec.get("radial_order", 64)),
            angular_orders=tuple(spec.get("angular_orders", (32, 32, 32))),
            samples=int(spec.get("samples", 100_000)),
            seed=spec.get("seed"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _read_samples_csv(path):
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read samples file {path}: {exc}") from None
    if data.shape[1] < 3:
        raise ConfigError(f"samples file {path} needs columns L,re,im[,err]")
    err = data[:, 3] if data.shape[1] > 3 else None
    return CutoffSamples(
        q=(0.0, 0.0, 0.0, 0.0),
        m=0.0,
        grid=data[:, 0],
        values=data[:, 1] + 1j * data[:, 2],
        errors=err,
    )


def _model_from_dict(payload):
    payload = dict(payload)
    payload.pop("stderr", None)
    kind = payload.get("kind")
    if kind == "log":
        return LogModel(float(payload["phi"]), float(payload["psi"]))
    if kind == "powerlog":
        return PowerLogModel(
            float(payload["phi"]),
            float(payload["psi"]),
            float(payload["nu"]),
            float(payload["mu"]),
        )
    if kind == "polylog":
        return PolyLogModel(
            table=tuple(float(c) for c in payload["table"]),
            order=int(payload.get("order", 2)),
        )
    raise ConfigError(f"unknown model kind {kind!r}")


def cmd_spectra(args):
    config = _load_config(args)
    m = float(_need(config, "m", (int, float)))
    if "q" in config:
        points = [np.asarray(config["q"], dtype=float)]
    elif "q_grid" in config:
        spec = config["q_grid"]
        axis = np.linspace(
            float(_need(spec, "min", (int, float))),
            float(_need(spec, "max", (int, float))),
            int(_need(spec, "count", int)),
        )
        points = [np.array([a, b, c]) for a in axis for b in axis for c in axis]
    else:
        raise ConfigError("config needs 'q' or 'q_grid'")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    vectors = []
    worst = 0.0
    for q in points:
        if q.shape != (3,):
            raise ConfigError(f"q must have 3 components: {q}")
        vals = dirac.eigenvalues(q, m)
        sys_ = dirac.eigenvectors_closed_form(q, m)
        h = dirac.build_hamiltonian(q, m)
        res = np.linalg.norm(h @ sys_.vectors - sys_.vectors * vals, axis=0)
        worst = max(worst, float(np.max(res)) / max(np.linalg.norm(h), 1e-300))
        rows.append([*q, m, *vals])
        sub = dirac.spectral_subspaces(q, m)
        vectors.append(
            {
                "q": list(q),
                "eigenvalues": list(vals),
                "vectors_re": sys_.vectors.real.tolist(),
                "vectors_im": sys_.vectors.imag.tolist(),
                "frame_negative_re": sub.negative.real.tolist(),
                "frame_negative_im": sub.negative.imag.tolist(),
                "frame_positive_re": sub.positive.real.tolist(),
                "frame_positive_im": sub.positive.imag.tolist(),
            }
        )
    _write_csv(
        out / "spectra.csv",
        ["q1", "q2", "q3", "m", "lambda1", "lambda2", "lambda3", "lambda4"],
        rows,
    )
    _write_json(out / "eigenvectors.json", vectors)
    print(f"spectra: {len(rows)} points, max relative eigen-residual {worst:.3e}")
    return 0


def _parse_expr(config, key):
    source = config.get(key)
    if source is None:
        return None
    try:
        return parse_integrand(str(source))
    except IntegrandSyntaxError as exc:
        print(f"{key}: {exc}", file=sys.stderr)
        raise


def cmd_integrate(args):
    config = _load_config(args)
    grid = _l_grid(config)
    q = np.asarray(config.get("q", [0.0, 0.0, 0.0, 0.0]), dtype=float)
    m = float(config.get("m", 0.0))
    spec = _quad_spec(config, args)
    f_re = _parse_expr(config, "integrand_re")
    f_im = _parse_expr(config, "integrand_im")
    if f_re is None and f_im is None:
        raise ConfigError("config needs 'integrand_re' and/or 'integrand_im'")
    samples = ballquad.sample_over_cutoffs(f_re, f_im, q, m, grid, spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(
        out / "samples.csv",
        ["L", "re", "im", "err"],
        zip(samples.grid, samples.values.real, samples.values.imag, samples.errors),
    )
    print(
        f"integrate: {len(samples)} cutoffs in [{grid[0]:g}, {grid[-1]:g}], "
        f"max error estimate {np.max(samples.errors):.3e}"
    )
    return 0


def _get_samples(args, config):
    path = args.samples or config.get("samples_file")
    if path:
        return _read_samples_csv(path)
    if "integrand_re" in config or "integrand_im" in config:
        grid = _l_grid(config)
        q = np.asarray(config.get("q", [0.0, 0.0, 0.0, 0.0]), dtype=float)
        m = float(config.get("m", 0.0))
        return ballquad.sample_over_cutoffs(
            _parse_expr(config, "integrand_re"),
            _parse_expr(config, "integrand_im"),
            q,
            m,
            grid,
            _quad_spec(config, args),
        )
    raise ConfigError("provide --samples, 'samples_file', or integrand + L_grid")


def cmd_fit(args):
    config = _load_config(args)
    samples = _get_samples(args, config)
    kind = args.model or config.get("model", "auto")
    tail = float(config.get("tail_fraction", 0.5))
    degree = int(config.get("degree", 2))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "auto":
        try:
            report = asymfit.classify(samples, tail_fraction=tail, max_degree=degree + 2)
        except UnclassifiedDivergenceError as exc:
            _write_json(
                out / "fit.json",
                {"error": "unclassified divergence",
                 "attempts": [r.to_dict() for r in exc.reports]},
            )
            print(f"fit: {exc}", file=sys.stderr)
            return EXIT_MODEL_MISMATCH
    else:
        report = asymfit.fit(samples, kind, tail_fraction=tail, degree=degree)
    _write_json(out / "fit.json", report.to_dict())
    names = (
        [f"ln^{p}" for p in range(len(report.model.coefficients))]
        if report.model.kind == "polylog"
        else ["phi", "psi", "nu", "mu"][: len(report.model.coefficients)]
    )
    summary = ", ".join(
        f"{n}={c:.6g}" for n, c in zip(names, report.model.coefficients)
    )
    print(f"fit: {report.model.kind} [{summary}], decay_ok={report.decay_ok}")
    return 0


def cmd_regularize(args):
    config = _load_config(args)
    samples = _get_samples(args, config)
    eps = args.epsilon if args.epsilon is not None else float(config.get("epsilon", 0.1))
    if "model" in config and isinstance(config["model"], dict):
        model = _model_from_dict(config["model"])
    elif "fit_report" in config:
        with open(config["fit_report"]) as fh:
            model = _model_from_dict(json.load(fh)["model"])
    else:
        kind = args.model or config.get("model", "auto")
        tail = float(config.get("tail_fraction", 0.5))
        if kind == "auto":
            model = asymfit.classify(samples, tail_fraction=tail).model
        else:
            model = asymfit.fit(samples, kind, tail_fraction=tail).model
    regular = deviation.regularize_coefficient(samples, model)
    factor = deviation.factor_from_model(model, eps)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "deviation_factor.json", factor.to_dict())
    _write_csv(
        out / "regularized.csv",
        ["L", "re", "im"],
        zip(regular.grid, regular.values.real, regular.values.imag),
    )
    diffs = np.abs(np.diff(regular.values))
    converged = bool(diffs.size and diffs[-1] <= 1e-2 and np.all(np.diff(diffs) <= 0))
    _write_json(
        out / "convergence.json",
        {
            "last_difference": float(diffs[-1]) if diffs.size else 0.0,
            "differences": [float(d) for d in diffs],
            "shrinking": converged,
        },
    )
    print(
        "regularize: last |difference| "
        f"{diffs[-1] if diffs.size else 0.0:.3e}, shrinking={converged}"
    )
    return 0


def _check_spectra_suite(rng, trials, tamper):
    failures = []
    for _ in range(trials):
        q = rng.uniform(-10, 10, size=3)
        m = rng.uniform(0, 10)
        h = dirac.build_hamiltonian(q, m)
        sys_ = dirac.eigenvectors_closed_form(q, m)
        res = np.linalg.norm(h @ sys_.vectors - sys_.vectors * sys_.values, axis=0)
        if np.max(res) > 1e-10 * np.linalg.norm(h):
            failures.append(f"eigen-residual {np.max(res):.3e} at q={q}, m={m}")
            continue
        doubled = rng.random() < 0.5
        seed = int(rng.integers(2**32))
        s = dirac.random_commuting_unitary(q, m, seed=seed, doubled=doubled)
        if tamper:
            s = s + tamper * np.eye(s.shape[0]) * 1j  # breaks unitarity/commutation
        try:
            diag = dirac.simultaneous_diagonalize(q, m, s)
        except (dirac.CommutationError, dirac.SubspaceLeakageError) as exc:
            failures.append(f"seed {seed}, q={q}, m={m}: {exc}")
            continue
        if np.max(np.abs(np.abs(diag.diagonal) - 1)) > 1e-10:
            failures.append(f"seed {seed}: |d_k| deviates from 1")
        elif np.linalg.norm(diag.reconstruct() - s) > 1e-9:
            failures.append(f"seed {seed}: reconstruction defect")
    return failures


def _check_factor_suite(rng, trials):
    failures = []
    for _ in range(trials):
        factor = deviation.DeviationFactor(
            quad_coeff=rng.uniform(-1, 1),
            linear_coeff=rng.uniform(-1, 1),
            log_coeffs=tuple(rng.uniform(-1, 1, size=3)),
            gauge=rng.uniform(-np.pi, np.pi),
        )
        L = 10.0 ** rng.uniform(-2, 6)
        if abs(abs(factor(L)) - 1) > 1e-14:
            failures.append(f"|U0| deviates from 1 at L={L}")
    log_only = deviation.DeviationFactor(log_coeffs=(0.25,))
    linear = deviation.DeviationFactor(linear_coeff=0.01)
    grid = np.geomspace(10, 1e4, 16)
    if not deviation.class_a_check(log_only, 1.0, grid).verdict:
        failures.append("pure-log factor not recognized as class A")
    lin_check = deviation.class_a_check(linear, 1.0, grid)
    if lin_check.verdict:
        failures.append("e^{i eps^2 L} factor wrongly in class A")
    expected = np.exp(1j * 0.01 * 1.0)
    if np.max(np.abs(lin_check.ratios - expected)) > 1e-14:
        failures.append("linear-exponent ratio is not the constant e^{i c L0}")
    return failures, lin_check.verdict


def cmd_check(args):
    config = _load_config(args)
    seed = args.seed if args.seed is not None else int(config.get("seed", 20260826))
    trials = int(config.get("trials", 200))
    tamper = float(config.get("tamper", 0.0))
    rng = np.random.default_rng(seed)
    failures = _check_spectra_suite(rng, trials, tamper)
    factor_failures, linear_in_class_a = _check_factor_suite(rng, trials)
    failures += factor_failures
    if failures:
        for line in failures[:20]:
            print(f"check failure: {line}", file=sys.stderr)
        print(f"check: {len(failures)} failures (seed {seed})")
        return EXIT_CHECK_FAILED
    print(
        f"check: all suites passed (seed {seed}, {trials} trials); "
        f"linear factor in class A: {linear_in_class_a}"
    )
    return 0


def cmd_resum(args):
    config = _load_config(args)
    psi = [float(x) for x in _need(config, "psi", list)]
    if not psi or psi[0] != 1.0:
        print("resum: the constant list must start with psi_0 = 1", file=sys.stderr)
        return EXIT_BAD_CONFIG
    phi = float(_need(config, "phi", (int, float)))
    eps = args.epsilon if args.epsilon is not None else float(config.get("epsilon", 0.1))
    nmax = int(config.get("order", len(psi) - 1))
    l_values = [float(x) for x in config.get("L_values", [1.0, np.e, 10.0, 100.0])]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    worst = 0.0
    for L in l_values:
        result = deviation.resum_coulomb_series(psi, phi, eps, nmax, L)
        for order, residual in enumerate(result.residuals):
            rows.append([L, order, residual])
        worst = max(worst, float(np.max(result.residuals)))
    _write_csv(out / "resum_residuals.csv", ["L", "order", "residual"], rows)
    print(f"resum: max per-order residual {worst:.3e}")
    return 0 if worst <= 1e-12 else EXIT_CHECK_FAILED


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="scatreg",
        description="cutoff-regularization pipeline: spectra, ball integrals, "
        "divergence fits, deviation factors",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    handlers = {
        "spectra": cmd_spectra,
        "integrate": cmd_integrate,
        "fit": cmd_fit,
        "regularize": cmd_regularize,
        "check": cmd_check,
        "resum": cmd_resum,
    }
    for name, handler in handlers.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--threads", type=int, default=1,
                       help="advisory worker count; results are identical for any value")
        p.add_argument("--quad-orders", help="radial,ang1,ang2,ang3")
        p.add_argument("--model", choices=["log", "powerlog", "polylog", "auto"])
        p.add_argument("--epsilon", type=float, help="coupling value")
        p.add_argument("--samples", help="CSV file of cutoff samples (L,re,im[,err])")
        p.set_defaults(handler=handler)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except IntegrandSyntaxError:
        return EXIT_PARSE_ERROR
    except SingularIntegrandError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_SINGULAR
    except (ModelMismatchError, UnclassifiedDivergenceError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_MODEL_MISMATCH


if __name__ == "__main__":
    sys.exit(main())
