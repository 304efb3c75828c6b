"""
sepkit - Command-line front end.

Usage:
  python sepkit/cli.py kernel     --config kernel.json     [--out-dir DIR]
  python sepkit/cli.py spectral   --config spectral.json   [--out-dir DIR]
  python sepkit/cli.py sample     --config sample.json     [--seed N] [--threads N]
  python sepkit/cli.py fit        --config fit.json        [--out-dir DIR]
  python sepkit/cli.py check      --suite eq4 [--config suite.json] [--seed N]
  python sepkit/cli.py experiment --config experiment.json [--seed N] [--threads N]

Exit codes: 0 success, 1 assertion failure, 2 usage error, 3 numerical failure.
Every command writes manifest.json and sepkit.log into --out-dir.
"""

import argparse
import os
import sys
from pathlib import Path
from typing import Any

# Add the package directory to path (works from any location)
sys.path.insert(0, os.path.dirname(os.path.realpath(__file__)))

import numpy as np  # noqa: E402
from joblib import cpu_count  # noqa: E402
from loguru import logger  # noqa: E402

from checks.router import default_router  # noqa: E402
from design.experiment import ExperimentConfig, compare_designs, n10p_sweep, run_experiment  # noqa: E402
from emulator.posterior import RunEnsemble, fit, write_posterior_csv, write_posterior_report  # noqa: E402
from emulator.prior import EmulatorPrior, RegressionPrior, standard_regressors  # noqa: E402
from kernels.core import kernel_from_dict, kernel_to_dict  # noqa: E402
from second_order.products import product_sample_batch  # noqa: E402
from services.manifest import get_manifest_service  # noqa: E402
from spectral.basis import ProductBasis, nystrom_decompose  # noqa: E402
from spectral.export import write_basis_json, write_field_csv  # noqa: E402
from spectral.karhunen_loeve import kl_sample_batch  # noqa: E402
from utils.errors import NumericalError, SepkitError, ShapeError, UsageError  # noqa: E402
from utils.helpers import load_config, reset_settings_cache, write_csv, write_json  # noqa: E402

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def configure_logging(out_dir: Path, verbose: bool) -> int:
    """Stderr sink plus a rotating DEBUG file sink; returns the file sink id."""
    logger.remove()  # Remove default stderr handler
    logger.add(sys.stderr, level="DEBUG" if verbose else "WARNING")
    return logger.add(out_dir / "sepkit.log", rotation="1 MB", retention=3, level="DEBUG")


def _kernel_spec(config: dict[str, Any]) -> dict[str, Any]:
    """The kernel object of a config, or the config itself if it is one."""
    spec = config.get("kernel", config)
    if "factors" not in spec and "family" in spec:
        return {"factors": [spec]}
    return spec


def _point_pair(entry, index: int) -> tuple[np.ndarray, np.ndarray]:
    """One 'evaluate' entry: exactly two numeric points."""
    if not isinstance(entry, list | tuple) or len(entry) != 2:
        raise UsageError(f"evaluate[{index}] must be a pair of points [p, q], got {entry!r}")
    try:
        p, q = (np.asarray(pt, dtype=float) for pt in entry)
    except (TypeError, ValueError) as e:
        raise UsageError(f"evaluate[{index}] is not numeric: {entry!r}") from e
    return p, q


def _config_dir(args) -> Path:
    return Path(args.config).parent if args.config else Path.cwd()


def _require_config(args) -> dict[str, Any]:
    if not args.config:
        raise UsageError(f"'{args.command}' needs --config")
    return load_config(args.config)


# -- Commands --

def cmd_kernel(args, config: dict[str, Any]) -> int:
    """Evaluate a kernel at point pairs and/or build a Gram matrix."""
    service = get_manifest_service()
    kernel = kernel_from_dict(_kernel_spec(config))
    out = Path(args.out_dir)
    service.add_output(write_json(out / "kernel.json", kernel_to_dict(kernel)))

    if "evaluate" in config:
        pairs = [_point_pair(entry, i) for i, entry in enumerate(config["evaluate"])]
        header = [f"p{d + 1}" for d in range(kernel.dim)] + [f"q{d + 1}" for d in range(kernel.dim)] + ["value"]
        rows = [[*map(float, p), *map(float, q), kernel(p, q)] for p, q in pairs]
        service.add_output(write_csv(out / "eval.csv", header, rows))

    if "gram" in config:
        pts = kernel.as_points(config["gram"])
        matrix = kernel.cross(pts, pts)
        rows = ([i, j, float(matrix[i, j])] for i in range(matrix.shape[0]) for j in range(matrix.shape[1]))
        service.add_output(write_csv(out / "gram.csv", ["i", "j", "value"], rows))
    return EXIT_OK


def cmd_spectral(args, config: dict[str, Any]) -> int:
    """Nystrom bases for each kernel factor."""
    service = get_manifest_service()
    kernel = kernel_from_dict(_kernel_spec(config))
    nodes = config.get("nodes")
    rank = config.get("rank")
    for d, factor in enumerate(kernel.factors):
        basis = nystrom_decompose(factor, nodes, rank)
        name = "basis.json" if kernel.dim == 1 else f"basis_{d + 1}.json"
        service.add_output(write_basis_json(basis, Path(args.out_dir) / name))
    return EXIT_OK


def cmd_sample(args, config: dict[str, Any]) -> int:
    """Draw KL or product fields on a 2-D kernel and write them on a grid."""
    service = get_manifest_service()
    kernel = kernel_from_dict(_kernel_spec(config))
    if kernel.dim != 2:
        raise ShapeError(f"sample writes x,y grids and needs a 2-D kernel, got {kernel.dim} factors")
    sampler = config.get("sampler", "kl")
    if sampler not in ("kl", "product"):
        raise UsageError(f"Unknown sampler '{sampler}', expected 'kl' or 'product'")
    count = int(config.get("count", 1))
    law = config.get("law", "gaussian")
    pb = ProductBasis.from_kernels(kernel.factors, config.get("truncation"))
    if sampler == "kl":
        batch = kl_sample_batch(pb, args.seed, count, law, args.threads)
    else:
        batch = product_sample_batch(pb, args.seed, count, law, args.threads)

    size = int(config.get("grid", 21))
    xs, ys = (np.linspace(d.lo, d.hi, size) for d in kernel.domains)
    for i, field in enumerate(batch):
        service.add_output(write_field_csv(field, xs, ys, Path(args.out_dir) / f"field_{i + 1}.csv"))
    return EXIT_OK


def cmd_fit(args, config: dict[str, Any]) -> int:
    """Fit an emulator to an ensemble CSV and predict at requested points."""
    service = get_manifest_service()
    kernel = kernel_from_dict(_kernel_spec(config))
    if "ensemble" not in config:
        raise UsageError("fit config needs an 'ensemble' CSV path")
    ensemble = RunEnsemble.from_csv(_config_dir(args) / config["ensemble"])

    regressors = standard_regressors(kernel.dim, tuple(config.get("regressors", ("constant",))),
                                     float(config.get("regressor_center", 0.0)))
    regression = RegressionPrior.of(regressors, float(config.get("regression_variance", 0.0)),
                                    float(config.get("regression_mean", 0.0)))
    prior = EmulatorPrior(regression, kernel, bool(config.get("plug_in_mean", False)))
    with service.timed("fit"):
        post = fit(prior, ensemble, config.get("noise_jitter"))

    if "predict" in config:
        pts = kernel.as_points(config["predict"])
    else:
        pts = ensemble.design
    out = Path(args.out_dir)
    with service.timed("predict"):
        service.add_output(write_posterior_csv(post, pts, out / "posterior.csv"))
    service.add_output(write_posterior_report(post, out / "fit_report.json", {"predicted_points": len(pts)}))
    return EXIT_OK


def cmd_check(args, config: dict[str, Any]) -> int:
    """Run one property suite; exit 1 if any assertion fails."""
    service = get_manifest_service()
    router = default_router()
    report = router.run(args.suite, config, args.seed, args.threads)
    service.manifest.wall_times[args.suite] = report.seconds
    service.add_output(write_json(Path(args.out_dir) / f"check_{args.suite}.json", report.to_dict()))
    return EXIT_OK if report.passed else EXIT_ASSERTION


def cmd_experiment(args, config: dict[str, Any]) -> int:
    """Run the design comparison harness (and optional n = 10p sweep)."""
    service = get_manifest_service()
    config = dict(config)
    sweep = config.pop("sweep", None)
    if args.seed is not None:
        config["master_seed"] = args.seed
    config.setdefault("n_jobs", args.threads)
    cfg = ExperimentConfig.from_dict(config)
    service.manifest.master_seed = cfg.master_seed
    out = Path(args.out_dir)

    with service.timed("experiment"):
        report = run_experiment(cfg)
    service.add_output(report.write_csv(out / "experiment.csv"))
    summary = report.to_dict()
    designs = [d.value for d in cfg.designs]
    if "lhd" in designs and "axis" in designs:
        summary["comparisons"] = [compare_designs(report, t.value, "lhd", "axis").to_dict() for t in cfg.truth_sources]
    service.add_output(write_json(out / "experiment.json", summary))

    if sweep:
        with service.timed("sweep"):
            table = n10p_sweep(sweep.get("p_values", [cfg.p]), sweep.get("multipliers", [2, 5, 10, 20]), cfg)
        service.add_output(table.write_csv(out / "sweep.csv"))
    return EXIT_OK


COMMANDS = {
    "kernel": cmd_kernel,
    "spectral": cmd_spectral,
    "sample": cmd_sample,
    "fit": cmd_fit,
    "check": cmd_check,
    "experiment": cmd_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON (or .toml) config file")
    common.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    common.add_argument("--out-dir", default=".", help="directory for outputs, log and manifest")
    common.add_argument("--threads", type=int, default=cpu_count(), help="worker threads")
    common.add_argument("--settings", help="alternative settings.toml")
    common.add_argument("--verbose", action="store_true", help="DEBUG logging on stderr")

    parser = argparse.ArgumentParser(prog="sepkit", description="Separable covariance toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=fn.__doc__)
        if name == "check":
            p.add_argument("--suite", required=True, help="eq4, eq5, isotropy, mercer or second_order")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sink = configure_logging(out_dir, args.verbose)
    if args.settings:
        reset_settings_cache(Path(args.settings))
    if args.threads is not None and args.threads < 1:
        args.threads = 1

    service = get_manifest_service()
    service.begin(args.command, out_dir, args.config, args.seed or 0)
    if args.seed is None and args.command != "experiment":
        args.seed = 0

    try:
        if args.command == "check":
            config = load_config(args.config) if args.config else {}
        else:
            config = _require_config(args)
        code = COMMANDS[args.command](args, config)
    except NumericalError as e:
        logger.exception(f"Numerical failure: {e}")
        code = EXIT_NUMERICAL
    except SepkitError as e:
        logger.error(f"Usage error: {e}")
        code = EXIT_USAGE
    except (ValueError, KeyError, TypeError) as e:
        logger.exception(f"Malformed input: {e!r}")
        code = EXIT_USAGE

    service.finish(code)
    logger.remove(sink)
    if args.settings:
        reset_settings_cache()
    return code


if __name__ == "__main__":
    sys.exit(main())
