"""
Design comparison harness.

Each replicate draws a truth function, evaluates it on every design, fits an
emulator with known hyperparameters and scores normalized RMSE on a held-out
Monte Carlo test set:

    nRMSE = sqrt(mean((prediction - truth)^2)) / sd(truth over the test set)

Truth sources:
  - separable_kl: KL field with a separable covariance
  - product_process: f(x) = prod_d f_d(x_d), second-order identical to the above
  - regression_plus_residual: the KL field plus random coefficients on
    constant, linear and interaction regressors (covariance not separable)

Every random draw is keyed on (master_seed, replicate, label), so tables
depend on the config alone and never on worker count.
"""

import math
import time
from collections.abc import Callable
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger
from scipy import linalg, stats

from design.designs import DesignKind, make_design
from emulator.posterior import RunEnsemble, fit
from emulator.prior import EmulatorPrior, RegressionPrior, constant_regressor, standard_regressors
from emulator.product_form import fit_product_form
from kernels.core import Kernel1D, SeparableKernel
from second_order.products import product_sample_batch
from spectral.basis import ProductBasis
from spectral.karhunen_loeve import kl_sample_batch
from utils.errors import ParameterError, SepkitError
from utils.helpers import load_config, setting, write_csv, write_json
from utils.streams import parallel_map, stream

SWEEP_MULTIPLIERS = (2, 5, 10, 20)
REPORT_HEADER = ["truth", "design", "n", "p", "replicate", "nrmse"]


class TruthSource(str, Enum):
    SEPARABLE_KL = "separable_kl"
    PRODUCT_PROCESS = "product_process"
    REGRESSION_PLUS_RESIDUAL = "regression_plus_residual"


@dataclass(frozen=True)
class ExperimentConfig:
    p: int = 2
    n_runs: int | None = None
    truth_sources: tuple[TruthSource, ...] = tuple(TruthSource)
    designs: tuple[DesignKind, ...] = (DesignKind.LHD, DesignKind.AXIS)
    replicates: int | None = None
    master_seed: int = 0
    test_set_size: int | None = None
    length_scale: float | None = None
    truncation: int | None = None
    regression_variance: float | None = None
    axis_emulator: str = "gp"
    maximin: bool = False
    n_jobs: int | None = None

    def __post_init__(self):
        defaults = {
            "replicates": setting("experiment", "replicates"),
            "test_set_size": setting("experiment", "test_set_size"),
            "length_scale": setting("experiment", "length_scale"),
            "truncation": setting("experiment", "truncation"),
            "regression_variance": setting("experiment", "regression_variance"),
        }
        for key, value in defaults.items():
            if getattr(self, key) is None:
                object.__setattr__(self, key, value)
        if self.n_runs is None:
            object.__setattr__(self, "n_runs", 10 * self.p)
        try:
            object.__setattr__(self, "truth_sources", tuple(TruthSource(t) for t in self.truth_sources))
            object.__setattr__(self, "designs", tuple(DesignKind(d) for d in self.designs))
        except ValueError as e:
            raise ParameterError(str(e)) from e

        if self.p < 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if self.n_runs < self.p + 1:
            raise ParameterError(f"n_runs must be >= p + 1 = {self.p + 1}, got {self.n_runs}")
        if self.replicates < 10:
            raise ParameterError(f"replicates must be >= 10, got {self.replicates}")
        if self.test_set_size < 2:
            raise ParameterError(f"test_set_size must be >= 2, got {self.test_set_size}")
        if self.axis_emulator not in ("product", "gp"):
            raise ParameterError(f"axis_emulator must be 'product' or 'gp', got '{self.axis_emulator}'")
        if not self.truth_sources or not self.designs:
            raise ParameterError("Need at least one truth source and one design")

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"Unknown experiment config keys: {unknown}")
        data = dict(data)
        for key in ("truth_sources", "designs"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(load_config(path))

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["truth_sources"] = [t.value for t in self.truth_sources]
        data["designs"] = [d.value for d in self.designs]
        return data

    def kernel(self) -> SeparableKernel:
        return SeparableKernel(tuple(Kernel1D("sqexp", 1.0, self.length_scale) for _ in range(self.p)))


@dataclass
class ExperimentRow:
    truth: str
    design: str
    n: int
    p: int
    replicate: int
    nrmse: float
    error: str | None = None

    def as_csv(self) -> list:
        return [self.truth, self.design, self.n, self.p, self.replicate, self.nrmse]


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[ExperimentRow] = field(default_factory=list)
    wall_seconds: float = 0.0

    def values(self, truth: str, design: str) -> np.ndarray:
        """nRMSE by replicate (NaN for failures)."""
        chosen = sorted((r for r in self.rows if r.truth == truth and r.design == design), key=lambda r: r.replicate)
        return np.array([r.nrmse for r in chosen], dtype=float)

    def median(self, truth: str, design: str) -> float:
        vals = self.values(truth, design)
        vals = vals[np.isfinite(vals)]
        return float(np.median(vals)) if vals.size else math.nan

    @property
    def failures(self) -> list[ExperimentRow]:
        return [r for r in self.rows if r.error is not None]

    def aggregates(self) -> list[dict[str, Any]]:
        out = []
        seen = sorted({(r.truth, r.design) for r in self.rows})
        for truth, design in seen:
            group = [r for r in self.rows if r.truth == truth and r.design == design]
            vals = np.array([r.nrmse for r in group], dtype=float)
            ok = vals[np.isfinite(vals)]
            q25, q50, q75 = np.percentile(ok, [25, 50, 75]) if ok.size else (math.nan,) * 3
            out.append({
                "truth": truth,
                "design": design,
                "n": group[0].n,
                "p": group[0].p,
                "replicates": len(group),
                "failures": int(vals.size - ok.size),
                "median": float(q50),
                "q25": float(q25),
                "q75": float(q75),
                "iqr": float(q75 - q25),
            })
        return out

    def write_csv(self, path: str | Path) -> Path:
        ordered = sorted(self.rows, key=lambda r: (r.truth, r.design, r.replicate))
        return write_csv(path, REPORT_HEADER, (r.as_csv() for r in ordered))

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config.to_dict(),
            "aggregates": self.aggregates(),
            "failures": [{"truth": r.truth, "design": r.design, "replicate": r.replicate, "error": r.error}
                         for r in self.failures],
        }

    def write_json(self, path: str | Path) -> Path:
        return write_json(path, self.to_dict())


# -- Truths --

Truth = Callable[[np.ndarray], np.ndarray]


def draw_truths(cfg: ExperimentConfig, source: TruthSource) -> list[Truth]:
    """One truth function per replicate for a source."""
    pb = ProductBasis.from_kernels(cfg.kernel().factors, cfg.truncation)
    if source is TruthSource.PRODUCT_PROCESS:
        batch = product_sample_batch(pb, cfg.master_seed, cfg.replicates, n_jobs=cfg.n_jobs)
        return [f.evaluate for f in batch]

    batch = kl_sample_batch(pb, cfg.master_seed, cfg.replicates, n_jobs=cfg.n_jobs)
    if source is TruthSource.SEPARABLE_KL:
        return [f.evaluate for f in batch]

    regression = RegressionPrior.of(
        standard_regressors(cfg.p, ("constant", "linear", "interaction"), center=0.5),
        variance=cfg.regression_variance,
    )
    truths = []
    for r, residual in enumerate(batch):
        beta = stream(cfg.master_seed, r, "regression").normal(0.0, math.sqrt(cfg.regression_variance), regression.size)
        truths.append(lambda pts, e=residual.evaluate, b=beta: e(pts) + regression.design_matrix(pts) @ b)
    return truths


# -- Scoring --

def nrmse(prediction: np.ndarray, truth: np.ndarray) -> float:
    sd = float(np.std(truth))
    if sd == 0:
        raise ParameterError("Truth is constant over the test set")
    return float(np.sqrt(np.mean((prediction - truth) ** 2)) / sd)


def gp_prior(kernel: SeparableKernel) -> EmulatorPrior:
    """Separable residual with a plug-in constant mean."""
    return EmulatorPrior(RegressionPrior.of((constant_regressor(),)), kernel, plug_in_mean=True)


def score_fit(kernel: SeparableKernel, ensemble: RunEnsemble, test_points: np.ndarray, test_values: np.ndarray) -> float:
    """nRMSE of the separable GP fitted to an ensemble; an empty ensemble predicts 0."""
    if not ensemble.size:
        return nrmse(np.zeros_like(test_values), test_values)
    post = fit(gp_prior(kernel), ensemble)
    return nrmse(post.predict(test_points).mean, test_values)


def _score_design(cfg: ExperimentConfig, kernel: SeparableKernel, kind: DesignKind, design,
                  truth: Truth, test_points: np.ndarray, test_values: np.ndarray) -> float:
    ensemble = RunEnsemble(design.points, truth(design.points))
    if kind is DesignKind.AXIS and cfg.axis_emulator == "product":
        emulator = fit_product_form(kernel, ensemble, design.meta["base_point"])
        return nrmse(emulator.predict_mean(test_points), test_values)
    return score_fit(kernel, ensemble, test_points, test_values)


def run_replicate(cfg: ExperimentConfig, replicate: int, truths: dict[TruthSource, list[Truth]]) -> list[ExperimentRow]:
    kernel = cfg.kernel()
    test_points = stream(cfg.master_seed, replicate, "test").uniform(size=(cfg.test_set_size, cfg.p))
    designs = {
        kind: make_design(kind, cfg.n_runs, cfg.p, cfg.master_seed, stream_ids=(replicate,), maximin=cfg.maximin)
        for kind in cfg.designs
    }
    rows = []
    for source in cfg.truth_sources:
        truth = truths[source][replicate]
        test_values = truth(test_points)
        for kind, design in designs.items():
            try:
                score, error = _score_design(cfg, kernel, kind, design, truth, test_points, test_values), None
            except (SepkitError, linalg.LinAlgError) as e:
                logger.exception(f"Replicate {replicate} ({source.value}/{kind.value}) failed: {e}")
                score, error = math.nan, str(e)
            rows.append(ExperimentRow(source.value, kind.value, design.n, cfg.p, replicate, score, error))
    return rows


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """
    Run every (truth, design) pair over all replicates.

    Solver failures are recorded per replicate with NaN nRMSE and never abort the run.
    """
    start = time.perf_counter()
    truths = {source: draw_truths(cfg, source) for source in cfg.truth_sources}
    per_replicate = parallel_map(lambda r: run_replicate(cfg, r, truths), range(cfg.replicates), cfg.n_jobs)
    rows = [row for rows in per_replicate for row in rows]
    report = ExperimentReport(cfg, rows, time.perf_counter() - start)
    if report.failures:
        logger.warning(f"{len(report.failures)} of {len(rows)} fits failed")
    logger.info(f"Experiment p={cfg.p} n={cfg.n_runs}: {len(rows)} scores in {report.wall_seconds:.2f}s")
    return report


@dataclass
class DesignComparison:
    truth: str
    design_a: str
    design_b: str
    median_a: float
    median_b: float
    wins_a: int
    trials: int
    p_value: float

    @property
    def ratio(self) -> float:
        """median_a / median_b."""
        return self.median_a / self.median_b if self.median_b else math.inf

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "ratio": self.ratio}


def compare_designs(report: ExperimentReport, truth: str, design_a: str, design_b: str) -> DesignComparison:
    """
    Paired one-sided sign test that design_a has lower nRMSE than design_b.

    Replicates where either score is NaN, or the two tie, are dropped.
    """
    a = report.values(truth, design_a)
    b = report.values(truth, design_b)
    if a.size != b.size or a.size == 0:
        raise ParameterError(f"No paired replicates for {truth}: {design_a} vs {design_b}")
    keep = np.isfinite(a) & np.isfinite(b) & (a != b)
    wins = int(np.sum(a[keep] < b[keep]))
    trials = int(np.sum(keep))
    p_value = float(stats.binomtest(wins, trials, 0.5, alternative="greater").pvalue) if trials else 1.0
    return DesignComparison(truth, design_a, design_b, report.median(truth, design_a),
                            report.median(truth, design_b), wins, trials, p_value)


@dataclass
class SweepTable:
    rows: list[dict[str, Any]] = field(default_factory=list)

    HEADER = ("truth", "design", "p", "multiplier", "n", "median", "q25", "q75")

    def median(self, truth: str, design: str, p: int, multiplier: int) -> float:
        for row in self.rows:
            if (row["truth"], row["design"], row["p"], row["multiplier"]) == (truth, design, p, multiplier):
                return row["median"]
        raise KeyError((truth, design, p, multiplier))

    def write_csv(self, path: str | Path) -> Path:
        return write_csv(path, list(self.HEADER), ([row[k] for k in self.HEADER] for row in self.rows))


def n10p_sweep(p_values, multipliers, cfg: ExperimentConfig) -> SweepTable:
    """
    Median nRMSE against runs-per-input for every p and multiplier.

    Raises:
        ParameterError: a multiplier outside {2, 5, 10, 20}
    """
    multipliers = sorted(set(int(m) for m in multipliers))
    bad = [m for m in multipliers if m not in SWEEP_MULTIPLIERS]
    if bad or not multipliers:
        raise ParameterError(f"Multipliers must be a non-empty subset of {SWEEP_MULTIPLIERS}, got {bad or multipliers}")
    table = SweepTable()
    for p in sorted(set(int(p) for p in p_values)):
        for m in multipliers:
            report = run_experiment(replace(cfg, p=p, n_runs=m * p))
            for agg in report.aggregates():
                table.rows.append({
                    "truth": agg["truth"],
                    "design": agg["design"],
                    "p": p,
                    "multiplier": m,
                    "n": agg["n"],
                    "median": agg["median"],
                    "q25": agg["q25"],
                    "q75": agg["q75"],
                })
    return table
