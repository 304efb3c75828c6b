"""
Conditioning the emulator prior on an ensemble of runs.

Full mode marginalizes the coefficients analytically (their covariance is
part of the prior covariance). Plug-in mode estimates the coefficients by
generalized least squares and conditions the residual only.
"""

import csv
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger
from scipy import linalg
from scipy.spatial.distance import pdist

from emulator.prior import EmulatorPrior
from utils.errors import NumericalError, ParameterError, ShapeError, UsageError
from utils.helpers import setting, write_csv, write_json


def _cell(row: dict[str, str], column: str, line: int, path: Path) -> float:
    try:
        return float(row[column])
    except (TypeError, ValueError) as e:
        raise ParameterError(f"{path} line {line}, column '{column}': not a number ({row[column]!r})") from e


@dataclass(frozen=True, eq=False)
class RunEnsemble:
    """Design points and the deterministic function's values there."""
    design: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        design = np.asarray(self.design, dtype=float)
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if design.ndim == 1:
            design = design[:, None]
        if design.shape[0] != values.size:
            raise ShapeError(f"{design.shape[0]} design points but {values.size} values")
        if design.shape[0] > 1 and float(np.min(pdist(design))) <= 1e-12:
            raise ParameterError("RunEnsemble design points must be distinct")
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "values", values)

    @classmethod
    def empty(cls, p: int) -> "RunEnsemble":
        return cls(np.empty((0, p)), np.empty(0))

    @property
    def size(self) -> int:
        return int(self.values.size)

    @property
    def dim(self) -> int:
        return int(self.design.shape[1])

    @classmethod
    def from_csv(cls, path: str | Path) -> "RunEnsemble":
        """Read columns x1..xp and f."""
        path = Path(path)
        if not path.exists():
            raise UsageError(f"Ensemble file not found: {path}")
        with open(path, newline="") as f:
            reader = csv.DictReader(f)
            columns = reader.fieldnames or []
            inputs = sorted((c for c in columns if c.startswith("x") and c[1:].isdigit()), key=lambda c: int(c[1:]))
            if "f" not in columns or not inputs:
                raise UsageError(f"Ensemble CSV {path} needs columns x1..xp and f, got {columns}")
            rows = list(reader)
        cells = [[_cell(row, c, i, path) for c in (*inputs, "f")] for i, row in enumerate(rows, start=2)]
        table = np.array(cells, dtype=float).reshape(len(rows), len(inputs) + 1)
        design, values = table[:, :-1], table[:, -1]
        return cls(design, values)

    def to_csv(self, path: str | Path) -> Path:
        header = [f"x{d + 1}" for d in range(self.dim)] + ["f"]
        rows = ([*map(float, pt), float(v)] for pt, v in zip(self.design, self.values, strict=True))
        return write_csv(path, header, rows)


@dataclass
class Prediction:
    mean: np.ndarray
    covariance: np.ndarray

    @property
    def sd(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))


@dataclass(frozen=True, eq=False)
class EmulatorPosterior:
    """Prior conditioned on an ensemble; immutable after fit."""
    prior: EmulatorPrior
    ensemble: RunEnsemble
    jitter: float = 0.0
    factor: tuple | None = None
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))
    coef_estimate: np.ndarray | None = None
    fit_seconds: float = 0.0

    def _prior_mean(self, points: np.ndarray) -> np.ndarray:
        if self.coef_estimate is not None:
            return self.prior.regression.design_matrix(points) @ self.coef_estimate
        return self.prior.mean(points)

    def predict(self, points) -> Prediction:
        points = self.prior.as_points(points)
        mean = self._prior_mean(points)
        cov = self.prior.cross(points, points)
        if self.ensemble.size:
            k_px = self.prior.cross(points, self.ensemble.design)
            mean = mean + k_px @ self.alpha
            cov = cov - k_px @ linalg.cho_solve(self.factor, k_px.T)
        return Prediction(mean, 0.5 * (cov + cov.T))


def _factorize(matrix: np.ndarray, jitter: float) -> tuple:
    try:
        return linalg.cho_factor(matrix, lower=True)
    except linalg.LinAlgError as e:
        worst = float(linalg.eigvalsh(matrix)[0])
        raise NumericalError(
            f"Run covariance not positive definite: worst eigenvalue {worst:.3e} with jitter {jitter:.3e}",
            worst_eigenvalue=worst,
            jitter=jitter,
        ) from e


def fit(prior: EmulatorPrior, ensemble: RunEnsemble, noise_jitter: float | None = None) -> EmulatorPosterior:
    """
    Condition the prior on the runs.

    Args:
        prior: emulator prior
        ensemble: runs (may be empty, giving the prior back)
        noise_jitter: nugget on the run covariance (default [emulator] jitter_scale x max diagonal)

    Raises:
        ShapeError: ensemble dimension differs from the prior's
        NumericalError: run covariance singular, naming its worst eigenvalue
    """
    if ensemble.size and ensemble.dim != prior.dim:
        raise ShapeError(f"Ensemble has {ensemble.dim} inputs, prior has {prior.dim}")
    if not ensemble.size:
        return EmulatorPosterior(prior, ensemble)

    start = time.perf_counter()
    design = prior.as_points(ensemble.design)
    k_xx = prior.cross(design, design)
    jitter = setting("emulator", "jitter_scale") * float(np.max(np.diag(k_xx))) if noise_jitter is None else float(noise_jitter)
    k_xx = k_xx + jitter * np.eye(ensemble.size)
    factor = _factorize(k_xx, jitter)

    coef_estimate = None
    if prior.plug_in_mean:
        h = prior.regression.design_matrix(design)
        if h.shape[1] and ensemble.size >= h.shape[1]:
            k_inv_h = linalg.cho_solve(factor, h)
            coef_estimate = linalg.solve(h.T @ k_inv_h, k_inv_h.T @ ensemble.values, assume_a="sym")
        else:
            coef_estimate = prior.regression.coef_mean
        resid = ensemble.values - h @ coef_estimate
    else:
        resid = ensemble.values - prior.mean(design)

    alpha = linalg.cho_solve(factor, resid)
    elapsed = time.perf_counter() - start
    logger.debug(f"Fitted emulator on {ensemble.size} runs (jitter {jitter:.3e}, {elapsed * 1e3:.1f} ms)")
    return EmulatorPosterior(prior, ensemble, jitter, factor, alpha, coef_estimate, elapsed)


def predict(post: EmulatorPosterior, pts) -> Prediction:
    """Posterior mean vector and covariance matrix at points."""
    return post.predict(pts)


def prior_reversion(post: EmulatorPosterior, pts) -> np.ndarray:
    """
    Posterior variance / prior variance at points.

    Near the ensemble this is small; far from it the residual reverts to its
    prior and the ratio approaches 1 unless uncertain regression terms carry
    the runs' information outwards.
    """
    pts = post.prior.as_points(pts)
    prior_var = np.diag(post.prior.cross(pts, pts))
    if prior_var.min() <= 0:
        raise ParameterError("Prior variance must be positive at every point")
    return post.predict(pts).sd ** 2 / prior_var


def write_posterior_csv(post: EmulatorPosterior, pts, path: str | Path) -> Path:
    """Write point coordinates with posterior mean and sd."""
    pts = post.prior.as_points(pts)
    pred = post.predict(pts)
    header = [f"x{d + 1}" for d in range(pts.shape[1])] + ["mean", "sd"]
    rows = ([*map(float, pt), float(m), float(s)] for pt, m, s in zip(pts, pred.mean, pred.sd, strict=True))
    return write_csv(path, header, rows)


def posterior_report(post: EmulatorPosterior, extra: dict[str, Any] | None = None) -> dict[str, Any]:
    """JSON-ready fit summary: design interpolation residual, jitter and timing."""
    report: dict[str, Any] = {
        "runs": post.ensemble.size,
        "inputs": post.prior.dim,
        "jitter": post.jitter,
        "fit_seconds": post.fit_seconds,
        "plug_in_mean": post.prior.plug_in_mean,
    }
    if post.ensemble.size:
        at_design = post.predict(post.ensemble.design)
        report["max_interpolation_error"] = float(np.max(np.abs(at_design.mean - post.ensemble.values)))
        report["max_design_sd"] = float(np.max(at_design.sd))
    if post.coef_estimate is not None:
        report["coef_estimate"] = [float(b) for b in post.coef_estimate]
    report.update(extra or {})
    return report


def write_posterior_report(post: EmulatorPosterior, path: str | Path, extra: dict[str, Any] | None = None) -> Path:
    return write_json(path, posterior_report(post, extra))
