"""
Experimental designs on the unit (or given) box.

- lhd: stratified permutation Latin hypercube, optional maximin selection
- axis_design: base point plus one-factor-at-a-time sweeps
- full_grid: tensor grid with per-axis bin centres
- monte_carlo: independent uniform points
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from loguru import logger
from scipy.spatial.distance import pdist

from emulator.grid import GridDesign
from kernels.core import Interval
from utils.errors import DomainError, ParameterError
from utils.helpers import setting
from utils.streams import stream


class DesignKind(str, Enum):
    LHD = "lhd"
    AXIS = "axis"
    FULL_GRID = "grid"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True, eq=False)
class Design:
    kind: DesignKind
    points: np.ndarray
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def p(self) -> int:
        return int(self.points.shape[1])

    def grid(self) -> GridDesign:
        """Per-axis structure of a full-grid design."""
        if self.kind is not DesignKind.FULL_GRID:
            raise ParameterError(f"{self.kind.value} design has no grid structure")
        return GridDesign(tuple(np.asarray(a) for a in self.meta["axis_points"]))


def _domains(p: int, domains) -> tuple[Interval, ...]:
    if domains is None:
        return (Interval(),) * p
    domains = tuple(d if isinstance(d, Interval) else Interval(*d) for d in domains)
    if len(domains) != p:
        raise ParameterError(f"Need {p} domains, got {len(domains)}")
    return domains


def _scale(unit: np.ndarray, domains: tuple[Interval, ...]) -> np.ndarray:
    lo = np.array([d.lo for d in domains])
    width = np.array([d.width for d in domains])
    return lo + unit * width


def _min_distance(points: np.ndarray) -> float:
    return float(np.min(pdist(points))) if points.shape[0] > 1 else float("inf")


def _lhd_unit(rng: np.random.Generator, n: int, p: int, centered: bool) -> np.ndarray:
    cells = np.column_stack([rng.permutation(n) for _ in range(p)]).astype(float)
    offsets = 0.5 if centered else rng.uniform(size=(n, p))
    return (cells + offsets) / n


def lhd(n: int, p: int, seed: int = 0, *, maximin: bool = False, candidates: int | None = None,
        centered: bool = False, domains=None, stream_ids: tuple = ()) -> Design:
    """
    Latin hypercube: every 1-D projection hits each of n equal bins once.

    Args:
        n: number of points (>= 1)
        p: number of inputs
        seed: master seed; candidate c draws from stream(seed, *stream_ids, "lhd", c)
        maximin: keep the candidate with the largest minimum pairwise distance
        candidates: candidates tried under maximin (default [design] maximin_candidates)
        centered: place points at bin centres instead of uniformly within bins
        domains: per-input Interval (default unit interval)

    Returns:
        Design of kind LHD; candidate 0 is the plain design for the same seed,
        so maximin never does worse than it.
    """
    if n < 1 or p < 1:
        raise ParameterError(f"lhd needs n >= 1 and p >= 1, got n={n}, p={p}")
    doms = _domains(p, domains)
    tries = (candidates or setting("design", "maximin_candidates")) if maximin else 1

    best, best_score = None, -np.inf
    for c in range(tries):
        unit = _lhd_unit(stream(seed, *stream_ids, "lhd", c), n, p, centered)
        score = _min_distance(unit)
        if best is None or score > best_score:
            best, best_score = unit, score
    if maximin:
        logger.debug(f"Maximin LHD n={n} p={p}: min distance {best_score:.4f} over {tries} candidates")
    return Design(DesignKind.LHD, _scale(best, doms), {"n": n, "p": p, "seed": seed, "maximin": maximin})


def sweep_values(n_per_axis: int, domain: Interval) -> np.ndarray:
    """Quarter-offset bin positions lo + (k + 1/4)/n * width."""
    return domain.lo + (np.arange(n_per_axis) + 0.25) / n_per_axis * domain.width


def axis_design(n_per_axis: int, p: int, base_point=None, domains=None) -> Design:
    """
    One-factor-at-a-time design: base point then a sweep along each axis.

    Returns:
        Design with p * n_per_axis + 1 points, each differing from the base in
        at most one coordinate.

    Raises:
        ParameterError: n_per_axis < 2
        DomainError: base point outside the domains
    """
    if n_per_axis < 2:
        raise ParameterError(f"axis_design needs n_per_axis >= 2, got {n_per_axis}")
    doms = _domains(p, domains)
    base = np.array([d.center for d in doms]) if base_point is None else np.asarray(base_point, dtype=float).reshape(-1)
    if base.size != p:
        raise DomainError(f"Base point has {base.size} coordinates, need {p}")
    for d, dom in enumerate(doms):
        if not dom.contains(base[d]):
            raise DomainError(f"Base point coordinate {d} = {base[d]} outside [{dom.lo}, {dom.hi}]")

    points = [base]
    for d, dom in enumerate(doms):
        for k, value in enumerate(sweep_values(n_per_axis, dom)):
            if abs(value - base[d]) <= 1e-12 * dom.width:
                # shift a sweep point that lands on the base to the other side of its bin
                value = dom.lo + (k + 0.75) / n_per_axis * dom.width
            pt = base.copy()
            pt[d] = value
            points.append(pt)
    return Design(DesignKind.AXIS, np.array(points), {"n": len(points), "p": p, "n_per_axis": n_per_axis,
                                                      "base_point": [float(b) for b in base]})


def full_grid(n_per_axis: int, p: int, domains=None) -> Design:
    """Tensor grid of bin centres, points in C order (last input fastest)."""
    if n_per_axis < 1:
        raise ParameterError(f"full_grid needs n_per_axis >= 1, got {n_per_axis}")
    doms = _domains(p, domains)
    axes = tuple(d.lo + (np.arange(n_per_axis) + 0.5) / n_per_axis * d.width for d in doms)
    points = GridDesign(axes).points
    return Design(DesignKind.FULL_GRID, points, {"n": points.shape[0], "p": p, "n_per_axis": n_per_axis,
                                                 "axis_points": [a.tolist() for a in axes]})


def monte_carlo(n: int, p: int, seed: int = 0, domains=None, stream_ids: tuple = ()) -> Design:
    """Independent uniform points."""
    if n < 1:
        raise ParameterError(f"monte_carlo needs n >= 1, got {n}")
    doms = _domains(p, domains)
    unit = stream(seed, *stream_ids, "monte_carlo").uniform(size=(n, p))
    return Design(DesignKind.MONTE_CARLO, _scale(unit, doms), {"n": n, "p": p, "seed": seed})


def axis_runs(n: int, p: int) -> int:
    """Sweep length giving an axis design of about n runs."""
    return max(2, (n - 1) // p)


def grid_runs(n: int, p: int) -> int:
    """Per-axis size giving a full grid of about n runs."""
    return max(1, int(round(n ** (1.0 / p))))


def make_design(kind: DesignKind | str, n: int, p: int, seed: int = 0, *, stream_ids: tuple = (),
                maximin: bool = False) -> Design:
    """Design of roughly n runs by kind name."""
    kind = DesignKind(kind)
    if kind is DesignKind.LHD:
        return lhd(n, p, seed, maximin=maximin, stream_ids=stream_ids)
    if kind is DesignKind.AXIS:
        return axis_design(axis_runs(n, p), p)
    if kind is DesignKind.FULL_GRID:
        return full_grid(grid_runs(n, p), p)
    return monte_carlo(n, p, seed, stream_ids=stream_ids)
