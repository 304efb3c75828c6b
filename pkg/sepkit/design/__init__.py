"""
Design package - experimental designs and the design comparison harness.

Modules:
- designs: Latin hypercube, axis-aligned, full-grid and Monte Carlo designs
- experiment: truth draws, emulator scoring, reports, sign tests, n = 10p sweeps
"""

from design.designs import (
    Design,
    DesignKind,
    axis_design,
    axis_runs,
    full_grid,
    lhd,
    make_design,
    monte_carlo,
    sweep_values,
)
from design.experiment import (
    DesignComparison,
    ExperimentConfig,
    ExperimentReport,
    ExperimentRow,
    SweepTable,
    TruthSource,
    compare_designs,
    draw_truths,
    n10p_sweep,
    nrmse,
    run_experiment,
    score_fit,
)

__all__ = [
    "Design",
    "DesignComparison",
    "DesignKind",
    "ExperimentConfig",
    "ExperimentReport",
    "ExperimentRow",
    "SweepTable",
    "TruthSource",
    "axis_design",
    "axis_runs",
    "compare_designs",
    "draw_truths",
    "full_grid",
    "lhd",
    "make_design",
    "monte_carlo",
    "n10p_sweep",
    "nrmse",
    "run_experiment",
    "score_fit",
    "sweep_values",
]
