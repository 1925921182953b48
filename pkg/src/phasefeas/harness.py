"""Experiment harness: phase-transition grids, convergence traces, heatmaps.

Every trial is a pure function of its seed: the signal, the ensemble, and
the noise draw all come from sub-streams of the per-trial seed, and the
per-trial seed is derived from (master_seed, n, m, trial).  Grid execution
is therefore invariant to worker count and ordering, and rerunning any
command with the same seed reproduces its CSV/PGM artifacts byte for byte
(which is why the nondeterministic wall_ms column stays out of the files).
"""

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np

from .projections import build_affine_projector
from .sensing import REAL, add_noise, derive_seed, measure, sample_ensemble
from .solvers import (
    DR,
    NESTEROV,
    POCS,
    SolverConfig,
    solve_dr,
    solve_nesterov,
    solve_pocs,
    write_trace_csv,
)


@dataclass
class GridSpec:
    n_values: list
    m_values: list
    trials: int = 10
    eps: float = 0.1
    solver: SolverConfig = dc_field(default_factory=SolverConfig)
    master_seed: int = 0

    def __post_init__(self):
        if not self.n_values or not self.m_values:
            raise ValueError("n_values and m_values must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class TrialRow:
    n: int
    m: int
    trial: int
    seed: int
    iters: int
    recovery_error: float  # nan marks a failed solve
    residual: float
    wall_ms: float         # informational only, never serialized


@dataclass
class GridResult:
    spec: GridSpec
    rows: list


def sample_unit_sphere(n, seed):
    """Uniform direction: a normalized standard normal vector."""
    x = np.random.default_rng(seed).standard_normal(n)
    return x / np.linalg.norm(x)


def run_trial(n, m, eps, solver, seed, trial=0):
    """One fully seeded experiment: sample, measure, corrupt, solve.

    Sub-streams of `seed`: 0 = signal direction, 1 = ensemble, 2 = noise.
    Solver failures are recorded as NaN rows rather than raised.
    """
    start = time.perf_counter()
    x0 = sample_unit_sphere(n, derive_seed(seed, 0))
    e = sample_ensemble(n, m, REAL, derive_seed(seed, 1))
    b = add_noise(measure(e, x0), eps, 1.0, seed=derive_seed(seed, 2))
    X0 = np.outer(x0, x0)
    try:
        if solver.method == NESTEROV:
            trace = solve_nesterov(e, b, solver, X0_true=X0)
        elif solver.method == POCS:
            p = build_affine_projector(e, b)
            trace = solve_pocs(p, e, solver, X0_true=X0)
        else:
            p = build_affine_projector(e, b)
            trace = solve_dr(p, e, solver, X0_true=X0)
        last = trace.points[-1]
        iters, err, res = last.iteration, last.recovery_error, last.residual
    except RuntimeError:
        iters, err, res = solver.max_iters, math.nan, math.nan
    wall_ms = (time.perf_counter() - start) * 1e3
    return TrialRow(n=n, m=m, trial=trial, seed=seed, iters=iters,
                    recovery_error=err, residual=res, wall_ms=wall_ms)


def _grid_task(args):
    n, m, trial, seed, eps, solver = args
    return run_trial(n, m, eps, solver, seed, trial=trial)


def run_grid(spec, workers=None):
    """All (n, m, trial) combinations; rows sorted, worker-count invariant."""
    tasks = [
        (n, m, t, derive_seed(spec.master_seed, n, m, t), spec.eps, spec.solver)
        for n in spec.n_values
        for m in spec.m_values
        for t in range(spec.trials)
    ]
    if workers is None or workers < 1:
        workers = os.cpu_count() or 1
    if workers == 1 or len(tasks) == 1:
        rows = [_grid_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_grid_task, tasks, chunksize=8))
    rows.sort(key=lambda r: (r.n, r.m, r.trial))
    return GridResult(spec=spec, rows=rows)


def write_grid_csv(result, path):
    """Per-trial rows; wall_ms is deliberately excluded (nondeterministic)."""
    with open(path, "w") as fh:
        fh.write("n,m,trial,seed,iters,recovery_error,residual\n")
        for r in result.rows:
            fh.write(f"{r.n},{r.m},{r.trial},{r.seed},{r.iters},"
                     f"{r.recovery_error!r},{r.residual!r}\n")


def cell_means(result):
    """Mean recovery error per (n, m); NaN rows excluded, counted separately.

    Returns {(n, m): (mean_error, failures)} with mean_error = nan when every
    trial in the cell failed.
    """
    cells = {}
    for r in result.rows:
        cells.setdefault((r.n, r.m), []).append(r.recovery_error)
    out = {}
    for key, errs in cells.items():
        good = [v for v in errs if not math.isnan(v)]
        mean = sum(good) / len(good) if good else math.nan
        out[key] = (mean, len(errs) - len(good))
    return out


def emit_heatmap(result, path):
    """ASCII PGM, one row per n (ascending, top to bottom), one column per m.

    Gray level = round(255 * (1 - min(mean_error, 1))), rounding half up:
    white is exact recovery, black is >= 100% average error (all-failure
    cells render black).
    """
    spec = result.spec
    seen = {(r.n, r.m, r.trial) for r in result.rows}
    missing = [
        (n, m, t)
        for n in spec.n_values for m in spec.m_values for t in range(spec.trials)
        if (n, m, t) not in seen
    ]
    if missing:
        head = ", ".join(map(str, missing[:5]))
        raise ValueError(f"incomplete grid: {len(missing)} missing cells ({head} ...)")
    means = cell_means(result)
    lines = [
        "P2",
        f"{len(spec.m_values)} {len(spec.n_values)}",
        "255",
    ]
    for n in sorted(spec.n_values):
        pixels = []
        for m in sorted(spec.m_values):
            mean = means[(n, m)][0]
            level = 0 if math.isnan(mean) else int(math.floor(255 * (1 - min(mean, 1.0)) + 0.5))
            pixels.append(str(level))
        lines.append(" ".join(pixels))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


CONVERGENCE_METHODS = (
    ("dr", SolverConfig(method=DR)),
    ("nesterov", SolverConfig(method=NESTEROV, alpha=1e-4, lambda_trace=0.0)),
    ("nesterov_trace", SolverConfig(method=NESTEROV, alpha=1e-4, lambda_trace=1e-5)),
)


def run_convergence_study(n, m, seeds, out_dir, iters=1000):
    """Noiseless and eps=0.1 traces for the three reference iterations.

    Writes `{method}_{eps}.csv` per combination (six files per seed); with
    several seeds each seed gets its own `seed<S>/` subdirectory.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for seed in seeds:
        target = out_dir if len(seeds) == 1 else os.path.join(out_dir, f"seed{seed}")
        os.makedirs(target, exist_ok=True)
        x0 = sample_unit_sphere(n, derive_seed(seed, 0))
        e = sample_ensemble(n, m, REAL, derive_seed(seed, 1))
        X0 = np.outer(x0, x0)
        for eps in (0.0, 0.1):
            b = add_noise(measure(e, x0), eps, 1.0, seed=derive_seed(seed, 2))
            p = build_affine_projector(e, b)
            for name, base in CONVERGENCE_METHODS:
                cfg = SolverConfig(method=base.method, max_iters=iters,
                                   alpha=base.alpha, lambda_trace=base.lambda_trace)
                if base.method == DR:
                    trace = solve_dr(p, e, cfg, X0_true=X0)
                else:
                    trace = solve_nesterov(e, b, cfg, X0_true=X0)
                path = os.path.join(target, f"{name}_{eps:g}.csv")
                write_trace_csv(trace, path)
                written.append(path)
    return written
