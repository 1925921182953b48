"""Iterative schemes for the lifted feasibility and soft-penalty problems.

Three solvers share the same trace format:

* ``solve_dr``       Douglas-Rachford splitting on the two projectors,
* ``solve_pocs``     plain alternating projections (backward-backward),
* ``solve_nesterov`` accelerated projected gradient on
                     g(X) = 1/2 ||L(X) - b||^2 + lambda tr(X).

All start from X = Y = 0 unless a warm start is given.  Iterates are PSD
after every step by construction (the last operation applied is always the
PSD projection).  Recovery error is recorded only when the ground truth is
supplied; the feasibility residual ||L(X) - b||_2 / ||b||_2 is always
recorded, along with tr(X).
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .linalg import dtype_for, hermitize, require_square
from .projections import leading_eigenvector, project_affine, project_psd, recovery_error
from .sensing import apply_adjoint, apply_lifted

DR = "dr"
POCS = "pocs"
NESTEROV = "nesterov"
METHODS = (DR, POCS, NESTEROV)

DIVERGENCE_LIMIT = 1e6


@dataclass
class SolverConfig:
    method: str = DR
    max_iters: int = 1000
    alpha: float = 2e-4        # Nesterov step size (2e-4 grid, 1e-4 convergence runs)
    lambda_trace: float = 0.0  # Nesterov trace penalty; 0 = pure feasibility
    stop_tol: float = 0.0      # relative-change early stop; 0 = fixed iteration count
    record_every: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.method == NESTEROV and self.alpha <= 0:
            raise ValueError("alpha must be positive for the Nesterov method")
        if self.lambda_trace < 0:
            raise ValueError("lambda_trace must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True)
class TracePoint:
    iteration: int
    recovery_error: float  # nan when no ground truth was supplied
    residual: float        # ||L(X) - b||_2 / ||b||_2
    trace_value: float     # tr(X)


@dataclass
class SolverTrace:
    points: list = dc_field(default_factory=list)
    final_X: np.ndarray | None = None
    converged: bool = False

    @property
    def final_error(self):
        return self.points[-1].recovery_error if self.points else math.nan

    @property
    def final_residual(self):
        return self.points[-1].residual if self.points else math.nan


def _residual(e, b_values, X, b_norm):
    gap = np.linalg.norm(apply_lifted(e, X) - b_values)
    return float(gap / b_norm) if b_norm > 0 else float(gap)


class _Recorder:
    def __init__(self, e, b, X0_true, record_every, max_iters):
        self.e = e
        self.b_values = b.values
        self.b_norm = float(np.linalg.norm(b.values))
        self.X0_true = X0_true
        self.every = record_every
        self.last = max_iters
        self.trace = SolverTrace()

    def record(self, k, X, forced=False):
        if self.trace.points and self.trace.points[-1].iteration == k:
            return
        if not (forced or k % self.every == 0 or k == self.last):
            return
        err = recovery_error(X, self.X0_true) if self.X0_true is not None else math.nan
        res = _residual(self.e, self.b_values, X, self.b_norm)
        tr = float(np.real(np.trace(X)))
        if not (math.isfinite(res) and math.isfinite(tr)):
            raise RuntimeError(f"non-finite iterate at iteration {k}")
        self.trace.points.append(TracePoint(k, err, res, tr))

    def finish(self, X, stop_tol, epsilon):
        self.trace.final_X = X
        self.trace.converged = self.trace.final_residual <= max(stop_tol, 10 * epsilon)
        return self.trace


def _init_state(n, dtype, X_start):
    if X_start is None:
        return np.zeros((n, n), dtype=dtype)
    X_start = require_square(X_start)
    if not np.all(np.isfinite(X_start)):
        raise ValueError("non-finite warm start")
    return hermitize(X_start).astype(dtype, copy=True)


def _rel_change(X_new, X_old):
    return np.linalg.norm(X_new - X_old) / max(1.0, np.linalg.norm(X_new))


def solve_dr(p, e, cfg, X0_true=None, X_start=None):
    """Douglas-Rachford iteration on the affine slice and the PSD cone.

    Y_k = P_aff(2 X_{k-1} - Y_{k-1}) - X_{k-1} + Y_{k-1};  X_k = P_psd(Y_k).
    """
    if cfg.method != DR:
        raise ValueError(f"config method is {cfg.method!r}, expected {DR!r}")
    dtype = dtype_for(e.field)
    Y = _init_state(e.n, dtype, X_start)
    X = project_psd(Y) if X_start is not None else Y.copy()
    rec = _Recorder(e, p.b, X0_true, cfg.record_every, cfg.max_iters)
    rec.record(0, X, forced=True)
    for k in range(1, cfg.max_iters + 1):
        try:
            Y = project_affine(p, e, 2 * X - Y) - X + Y
            X_new = project_psd(Y)
        except Exception as err:
            raise RuntimeError(f"iteration {k}: {err}") from err
        rec.record(k, X_new)
        stop = cfg.stop_tol > 0 and _rel_change(X_new, X) <= cfg.stop_tol
        X = X_new
        if stop:
            rec.record(k, X, forced=True)
            break
    return rec.finish(X, cfg.stop_tol, p.b.epsilon)


def solve_pocs(p, e, cfg, X0_true=None, X_start=None):
    """Alternating projections X_{k} = P_psd(P_aff(X_{k-1}))."""
    if cfg.method != POCS:
        raise ValueError(f"config method is {cfg.method!r}, expected {POCS!r}")
    X = _init_state(e.n, dtype_for(e.field), X_start)
    rec = _Recorder(e, p.b, X0_true, cfg.record_every, cfg.max_iters)
    rec.record(0, X, forced=True)
    for k in range(1, cfg.max_iters + 1):
        try:
            X_new = project_psd(project_affine(p, e, X))
        except Exception as err:
            raise RuntimeError(f"iteration {k}: {err}") from err
        rec.record(k, X_new)
        stop = cfg.stop_tol > 0 and _rel_change(X_new, X) <= cfg.stop_tol
        X = X_new
        if stop:
            rec.record(k, X, forced=True)
            break
    return rec.finish(X, cfg.stop_tol, p.b.epsilon)


def solve_nesterov(e, b, cfg, X0_true=None, X_start=None):
    """Accelerated projected gradient with constant step size.

    X_k     = P_psd(Y_{k-1} - alpha grad g(Y_{k-1})),
    theta_k = 2 (1 + sqrt(1 + 4/theta_{k-1}^2))^{-1},     theta_0 = 1,
    beta_k  = theta_k (1/theta_{k-1} - 1),
    Y_k     = X_k + beta_k (X_k - X_{k-1}),

    with grad g(X) = L*(L(X) - b) + lambda I.  Aborts when the feasibility
    residual exceeds 1e6 (step size too large).
    """
    if cfg.method != NESTEROV:
        raise ValueError(f"config method is {cfg.method!r}, expected {NESTEROV!r}")
    dtype = dtype_for(e.field)
    X = _init_state(e.n, dtype, X_start)
    Y = X.copy()
    eye = np.eye(e.n, dtype=dtype)
    theta = 1.0
    rec = _Recorder(e, b, X0_true, cfg.record_every, cfg.max_iters)
    rec.record(0, X, forced=True)
    for k in range(1, cfg.max_iters + 1):
        grad = apply_adjoint(e, apply_lifted(e, Y) - b.values) + cfg.lambda_trace * eye
        X_new = project_psd(Y - cfg.alpha * grad)
        res = _residual(e, b.values, X_new, rec.b_norm)
        if not math.isfinite(res) or res > DIVERGENCE_LIMIT:
            raise RuntimeError(f"step size too large: residual {res:.3e} at iteration {k}")
        theta_new = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 / theta**2))
        beta = theta_new * (1.0 / theta - 1.0)
        Y = X_new + beta * (X_new - X)
        rec.record(k, X_new)
        stop = cfg.stop_tol > 0 and _rel_change(X_new, X) <= cfg.stop_tol
        X, theta = X_new, theta_new
        if stop:
            rec.record(k, X, forced=True)
            break
    return rec.finish(X, cfg.stop_tol, b.epsilon)


def theta_sequence(count, theta0=1.0):
    """First `count` values of the acceleration parameter recurrence."""
    out, theta = [], theta0
    for _ in range(count):
        theta = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 / theta**2))
        out.append(theta)
    return out


def round_to_vector(trace):
    """Extract x = sqrt(lambda_1) v_1 from the final iterate.

    Returns (x, eigen_gap) with eigen_gap = lambda_1 - lambda_2 for
    diagnostics; raises when the top eigenvalue is not positive.
    """
    if trace.final_X is None:
        raise ValueError("trace has no final iterate")
    X = trace.final_X
    lam1, v1 = leading_eigenvector(X)
    if lam1 <= 0:
        raise RuntimeError("no positive component")
    vals = np.sort(np.linalg.eigvalsh(X))[::-1]
    gap = float(vals[0] - vals[1]) if vals.size > 1 else float(vals[0])
    return np.sqrt(lam1) * v1, gap


def write_trace_csv(trace, path):
    """Trace export: one row per recorded iteration, round-trip floats."""
    with open(path, "w") as fh:
        fh.write("iter,recovery_error,residual,trace_value\n")
        for pt in trace.points:
            fh.write(f"{pt.iteration},{pt.recovery_error!r},{pt.residual!r},{pt.trace_value!r}\n")
