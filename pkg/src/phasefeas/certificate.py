"""Inexact dual certificate: construction and empirical verification.

The certificate for a unit signal direction x0 is the truncated sample
average

    Ybar = (1/m) sum_i 1_{E_i} w_i z_i z_i*,

with per-sample weights

    real:     w_i = 3/(n+2) ||z_i||^2 - <z_i, x0>^2,
    complex:  w_i = 4/(n+1) ||z_i||^2 - 2 |<z_i, x0>|^2,

and truncation events E_i = {|<z_i, x0>| <= sqrt(2 beta log n)} and
{||z_i|| <= sqrt(3n)}.  beta = inf disables truncation (both clauses), which
exposes the plain sample average whose expectation is the exact limit
certificate.  The weight vector lam with Ybar = L*(lam) is returned
alongside, since its l1 norm is what the stability argument controls.

Uniqueness holds when the certificate is small on the tangent space T and
uniformly positive on its complement; ``check_certificate`` measures exactly
those quantities and compares them against the fixed thresholds 1/2, 1, 5.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .linalg import COMPLEX, REAL, check_anchor, project_T, schatten_norm
from .sensing import apply_adjoint, apply_lifted

Y_T_NUCLEAR_MAX = 0.5
T_PERP_MIN_EIG = 1.0
LAMBDA_L1_MAX = 5.0


@dataclass(frozen=True)
class CertificateParams:
    anchor: np.ndarray
    beta: float = 1.0  # math.inf disables truncation


@dataclass(frozen=True)
class CertificateReport:
    y_t_nuclear: float      # nuclear norm of the tangent part
    t_perp_min_eig: float   # smallest eigenvalue of the T-perp block
    t_perp_dev: float       # spectral distance of the T-perp block from 2I
    lambda_l1: float
    truncation_rate: float  # fraction of samples removed by the events
    pass_y_t: bool
    pass_t_perp: bool
    pass_lambda: bool

    @property
    def all_pass(self):
        return self.pass_y_t and self.pass_t_perp and self.pass_lambda

    def to_lines(self):
        """key=value emission, one line per report field."""
        return [
            f"y_t_nuclear={self.y_t_nuclear!r}",
            f"t_perp_min_eig={self.t_perp_min_eig!r}",
            f"t_perp_dev={self.t_perp_dev!r}",
            f"lambda_l1={self.lambda_l1!r}",
            f"truncation_rate={self.truncation_rate!r}",
            f"pass_y_t={self.pass_y_t}",
            f"pass_t_perp={self.pass_t_perp}",
            f"pass_lambda={self.pass_lambda}",
        ]


def certificate_weights(e, anchor):
    """Per-sample weights, before truncation."""
    Z = e.vectors
    corr = np.abs(Z.conj() @ anchor) ** 2
    sq = np.sum(np.abs(Z) ** 2, axis=1)
    if e.field == REAL:
        return 3.0 / (e.n + 2) * sq - corr
    return 4.0 / (e.n + 1) * sq - 2.0 * corr


def truncation_mask(e, anchor, beta):
    """1 on the kept samples; beta = inf keeps everything."""
    if math.isinf(beta):
        return np.ones(e.m, dtype=bool)
    Z = e.vectors
    corr = np.abs(Z.conj() @ anchor)
    sq = np.sqrt(np.sum(np.abs(Z) ** 2, axis=1))
    return (corr <= math.sqrt(2.0 * beta * math.log(e.n))) & (sq <= math.sqrt(3.0 * e.n))


def build_certificate(e, params):
    """Return (Ybar, lam) with Ybar = L*(lam)."""
    anchor = check_anchor(params.anchor)
    if anchor.shape[0] != e.n:
        raise ValueError(f"dimension mismatch: anchor {anchor.shape} vs ensemble n={e.n}")
    if e.n < 2:
        raise ValueError("certificate requires n >= 2 (log n degenerates the truncation event)")
    if not math.isinf(params.beta) and params.beta <= 0:
        raise ValueError(f"beta must be positive, got {params.beta}")
    lam = truncation_mask(e, anchor, params.beta) * certificate_weights(e, anchor) / e.m
    return apply_adjoint(e, lam), lam


def check_certificate(Ybar, lam, anchor):
    """Measure the certificate against the fixed uniqueness thresholds."""
    anchor = check_anchor(anchor)
    n = anchor.shape[0]
    if Ybar.shape != (n, n):
        raise ValueError(f"dimension mismatch: Ybar {Ybar.shape} vs anchor n={n}")
    if n < 2:
        raise ValueError("certificate check requires n >= 2")
    y_t_nuclear = schatten_norm(project_T(Ybar, anchor), 1)
    Q = _perp_basis(anchor)
    block = Q.conj().T @ Ybar @ Q
    block = (block + block.conj().T) / 2
    eigs = np.linalg.eigvalsh(block)
    t_perp_min_eig = float(eigs[0])
    t_perp_dev = float(np.max(np.abs(eigs - 2.0)))
    lam = np.asarray(lam)
    lambda_l1 = float(np.sum(np.abs(lam)))
    truncation_rate = float(np.mean(lam == 0.0))
    return CertificateReport(
        y_t_nuclear=float(y_t_nuclear),
        t_perp_min_eig=t_perp_min_eig,
        t_perp_dev=t_perp_dev,
        lambda_l1=lambda_l1,
        truncation_rate=truncation_rate,
        pass_y_t=y_t_nuclear <= Y_T_NUCLEAR_MAX,
        pass_t_perp=t_perp_min_eig >= T_PERP_MIN_EIG,
        pass_lambda=lambda_l1 <= LAMBDA_L1_MAX,
    )


def _perp_basis(anchor):
    """Deterministic orthonormal basis of the anchor's orthogonal complement."""
    n = anchor.shape[0]
    stacked = np.column_stack([anchor, np.eye(n, dtype=anchor.dtype)])
    q, _ = np.linalg.qr(stacked)
    return q[:, 1:n]


def pi_beta_bound(n, beta):
    """Closed-form bound n^(-beta) + e^(-n/3) on the truncation probability."""
    if 2.0 * beta * math.log(n) < 1.0:
        raise ValueError(f"bound requires 2 beta log n >= 1, got beta={beta}, n={n}")
    return float(n ** (-beta) + math.exp(-n / 3.0))


class IsometryEstimate(NamedTuple):
    upper_ratio: float  # max over sampled PSD X of m^-1 ||L(X)||_1 / ||X||_1
    lower_ratio: float  # min over sampled X in T of m^-1 ||L(X)||_1 / ||X||
    trials: int


def estimate_l1_isometry(e, trials, seed, anchor=None):
    """Empirical extremes of the l1-isometry ratios by random sampling.

    Per trial (in this order): one PSD sample X = B B* with B standard
    normal, and one tangent sample x0 y* + y x0* + t x0 x0*.  Sampling, not
    a sup/inf; the trial count is recorded in the result.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if anchor is None:
        anchor = np.zeros(e.n, dtype=complex if e.field == COMPLEX else float)
        anchor[0] = 1.0
    anchor = check_anchor(anchor)
    rng = np.random.default_rng(seed)
    upper, lower = -np.inf, np.inf
    for _ in range(trials):
        B = rng.standard_normal((e.n, e.n))
        y = rng.standard_normal(e.n)
        t = float(rng.standard_normal())
        if e.field == COMPLEX:
            B = B + 1j * rng.standard_normal((e.n, e.n))
            y = y + 1j * rng.standard_normal(e.n)
        X_psd = B @ B.conj().T
        ratio = np.sum(np.abs(apply_lifted(e, X_psd))) / e.m / schatten_norm(X_psd, 1)
        upper = max(upper, ratio)
        X_t = (np.outer(anchor, y.conj()) + np.outer(y, anchor.conj())
               + t * np.outer(anchor, anchor.conj()))
        ratio = np.sum(np.abs(apply_lifted(e, X_t))) / e.m / schatten_norm(X_t, np.inf)
        lower = min(lower, ratio)
    return IsometryEstimate(float(upper), float(lower), trials)
