"""
Sparse Bayesian Imaging

Recovers the RoI reflectivities sigma from the echo residual

    h = [y_{k+1} - a_{k+1}, ..., y_L - a_L, y_{L+1}, ..., y_{L+k}]

with a two-layer Gaussian/Gamma prior whose shape parameter adapts to the
spread of the learned precisions.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg as sla

from scene_model import (
    SceneConfig, PhaseSchedule, ReceivedFrame, SymbolFrame, SceneTruth,
    ShapeError, ConfigError, NumericalFailureError, comm_coefficients, imaging_rows,
)

logger = logging.getLogger(__name__)

NOISE_FLOOR = 1e-12
NORM_FLOOR = 1e-12
REGULARIZATION = 1e-12
NMSE_FLOOR = 1e-30
INITIAL_EPSILON = 1e-3


@dataclass(eq=False)
class SparseEstimate:
    """Posterior mean of sigma with the learned hyperparameters."""

    sigma: np.ndarray
    gamma: np.ndarray
    epsilon: float = INITIAL_EPSILON
    noise_est: float = 1.0
    converged: bool = False
    iterations: int = 0
    noise_held: bool = False
    regularized: bool = False

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=np.complex128).reshape(-1)
        self.gamma = np.asarray(self.gamma, dtype=np.float64).reshape(-1)
        if self.sigma.shape != self.gamma.shape:
            raise ShapeError(f"sigma has {self.sigma.size} entries, gamma has {self.gamma.size}")

    @classmethod
    def initial(cls, residual: np.ndarray, n_pixels: int) -> "SparseEstimate":
        """sigma = 0, gamma = 1, epsilon = 1e-3, noise estimate = sample variance of the residual."""
        noise = float(np.var(residual)) if residual.size else 1.0
        return cls(sigma=np.zeros(n_pixels, dtype=np.complex128), gamma=np.ones(n_pixels),
                   epsilon=INITIAL_EPSILON, noise_est=max(noise, NOISE_FLOOR))

    @classmethod
    def from_truth(cls, truth: SceneTruth) -> "SparseEstimate":
        return cls(sigma=np.array(truth.sigma), gamma=np.ones(truth.n_pixels), converged=True)

    def copy(self) -> "SparseEstimate":
        return replace(self, sigma=self.sigma.copy(), gamma=self.gamma.copy())


@dataclass(eq=False)
class ImagingSystem:
    """Symbol-scaled imaging matrix (L x M) and the residual h (length L)."""

    matrix: np.ndarray
    residual: np.ndarray

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        self.residual = np.asarray(self.residual, dtype=np.complex128).reshape(-1)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.residual.shape[0]:
            raise ShapeError(f"matrix shape {self.matrix.shape} does not match residual length {self.residual.shape[0]}")

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_pixels(self) -> int:
        return self.matrix.shape[1]


def build_residual(cfg: SceneConfig, sched: PhaseSchedule, y: ReceivedFrame, x_hat: SymbolFrame) -> ImagingSystem:
    """
    Remove the estimated communication echo from y over t = k+1..L+k.

    Rows are alpha_I g^T Theta(t) H_I x_hat(t - k); residual entries are
    y_t - c_t x_hat_t for t <= L and y_t afterwards.
    """
    y.check_shape(cfg)
    if len(x_hat) != cfg.frame_len:
        raise ShapeError(f"symbol estimate has length {len(x_hat)}, expected {cfg.frame_len}")
    L, k = cfg.frame_len, cfg.delay
    comm = comm_coefficients(cfg, sched)
    residual = np.array(y.samples[k:], dtype=np.complex128)
    residual[:L - k] -= comm[k:L] * x_hat.symbols[k:]
    matrix = cfg.alpha_i * imaging_rows(cfg, sched)[k:] * x_hat.symbols[:, None]
    return ImagingSystem(matrix=matrix, residual=residual)


def _factor(w_mat: np.ndarray):
    """Lower Cholesky factor, regularizing the diagonal once on failure."""
    try:
        return sla.cholesky(w_mat, lower=True), False
    except np.linalg.LinAlgError:
        logger.warning("SBL precision matrix not positive definite; adding %g to the diagonal", REGULARIZATION)
    try:
        return sla.cholesky(w_mat + REGULARIZATION * np.eye(w_mat.shape[0]), lower=True), True
    except np.linalg.LinAlgError as e:
        raise NumericalFailureError(0, "SBL precision matrix is singular after regularization") from e


def posterior(sys: ImagingSystem, gamma: np.ndarray, noise_est: float):
    """
    Posterior mean and marginal variances for fixed hyperparameters.

    Returns:
        (sigma, diag of the posterior covariance, regularized flag)
    """
    g_mat, h = sys.matrix, sys.residual
    w_mat = g_mat.conj().T @ g_mat / noise_est + np.diag(gamma)
    chol, regularized = _factor(w_mat)
    sigma = sla.cho_solve((chol, True), g_mat.conj().T @ h / noise_est)
    chol_inv = sla.solve_triangular(chol, np.eye(chol.shape[0]), lower=True)
    cov_diag = np.sum(np.abs(chol_inv) ** 2, axis=0)
    return sigma, cov_diag, regularized


def sbl_step(sys: ImagingSystem, est: SparseEstimate, gamma_rate: float,
             noise_update: str = "standard") -> SparseEstimate:
    """
    One pass of the adaptive SBL updates.

    Args:
        sys: Imaging system
        est: Current estimate (its gamma, epsilon and noise_est are used)
        gamma_rate: Rate of the Gamma prior on the precisions
        noise_update: "printed" divides the residual energy by L - sum(gamma);
            "standard" uses the EM rule with the posterior variances

    Returns:
        New SparseEstimate; noise_held / regularized flag recoverable conditions
    """
    if est.sigma.shape[0] != sys.n_pixels:
        raise ShapeError(f"estimate has {est.sigma.shape[0]} pixels, system has {sys.n_pixels}")
    if noise_update not in ("printed", "standard"):
        raise ConfigError(f"unknown noise_update {noise_update!r}")

    sigma, cov_diag, regularized = posterior(sys, est.gamma, est.noise_est)
    gamma = (2.0 * est.epsilon + 1.0) / (2.0 * gamma_rate + np.abs(sigma) ** 2 + cov_diag)
    spread = np.log(np.mean(gamma)) - np.mean(np.log(gamma))
    epsilon = 0.5 * np.sqrt(max(0.0, float(spread)))

    misfit = float(np.sum(np.abs(sys.residual - sys.matrix @ sigma) ** 2))
    noise_held = False
    if noise_update == "printed":
        denom = sys.n_rows - float(np.sum(gamma))
        if denom <= 0:
            noise_held = True
            noise_est = est.noise_est
        else:
            noise_est = misfit / denom
    else:
        noise_est = (misfit + est.noise_est * float(np.sum(1.0 - est.gamma * cov_diag))) / sys.n_rows
    noise_est = max(noise_est, NOISE_FLOOR)

    return SparseEstimate(sigma=sigma, gamma=gamma, epsilon=float(epsilon), noise_est=float(noise_est),
                          converged=False, iterations=est.iterations + 1,
                          noise_held=noise_held, regularized=regularized)


def run_sbl(sys: ImagingSystem, init: SparseEstimate, max_iters: int, tol: float,
            gamma_rate: float = 1e-6, noise_update: str = "standard") -> SparseEstimate:
    """Iterate sbl_step until the relative change of sigma drops below tol."""
    if max_iters < 1:
        raise ConfigError(f"max_iters must be at least 1, got {max_iters}")
    est = init
    held = regularized = False
    for _ in range(max_iters):
        nxt = sbl_step(sys, est, gamma_rate, noise_update)
        held |= nxt.noise_held
        regularized |= nxt.regularized
        change = np.linalg.norm(nxt.sigma - est.sigma) / max(np.linalg.norm(est.sigma), NORM_FLOOR)
        est = nxt
        if change < tol:
            est.converged = True
            break
    if held:
        logger.debug("SBL noise estimate held at least once (L - sum(gamma) <= 0)")
    est.noise_held, est.regularized = held, regularized
    return est


def nmse_db(sigma_hat: np.ndarray, sigma: np.ndarray) -> float:
    """10 log10(||sigma_hat - sigma||^2 / ||sigma||^2), floored at -300 dB."""
    ref = float(np.sum(np.abs(sigma) ** 2))
    if ref == 0:
        raise ValueError("NMSE is undefined for an all-zero reference scene")
    err = float(np.sum(np.abs(np.asarray(sigma_hat) - sigma) ** 2))
    return float(10.0 * np.log10(max(err / ref, NMSE_FLOOR)))


class SBLImager:
    """
    Refreshes sigma from hard symbol decisions.

    Every call restarts SBL from the residual of the new decisions; the
    precisions learned against earlier (wrong) symbols are discarded so that
    pruned pixels can come back.
    """

    def __init__(self, cfg: SceneConfig, sched: PhaseSchedule, y: ReceivedFrame):
        self.cfg = cfg
        self.sched = sched
        self.y = y
        self.estimate: Optional[SparseEstimate] = None

    def update(self, x_hat: SymbolFrame) -> SparseEstimate:
        cfg = self.cfg
        sys = build_residual(cfg, self.sched, self.y, x_hat)
        start = SparseEstimate.initial(sys.residual, cfg.n_pixels)
        self.estimate = run_sbl(sys, start, cfg.sbl_max_iters, cfg.sbl_tol, cfg.gamma_rate, cfg.noise_update)
        return self.estimate


@dataclass(eq=False)
class FixedSigmaImager:
    """Imager that always reports a known scene."""

    truth: SceneTruth
    estimate: SparseEstimate = field(init=False)

    def __post_init__(self):
        self.estimate = SparseEstimate.from_truth(self.truth)

    def update(self, x_hat: SymbolFrame) -> SparseEstimate:
        return self.estimate
