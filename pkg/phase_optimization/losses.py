"""
Phase-Design Losses

Stage-1 loss ||T - G||_F against a complex Gaussian target and stage-2 loss
sum_t 1 / (rho |g^T Theta(t) h_c|^2 + (1 - rho) ||g^T Theta(t) H_I||^2 / M),
each with its analytic gradient with respect to the phases. Gradients with
respect to softmax logits are obtained through SoftWeights.backward.

The RoI term is averaged over the M pixels (roi_gain_norm = "mean") so that it
weighs like a single direction against the user term; "sum" keeps the plain
sum over pixels.
"""

import logging
from typing import Tuple, Union

import numpy as np

from scene_model import SceneConfig, PhaseSchedule, ShapeError, scene_geometry

from .relaxation import SoftWeights
from .sensing import sensing_rows

logger = logging.getLogger(__name__)

DENOM_FLOOR = 1e-30

SchedParams = Union[SoftWeights, PhaseSchedule, np.ndarray]


def params_to_phases(params: SchedParams) -> np.ndarray:
    """Phases of a soft (logit) or hard (schedule / array) parametrization."""
    if isinstance(params, SoftWeights):
        return params.soft_phases()
    if isinstance(params, PhaseSchedule):
        return params.phases
    return np.asarray(params, dtype=np.float64)


def sample_target(cfg: SceneConfig, rng: np.random.Generator) -> np.ndarray:
    """
    L x M circular Gaussian target whose expected Frobenius norm matches G
    under uniform random phases (E|G_tm|^2 = N).
    """
    std = np.sqrt(cfg.n_ris / 2.0)
    shape = (cfg.frame_len, cfg.n_pixels)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def init_loss_and_grad(cfg: SceneConfig, phases: np.ndarray, target: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    ||target - G(phases)||_F and its gradient w.r.t. all (L + k) x N phases.

    Returns:
        (loss, grad, G) where rows of grad for t <= k are zero
    """
    g_mat = sensing_rows(cfg, phases)
    if target.shape != g_mat.shape:
        raise ShapeError(f"target has shape {target.shape}, expected {g_mat.shape}")
    err = target - g_mat
    loss = float(np.linalg.norm(err, "fro"))
    grad = np.zeros_like(phases)
    if loss > 0.0:
        geo = scene_geometry(cfg)
        z = np.exp(1j * phases[cfg.delay:])
        grad[cfg.delay:] = np.real(-1j * z * (err.conj() @ geo.g_hi.T)) / loss
    return loss, grad, g_mat


def init_loss(cfg: SceneConfig, sched_params: SchedParams, target: np.ndarray) -> float:
    return init_loss_and_grad(cfg, params_to_phases(sched_params), np.asarray(target))[0]


def refine_loss_and_grad(cfg: SceneConfig, phases: np.ndarray) -> Tuple[float, np.ndarray, bool]:
    """
    Stage-2 loss over t = 1..L+k and its phase gradient.

    Denominators below 1e-30 are clamped; clamped terms contribute no gradient.

    Returns:
        (loss, grad, clamped)
    """
    if phases.shape != (cfg.total_len, cfg.n_ris):
        raise ShapeError(f"phases have shape {phases.shape}, expected {(cfg.total_len, cfg.n_ris)}")
    geo = scene_geometry(cfg)
    rho = cfg.rho
    roi_weight = (1.0 - rho) / cfg.n_pixels if cfg.roi_gain_norm == "mean" else 1.0 - rho
    z = np.exp(1j * phases)
    comm = z @ geo.g_hc
    rows = z @ geo.g_hi
    denom = rho * np.abs(comm) ** 2 + roi_weight * np.sum(np.abs(rows) ** 2, axis=1)
    small = denom < DENOM_FLOOR
    clamped = bool(np.any(small))
    if clamped:
        logger.warning("Clamped %d refine-loss denominators at %g", int(small.sum()), DENOM_FLOOR)
    safe = np.where(small, DENOM_FLOOR, denom)
    loss = float(np.sum(1.0 / safe))

    d_denom = 2.0 * np.real(1j * z * (rho * np.conj(comm)[:, None] * geo.g_hc[None, :]
                                      + roi_weight * (rows.conj() @ geo.g_hi.T)))
    scale = np.where(small, 0.0, -1.0 / safe ** 2)
    return loss, scale[:, None] * d_denom, clamped


def refine_loss(cfg: SceneConfig, sched_params: SchedParams) -> float:
    return refine_loss_and_grad(cfg, params_to_phases(sched_params))[0]
