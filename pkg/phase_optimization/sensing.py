"""
Sensing Matrix

Rows g^T Theta(t) H_I for the imaging-active indices t = k+1 .. L+k and the
column-incoherence metric ||R(G) - I||_F / (M^2 - M).
"""

from dataclasses import dataclass

import numpy as np

from scene_model import (
    SceneConfig, PhaseSchedule, ShapeError, DegenerateColumnError, scene_geometry,
)


@dataclass(eq=False)
class SensingMatrix:
    """alpha-free imaging rows, shape L x M."""

    g_mat: np.ndarray

    @property
    def shape(self):
        return self.g_mat.shape


def sensing_rows(cfg: SceneConfig, phases: np.ndarray) -> np.ndarray:
    """Imaging rows for a raw (L + k) x N phase array (soft or hard)."""
    if phases.shape != (cfg.total_len, cfg.n_ris):
        raise ShapeError(f"phases have shape {phases.shape}, expected {(cfg.total_len, cfg.n_ris)}")
    geo = scene_geometry(cfg)
    return np.exp(1j * phases[cfg.delay:]) @ geo.g_hi


def sensing_matrix(cfg: SceneConfig, sched: PhaseSchedule) -> SensingMatrix:
    sched.check_shape(cfg)
    return SensingMatrix(sensing_rows(cfg, sched.phases))


def correlation_matrix(g_mat: np.ndarray) -> np.ndarray:
    """Column correlation coefficients |<g_m, g_m'>| / (||g_m|| ||g_m'||), unit diagonal."""
    gram = g_mat.conj().T @ g_mat
    norms = np.sqrt(np.real(np.diag(gram)))
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateColumnError(int(zero[0]))
    corr = np.abs(gram) / np.outer(norms, norms)
    np.fill_diagonal(corr, 1.0)
    return corr


def ortho_metric(G) -> float:
    """
    Mean off-diagonal column correlation, ||R(G) - I_M||_F / (M^2 - M).

    Args:
        G: SensingMatrix or raw complex matrix with M >= 2 columns

    Returns:
        Metric in [0, 1]
    """
    g_mat = G.g_mat if isinstance(G, SensingMatrix) else np.asarray(G)
    m = g_mat.shape[1]
    if m < 2:
        raise ShapeError(f"orthogonality metric needs at least 2 columns, got {m}")
    corr = correlation_matrix(g_mat)
    np.fill_diagonal(corr, 0.0)
    return float(np.linalg.norm(corr, "fro") / (m * m - m))
