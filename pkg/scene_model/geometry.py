"""
Array Geometry

Half-wavelength ULA steering vectors and the diagonal RIS phase action.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ShapeError
from .scene_structure import SceneConfig


def steering_vector(theta: float, n: int) -> np.ndarray:
    """
    Array response of an n-element half-wavelength ULA toward theta.

    Entry i is exp(j*pi*i*sin(theta)), i = 0..n-1.

    Args:
        theta: Angle in degrees, strictly inside (-90, 90)
        n: Number of elements

    Returns:
        Complex vector of length n with unit-modulus entries
    """
    if not (-90.0 < float(theta) < 90.0):
        raise DomainError(f"theta={theta} deg is outside the open interval (-90, 90)")
    if n < 1:
        raise ShapeError(f"element count must be positive, got {n}")
    phase = np.pi * np.sin(np.deg2rad(theta))
    return np.exp(1j * phase * np.arange(n))


def steering_matrix(thetas, n: int) -> np.ndarray:
    """Stack steering vectors column-wise, shape (n, len(thetas))."""
    thetas = np.asarray(thetas, dtype=np.float64).reshape(-1)
    if np.any((thetas <= -90.0) | (thetas >= 90.0)):
        raise DomainError("all angles must lie in the open interval (-90, 90)")
    phase = np.pi * np.sin(np.deg2rad(thetas))
    return np.exp(1j * np.outer(np.arange(n), phase))


def phase_matrix_apply(phase_row: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply Theta(t) = diag(e^{j theta_t}) to v without forming the N x N matrix."""
    phase_row = np.asarray(phase_row, dtype=np.float64)
    v = np.asarray(v)
    if phase_row.shape[0] != v.shape[0]:
        raise ShapeError(f"phase row has {phase_row.shape[0]} entries, vector has {v.shape[0]}")
    scale = np.exp(1j * phase_row)
    if v.ndim == 1:
        return scale * v
    return scale[:, None] * v


@dataclass(frozen=True, eq=False)
class SceneGeometry:
    """Steering vectors of one configuration: g = a(theta_B), h_c = a(theta_U), H_I = a(theta_S)."""

    g: np.ndarray
    h_c: np.ndarray
    h_i: np.ndarray
    g_hc: np.ndarray  # g * h_c, RIS-domain communication weights (N,)
    g_hi: np.ndarray  # g[:, None] * H_I, RIS-domain imaging weights (N, M)


@lru_cache(maxsize=32)
def scene_geometry(cfg: SceneConfig) -> SceneGeometry:
    """Materialize the geometry once per config; arrays are shared read-only."""
    g = steering_vector(cfg.theta_bs, cfg.n_ris)
    h_c = steering_vector(cfg.theta_ue, cfg.n_ris)
    h_i = steering_matrix(cfg.roi_angles, cfg.n_ris)
    g_hc = g * h_c
    g_hi = g[:, None] * h_i
    for arr in (g, h_c, h_i, g_hc, g_hi):
        arr.setflags(write=False)
    return SceneGeometry(g=g, h_c=h_c, h_i=h_i, g_hc=g_hc, g_hi=g_hi)
