"""
Softmax Relaxation

Discrete phases are relaxed to theta = softmax(alpha * |w|) . s, where s is
the admissible phase grid and alpha = 1 + (r l)^2 grows with the iteration
index l. As alpha grows the softmax hardens into a selector.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from scene_model import SceneConfig, PhaseSchedule, ShapeError


def temperature(l: int, r: float) -> float:
    """alpha = 1 + (r * l)^2."""
    return 1.0 + (r * l) ** 2


def softmax_weights(w: np.ndarray, alpha: float) -> np.ndarray:
    """softmax(alpha * |w|) along the last axis, with max subtraction."""
    u = alpha * np.abs(w)
    u = u - u.max(axis=-1, keepdims=True)
    e = np.exp(u)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_select(w_row: np.ndarray, alpha: float, grid: np.ndarray) -> Tuple[float, np.ndarray]:
    """
    Soft phase selection for one RIS element.

    Args:
        w_row: Logits, one per admissible phase
        alpha: Temperature (>= 1)
        grid: Admissible phases

    Returns:
        (theta, weights) where theta = weights . grid
    """
    w_row = np.asarray(w_row, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if w_row.shape != grid.shape:
        raise ShapeError(f"logit row has shape {w_row.shape}, grid has shape {grid.shape}")
    weights = softmax_weights(w_row, alpha)
    return float(weights @ grid), weights


def softmax_backward(grad_theta: np.ndarray, w: np.ndarray, weights: np.ndarray,
                     theta: np.ndarray, grid: np.ndarray, alpha: float) -> np.ndarray:
    """
    Chain rule from d(loss)/d(theta) to d(loss)/d(w).

    d theta / d w_s = alpha * sign(w_s) * p_s * (s_s - theta), with sign(0) = 0.
    """
    return grad_theta[..., None] * alpha * np.sign(w) * weights * (grid - theta[..., None])


@dataclass(eq=False)
class SoftWeights:
    """Logits w of shape (L + k) x N x 2^n_bit over the phase grid s."""

    w: np.ndarray
    grid: np.ndarray
    alpha: float = 1.0

    @classmethod
    def initial(cls, cfg: SceneConfig, rng: np.random.Generator) -> "SoftWeights":
        grid = cfg.phase_grid
        w = rng.standard_normal((cfg.total_len, cfg.n_ris, grid.shape[0]))
        return cls(w=w, grid=grid, alpha=1.0)

    def weights(self) -> np.ndarray:
        return softmax_weights(self.w, self.alpha)

    def soft_phases(self) -> np.ndarray:
        """Relaxed phases, shape (L + k) x N."""
        return self.weights() @ self.grid

    def hard_schedule(self) -> PhaseSchedule:
        """Snap each element to grid[argmax |w|] (= argmax of the softmax weights)."""
        return PhaseSchedule(self.grid[np.argmax(np.abs(self.w), axis=-1)])

    def backward(self, grad_theta: np.ndarray) -> np.ndarray:
        weights = self.weights()
        theta = weights @ self.grid
        return softmax_backward(grad_theta, self.w, weights, theta, self.grid, self.alpha)

    def copy(self) -> "SoftWeights":
        return SoftWeights(w=self.w.copy(), grid=self.grid, alpha=self.alpha)
