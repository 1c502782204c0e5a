"""
Scene persistence: `m,re,im,gamma` rows (1-based m) and the square magnitude grid.
"""

import csv
import math
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

from scene_model import ShapeError

SCENE_HEADER = ["m", "re", "im", "gamma"]


def scene_grid(sigma: np.ndarray) -> np.ndarray:
    """Row-major sqrt(M) x sqrt(M) magnitude grid of a scene vector."""
    sigma = np.asarray(sigma).reshape(-1)
    side = math.isqrt(sigma.size)
    if side * side != sigma.size:
        raise ShapeError(f"scene with {sigma.size} pixels cannot be arranged on a square grid")
    return np.abs(sigma).reshape(side, side)


def save_scene_csv(sigma: np.ndarray, path: Union[str, Path], gamma: Optional[np.ndarray] = None) -> Path:
    """Write one row per pixel; gamma is left blank when not given."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sigma = np.asarray(sigma, dtype=np.complex128).reshape(-1)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(SCENE_HEADER)
        for m, value in enumerate(sigma):
            g = "" if gamma is None else repr(float(gamma[m]))
            writer.writerow([m + 1, repr(float(value.real)), repr(float(value.imag)), g])
    return path


def load_scene_csv(path: Union[str, Path]) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Read (sigma, gamma); gamma is None when the column is blank."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scene file not found: {path}")
    with open(path, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f))
    if not rows or list(rows[0].keys()) != SCENE_HEADER:
        raise ShapeError(f"{path}: expected header {','.join(SCENE_HEADER)}")
    rows.sort(key=lambda r: int(r["m"]))
    sigma = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    if any(r["gamma"] == "" for r in rows):
        return sigma, None
    return sigma, np.array([float(r["gamma"]) for r in rows])


def save_scene_grid_csv(sigma: np.ndarray, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = scene_grid(sigma)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        for row in grid:
            writer.writerow([repr(float(v)) for v in row])
    return path
