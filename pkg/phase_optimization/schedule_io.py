"""
Schedule and trace persistence.

Schedules are stored one row per (t, n) as `t,n,theta_rad` with 1-based
indices; optimizer traces as `iter,loss,ortho_metric`.
"""

import csv
from pathlib import Path
from typing import Optional, Union

import numpy as np

from scene_model import SceneConfig, PhaseSchedule, ShapeError

from .phase_optimizer import OptimizerReport

SCHEDULE_HEADER = ["t", "n", "theta_rad"]
TRACE_HEADER = ["iter", "loss", "ortho_metric"]


def save_schedule_csv(sched: PhaseSchedule, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n_t, n_n = sched.shape
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(SCHEDULE_HEADER)
        for t in range(n_t):
            for n in range(n_n):
                writer.writerow([t + 1, n + 1, repr(float(sched.phases[t, n]))])
    return path


def load_schedule_csv(path: Union[str, Path], cfg: Optional[SceneConfig] = None) -> PhaseSchedule:
    """
    Read a schedule CSV. Every (t, n) cell must appear exactly once.

    Raises:
        FileNotFoundError: If the file does not exist
        ShapeError: On a wrong header, missing/duplicate cells, or a shape that disagrees with cfg
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Schedule file not found: {path}")
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != SCHEDULE_HEADER:
            raise ShapeError(f"{path}: expected header {','.join(SCHEDULE_HEADER)}, got {header}")
        cells = [(int(t), int(n), float(theta)) for t, n, theta in reader]
    if not cells:
        raise ShapeError(f"{path}: schedule is empty")

    n_t = max(c[0] for c in cells)
    n_n = max(c[1] for c in cells)
    phases = np.full((n_t, n_n), np.nan)
    for t, n, theta in cells:
        if t < 1 or n < 1 or not np.isnan(phases[t - 1, n - 1]):
            raise ShapeError(f"{path}: invalid or duplicate cell (t={t}, n={n})")
        phases[t - 1, n - 1] = theta
    if np.isnan(phases).any():
        raise ShapeError(f"{path}: schedule has missing cells")

    sched = PhaseSchedule(phases)
    if cfg is not None:
        sched.check_shape(cfg)
    return sched


def save_loss_trace_csv(report: OptimizerReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_HEADER)
        for i, (loss, metric) in enumerate(zip(report.loss_trace, report.ortho_trace)):
            writer.writerow([i, repr(float(loss)), repr(float(metric))])
    return path
