"""
Result artifacts: CSV tables and static matplotlib figures.

Floats are written with repr so identical results give byte-identical files.
"""

import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from imaging import scene_grid

SER_HEADER = ["cnr_db", "inr_db", "method", "ser", "stderr", "trials"]
NMSE_HEADER = ["cnr_db", "inr_db", "method", "nmse_db", "trials"]
BEAM_HEADER = ["t", "theta_deg", "gain_db"]
STUDY_HEADER = ["rho", "n_bit", "ue_gain_db", "roi_gain_db", "ortho_metric", "accepted"]

PathLike = Union[str, Path]


def _f(value: float) -> str:
    return repr(float(value))


def _open_writer(path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path, open(path, "w", newline="", encoding="utf-8")


def write_ser_csv(records, path: PathLike) -> Path:
    """SER rows for every method that reports SER."""
    path, f = _open_writer(path)
    with f:
        writer = csv.writer(f)
        writer.writerow(SER_HEADER)
        for r in records:
            if np.isnan(r.ser):
                continue
            writer.writerow([_f(r.cnr_db), _f(r.inr_db), r.method, _f(r.ser), _f(r.stderr), r.trials])
    return path


def write_nmse_csv(records, path: PathLike) -> Path:
    """NMSE rows for every method that reports NMSE."""
    path, f = _open_writer(path)
    with f:
        writer = csv.writer(f)
        writer.writerow(NMSE_HEADER)
        for r in records:
            if np.isnan(r.nmse_db):
                continue
            writer.writerow([_f(r.cnr_db), _f(r.inr_db), r.method, _f(r.nmse_db), r.trials])
    return path


def write_beam_pattern_csv(patterns: Dict[int, np.ndarray], grid: Sequence[float], path: PathLike) -> Path:
    """One row per (t, angle) for the patterns keyed by 1-based time index."""
    path, f = _open_writer(path)
    with f:
        writer = csv.writer(f)
        writer.writerow(BEAM_HEADER)
        for t in sorted(patterns):
            for theta, gain in zip(grid, patterns[t]):
                writer.writerow([t, _f(theta), _f(gain)])
    return path


def write_beam_study_csv(rows, path: PathLike) -> Path:
    path, f = _open_writer(path)
    with f:
        writer = csv.writer(f)
        writer.writerow(STUDY_HEADER)
        for r in rows:
            writer.writerow([_f(r.rho), r.n_bit, _f(r.ue_gain_db), _f(r.roi_gain_db), _f(r.ortho_metric), r.accepted])
    return path


def _by_method(records, value: str, axis: str):
    curves: Dict[str, List] = {}
    for r in records:
        y = getattr(r, value)
        if np.isnan(y):
            continue
        x = r.inr_db if axis == "inr" else r.cnr_db
        curves.setdefault(r.method, []).append((x, y, r))
    return curves


def _finish(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_ser_curve(records, axis: str, path: PathLike) -> Path:
    """Semilog SER versus the swept ratio, one line per method, with 1.96-sigma bars."""
    fig, ax = plt.subplots(figsize=(7, 5))
    for method, pts in _by_method(records, "ser", axis).items():
        xs = [p[0] for p in pts]
        # zero SER cannot be drawn on a log axis
        ys = [max(p[1], 1e-7) for p in pts]
        err = [1.96 * p[2].stderr for p in pts]
        ax.errorbar(xs, ys, yerr=err, marker="o", capsize=3, label=method)
    ax.set_yscale("log")
    ax.set_xlabel(f"{axis.upper()} (dB)")
    ax.set_ylabel("SER")
    ax.grid(True, which="both", linestyle=":")
    ax.legend()
    return _finish(fig, path)


def plot_nmse_curve(records, axis: str, path: PathLike) -> Path:
    fig, ax = plt.subplots(figsize=(7, 5))
    for method, pts in _by_method(records, "nmse_db", axis).items():
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="s", label=method)
    ax.set_xlabel(f"{axis.upper()} (dB)")
    ax.set_ylabel("NMSE (dB)")
    ax.grid(True, linestyle=":")
    ax.legend()
    return _finish(fig, path)


def plot_beam_pattern(patterns: Dict[int, np.ndarray], grid: Sequence[float], path: PathLike,
                      markers: Iterable[float] = ()) -> Path:
    """Normalized receive patterns; vertical lines mark reference directions (e.g. UE, RoI edges)."""
    fig, ax = plt.subplots(figsize=(8, 5))
    for t in sorted(patterns):
        ax.plot(grid, patterns[t], linewidth=1.0, label=f"t = {t}")
    for theta in markers:
        ax.axvline(theta, color="k", linestyle="--", linewidth=0.8)
    ax.set_xlabel("Angle (deg)")
    ax.set_ylabel("Normalized gain (dB)")
    ax.set_ylim(bottom=max(np.min([np.min(p) for p in patterns.values()]), -60.0) if patterns else -60.0, top=1.0)
    ax.grid(True, linestyle=":")
    if len(patterns) <= 8:
        ax.legend()
    return _finish(fig, path)


def plot_loss_trace(report, path: PathLike) -> Path:
    """Optimizer loss and orthogonality metric per iteration, stage boundary marked."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(report.loss_trace)
    ax1.set_yscale("log")
    ax1.set_ylabel("Loss")
    ax2.plot(report.ortho_trace, color="tab:orange")
    ax2.set_ylabel("Orthogonality metric")
    ax2.set_xlabel("Iteration")
    for ax in (ax1, ax2):
        ax.axvline(report.stage1_iterations, color="k", linestyle="--", linewidth=0.8)
        ax.grid(True, linestyle=":")
    return _finish(fig, path)


def plot_sigma_grid(sigma_hat: np.ndarray, sigma: np.ndarray, path: PathLike) -> Path:
    """Side-by-side magnitude images of the true and recovered scenes (square M only)."""
    fig, axes = plt.subplots(1, 2, figsize=(8, 4))
    for ax, data, title in ((axes[0], sigma, "Ground truth"), (axes[1], sigma_hat, "Recovered")):
        try:
            image = scene_grid(data)
        except ValueError:
            image = np.abs(np.asarray(data)).reshape(1, -1)
        im = ax.imshow(image, cmap="viridis")
        ax.set_title(title)
        ax.set_xticks([])
        ax.set_yticks([])
        fig.colorbar(im, ax=ax, fraction=0.046)
    return _finish(fig, path)
