"""
Receive Beam Patterns

Angular response g^T Theta(t) a(theta) of a phase schedule, plus the
direction-gain summaries used to compare schedules across rho and n_bit.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Union

import numpy as np

from scene_model import SceneConfig, PhaseSchedule, ShapeError, scene_geometry, steering_matrix

from .phase_optimizer import optimize_phases

logger = logging.getLogger(__name__)

# amplitude floor so exact nulls map to a finite dB value
AMPLITUDE_FLOOR = 1e-15


def _amplitude_db(values: np.ndarray) -> np.ndarray:
    return 20.0 * np.log10(np.maximum(np.abs(values), AMPLITUDE_FLOOR))


def _response(cfg: SceneConfig, sched: PhaseSchedule, times: np.ndarray, thetas) -> np.ndarray:
    """g^T Theta(t) a(theta_p) for the given 1-based times, shape (len(times), len(thetas))."""
    sched.check_shape(cfg)
    times = np.atleast_1d(np.asarray(times, dtype=np.int64))
    if np.any((times < 1) | (times > cfg.total_len)):
        raise ShapeError(f"time indices must lie in [1, {cfg.total_len}]")
    geo = scene_geometry(cfg)
    a = steering_matrix(thetas, cfg.n_ris)
    z = np.exp(1j * sched.phases[times - 1])
    return (z * geo.g[None, :]) @ a


def beam_pattern(cfg: SceneConfig, sched: PhaseSchedule, t: int, grid: Sequence[float]) -> np.ndarray:
    """
    Receive pattern at time t over an angle grid, normalized to 0 dB at its maximum.

    Args:
        cfg: Scene configuration
        sched: Phase schedule
        t: 1-based time index in [1, L + k]
        grid: Angles in degrees

    Returns:
        Gain in dB per grid angle
    """
    gains = _amplitude_db(_response(cfg, sched, np.array([t]), grid)[0])
    return gains - gains.max()


def direction_gain_db(cfg: SceneConfig, sched: PhaseSchedule, theta_deg: float) -> np.ndarray:
    """Unnormalized gain 20 log10 |g^T Theta(t) a(theta)| for every t = 1..L+k."""
    times = np.arange(1, cfg.total_len + 1)
    return _amplitude_db(_response(cfg, sched, times, [theta_deg])[:, 0])


def roi_gain_db(cfg: SceneConfig, sched: PhaseSchedule) -> np.ndarray:
    """Mean power gain over the RoI pixel directions, in dB, for every t = 1..L+k."""
    times = np.arange(1, cfg.total_len + 1)
    resp = _response(cfg, sched, times, cfg.roi_angles)
    power = np.mean(np.abs(resp) ** 2, axis=1)
    return 10.0 * np.log10(np.maximum(power, AMPLITUDE_FLOOR ** 2))


def peak_angles(cfg: SceneConfig, sched: PhaseSchedule, grid: Sequence[float],
                times: Union[Iterable[int], None] = None) -> np.ndarray:
    """Grid angle of the pattern maximum for each requested time (all times by default)."""
    grid = np.asarray(grid, dtype=np.float64)
    times = np.arange(1, cfg.total_len + 1) if times is None else np.asarray(list(times))
    resp = np.abs(_response(cfg, sched, times, grid))
    return grid[np.argmax(resp, axis=1)]


@dataclass
class BeamStudyRow:
    """Direction gains of one optimized schedule variant."""
    rho: float
    n_bit: Union[int, str]
    ue_gain_db: float
    roi_gain_db: float
    ortho_metric: float
    accepted: bool


def beam_study(cfg: SceneConfig, rhos: Sequence[float], nbits: Sequence[Union[int, str]],
               seed: int = 0) -> List[BeamStudyRow]:
    """
    Optimize one schedule per (rho, n_bit) and tabulate its time-averaged
    UE-direction gain and RoI gain. All variants share the seed.
    """
    rows: List[BeamStudyRow] = []
    for rho in rhos:
        for n_bit in nbits:
            variant = cfg.replace(rho=float(rho), n_bit=n_bit)
            logger.info("Beam study: rho=%s n_bit=%s", rho, n_bit)
            sched, report = optimize_phases(variant, seed)
            rows.append(BeamStudyRow(
                rho=float(rho),
                n_bit=variant.n_bit,
                ue_gain_db=float(np.mean(direction_gain_db(variant, sched, variant.theta_ue))),
                roi_gain_db=float(np.mean(roi_gain_db(variant, sched))),
                ortho_metric=report.final_ortho_metric,
                accepted=report.accepted,
            ))
    return rows
