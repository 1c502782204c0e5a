"""
Signal Model

Synthesizes the three-segment received frame

    t <= k         : alpha_c g^T Theta(t) h_c x(t)                                  + w(t)
    k < t <= L     : alpha_c g^T Theta(t) h_c x(t) + alpha_I g^T Theta(t) H_I s x(t-k) + w(t)
    L < t <= L + k :                                 alpha_I g^T Theta(t) H_I s x(t-k) + w(t)

and measures the communication/imaging power ratios. Time indices in the
public API are 1-based, arrays are 0-based.
"""

import logging
from typing import Tuple

import numpy as np

from .errors import InfiniteRatioError, ShapeError
from .geometry import scene_geometry
from .rng import make_rng
from .scene_structure import QPSK_POINTS, PhaseSchedule, ReceivedFrame, SceneConfig, SceneTruth, SymbolFrame

logger = logging.getLogger(__name__)

NOISE_STREAM = "noise"


def comm_coefficients(cfg: SceneConfig, sched: PhaseSchedule) -> np.ndarray:
    """alpha_c g^T Theta(t) h_c for every t = 1..L+k."""
    sched.check_shape(cfg)
    geo = scene_geometry(cfg)
    return cfg.alpha_c * (np.exp(1j * sched.phases) @ geo.g_hc)


def imaging_rows(cfg: SceneConfig, sched: PhaseSchedule) -> np.ndarray:
    """alpha-free g^T Theta(t) H_I for every t = 1..L+k, shape (L+k, M)."""
    sched.check_shape(cfg)
    geo = scene_geometry(cfg)
    return np.exp(1j * sched.phases) @ geo.g_hi


def _check_inputs(cfg: SceneConfig, sched: PhaseSchedule, frame: SymbolFrame, truth: SceneTruth) -> None:
    sched.check_shape(cfg)
    if len(frame) != cfg.frame_len:
        raise ShapeError(f"symbol frame has length {len(frame)}, expected {cfg.frame_len}")
    if truth.n_pixels != cfg.n_pixels:
        raise ShapeError(f"scene has {truth.n_pixels} pixels, expected {cfg.n_pixels}")


def _echo_components(cfg: SceneConfig, sched: PhaseSchedule, frame: SymbolFrame,
                     truth: SceneTruth) -> Tuple[np.ndarray, np.ndarray]:
    """Noise-free communication and imaging contributions, both of length L + k."""
    L, k = cfg.frame_len, cfg.delay
    comm = np.zeros(cfg.total_len, dtype=np.complex128)
    imaging = np.zeros(cfg.total_len, dtype=np.complex128)
    comm[:L] = comm_coefficients(cfg, sched)[:L] * frame.symbols
    if cfg.alpha_i != 0.0:
        rows = imaging_rows(cfg, sched)[k:]
        imaging[k:] = cfg.alpha_i * (rows @ truth.sigma) * frame.symbols
    return comm, imaging


def synth_received(cfg: SceneConfig, sched: PhaseSchedule, frame: SymbolFrame,
                   truth: SceneTruth, seed: int) -> ReceivedFrame:
    """
    Synthesize y(1..L+k) with circular Gaussian noise of total variance noise_var.

    Args:
        cfg: Scene configuration
        sched: Phase schedule shaped (L + k) x N
        frame: Transmitted QPSK frame of length L
        truth: Scene reflectivities
        seed: Seed of the noise stream

    Returns:
        ReceivedFrame of length L + k
    """
    _check_inputs(cfg, sched, frame, truth)
    comm, imaging = _echo_components(cfg, sched, frame, truth)
    y = comm + imaging
    if cfg.noise_var > 0:
        rng = make_rng(seed, 0, NOISE_STREAM)
        std = np.sqrt(cfg.noise_var / 2.0)
        y = y + std * (rng.standard_normal(cfg.total_len) + 1j * rng.standard_normal(cfg.total_len))
    return ReceivedFrame(samples=y, noise_seed=int(seed))


def _ratio_db(power: float, noise_var: float) -> float:
    if power <= 0.0:
        return float("-inf")
    return float(10.0 * np.log10(power / noise_var))


def echo_powers(cfg: SceneConfig, sched: PhaseSchedule, frame: SymbolFrame,
                truth: SceneTruth) -> Tuple[float, float]:
    """Mean communication power over t in [1, L] and imaging power over t in (k, L+k]."""
    _check_inputs(cfg, sched, frame, truth)
    comm, imaging = _echo_components(cfg, sched, frame, truth)
    p_comm = float(np.mean(np.abs(comm[:cfg.frame_len]) ** 2))
    p_img = float(np.mean(np.abs(imaging[cfg.delay:]) ** 2))
    return p_comm, p_img


def cnr_inr(cfg: SceneConfig, sched: PhaseSchedule, frame: SymbolFrame,
            truth: SceneTruth) -> Tuple[float, float]:
    """
    Communication-to-noise and imaging-to-noise ratios in dB.

    An absent echo reports -inf.

    Raises:
        InfiniteRatioError: If noise_var is zero
    """
    if cfg.noise_var == 0:
        raise InfiniteRatioError("CNR/INR are infinite with noise_var = 0")
    p_comm, p_img = echo_powers(cfg, sched, frame, truth)
    return _ratio_db(p_comm, cfg.noise_var), _ratio_db(p_img, cfg.noise_var)


def qpsk_indices(symbols: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Vectorized nearest-constellation index (1..4); ties go to the smaller index."""
    symbols = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    dist = np.abs(symbols[:, None] - QPSK_POINTS[None, :]) ** 2
    best = dist.min(axis=1, keepdims=True)
    # first index within tolerance of the minimum
    near = dist <= best + tol * np.maximum(1.0, best)
    return np.argmax(near, axis=1).astype(np.int64) + 1


def qpsk_index(symbol: complex) -> int:
    """Index 1..4 of the QPSK point nearest to symbol."""
    return int(qpsk_indices(np.array([symbol]))[0])
