"""
Echo Decoder

Alternates message passing over the symbol chain with scene refreshes from
an imager:

1. forward sweep   t = 1..L      messages from the communication factors
2. backward sweep  t = L..1      messages from the delayed imaging echoes
3. beliefs and hard QPSK decisions
4. imager update from the decisions, giving new echo points h_t

until the change in decisions plus scene drops to the tolerance or the
iteration cap is reached. Unless a starting scene is given, the first pass
runs with an empty scene and reproduces the echo-ignoring detector.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Tuple

import numpy as np

from scene_model import (
    SceneConfig, PhaseSchedule, ReceivedFrame, SymbolFrame, ConfigError, ShapeError, NumericalFailureError,
    QPSK_POINTS, comm_coefficients, imaging_rows,
)
from imaging import SparseEstimate

from .messages import (
    ScalarGaussian, SymbolBelief, VAR_FLOOR, moment_match, belief_and_decide,
    fwd_msg_pure_comm, fwd_msg_overlap, bwd_msg_tail, bwd_msg_mid,
)

logger = logging.getLogger(__name__)


class Imager(Protocol):
    def update(self, x_hat: SymbolFrame) -> SparseEstimate: ...


def comm_scalar(cfg: SceneConfig, sched: PhaseSchedule, t: int) -> complex:
    """alpha_c g^T Theta(t) h_c for a 1-based t in [1, L]."""
    if not (1 <= t <= cfg.frame_len):
        raise ShapeError(f"t={t} is outside [1, {cfg.frame_len}]")
    return complex(comm_coefficients(cfg, sched)[t - 1])


@dataclass(eq=False)
class DecoderState:
    """Messages and beliefs of the current outer iteration (0-based arrays over t = 1..L)."""

    fwd_msgs: List[ScalarGaussian]
    bwd_msgs: List[ScalarGaussian]
    h_point: np.ndarray
    beliefs: List[SymbolBelief] = field(default_factory=list)

    @classmethod
    def empty(cls, frame_len: int) -> "DecoderState":
        return cls(
            fwd_msgs=[ScalarGaussian.uninformative()] * frame_len,
            bwd_msgs=[ScalarGaussian.uninformative()] * frame_len,
            h_point=np.zeros(frame_len, dtype=np.complex128),
        )


@dataclass(eq=False)
class DecoderResult:
    symbols: SymbolFrame
    beliefs: List[SymbolBelief]
    estimate: SparseEstimate
    iterations: int
    converged: bool
    delta_trace: List[float] = field(default_factory=list)

    @property
    def indices(self) -> np.ndarray:
        return np.array([b.decided for b in self.beliefs], dtype=np.int64)


class EchoDecoder:
    """Joint symbol detection and scene recovery for one received frame."""

    def __init__(self, cfg: SceneConfig, sched: PhaseSchedule, y: ReceivedFrame, imager: Optional[Imager] = None):
        """
        Initialize the decoder.

        Args:
            cfg: Scene configuration (decoder_max_iters, decoder_tol, damping)
            sched: Phase schedule used when y was received
            y: Received frame of length L + k
            imager: Object whose update(x_hat) returns a SparseEstimate; only
                needed by decode()
        """
        sched.check_shape(cfg)
        y.check_shape(cfg)
        self.cfg = cfg
        self.sched = sched
        self.y = y.samples
        self.imager = imager
        self.comm = comm_coefficients(cfg, sched)
        self.rows = imaging_rows(cfg, sched)[cfg.delay:]
        self.noise_var = max(cfg.noise_var, VAR_FLOOR)
        self.state = DecoderState.empty(cfg.frame_len)

    def echo_points(self, sigma: np.ndarray) -> np.ndarray:
        """h_t = alpha_I g^T Theta(t + k) H_I sigma for t = 1..L."""
        return self.cfg.alpha_i * (self.rows @ sigma)

    def _forward(self, h_point: np.ndarray) -> List[ScalarGaussian]:
        L, k = self.cfg.frame_len, self.cfg.delay
        y, comm, nv = self.y, self.comm, self.noise_var
        fwd: List[ScalarGaussian] = []
        for i in range(L):
            if k == 0:
                # echo of the same symbol: one combined linear node
                msg = fwd_msg_pure_comm(y[i], comm[i] + h_point[i], nv)
            elif i < k:
                msg = fwd_msg_pure_comm(y[i], comm[i], nv)
            else:
                msg = fwd_msg_overlap(y[i], comm[i], h_point[i - k], moment_match(fwd[i - k]), nv)
            fwd.append(msg)
        return fwd

    def _backward(self, h_point: np.ndarray) -> List[ScalarGaussian]:
        L, k = self.cfg.frame_len, self.cfg.delay
        y, comm, nv = self.y, self.comm, self.noise_var
        bwd: List[Optional[ScalarGaussian]] = [None] * L
        if k == 0:
            return [ScalarGaussian.uninformative()] * L
        for i in range(L - 1, -1, -1):
            if i >= L - k:
                bwd[i] = bwd_msg_tail(y[i + k], h_point[i], nv)
            else:
                bwd[i] = bwd_msg_mid(y[i + k], h_point[i], comm[i + k], moment_match(bwd[i + k]), nv)
        return bwd

    def _damp(self, new: List[ScalarGaussian], old: List[ScalarGaussian]) -> List[ScalarGaussian]:
        lam = self.cfg.damping
        if lam >= 1.0:
            return new
        return [n.damped(o, lam) for n, o in zip(new, old)]

    def _check_finite(self, msgs: List[ScalarGaussian], iteration: int, label: str) -> None:
        for t, msg in enumerate(msgs, start=1):
            if not msg.is_finite():
                raise NumericalFailureError(iteration, f"non-finite {label} message at t={t}")

    def sweep(self, h_point: np.ndarray, iteration: int = 1) -> List[SymbolBelief]:
        """One forward/backward pass for fixed echo points; updates self.state."""
        state = self.state
        fwd = self._damp(self._forward(h_point), state.fwd_msgs)
        bwd = self._damp(self._backward(h_point), state.bwd_msgs)
        self._check_finite(fwd, iteration, "forward")
        self._check_finite(bwd, iteration, "backward")
        state.fwd_msgs, state.bwd_msgs, state.h_point = fwd, bwd, h_point
        state.beliefs = [belief_and_decide(f, b) for f, b in zip(fwd, bwd)]
        return state.beliefs

    def decode(self, max_iters: Optional[int] = None, tol: Optional[float] = None,
               initial_sigma: Optional[np.ndarray] = None) -> DecoderResult:
        """
        Run outer iterations until the decisions and scene settle.

        Args:
            max_iters: Outer iteration cap (default cfg.decoder_max_iters)
            tol: Stop once the decision plus scene change is at most tol
            initial_sigma: Scene used by the first sweep; zero when omitted

        Raises:
            NumericalFailureError: If a message becomes non-finite
        """
        cfg = self.cfg
        if self.imager is None:
            raise ConfigError("decode() needs an imager")
        max_iters = cfg.decoder_max_iters if max_iters is None else max_iters
        tol = cfg.decoder_tol if tol is None else tol

        if initial_sigma is None:
            sigma = np.zeros(cfg.n_pixels, dtype=np.complex128)
        else:
            sigma = np.asarray(initial_sigma, dtype=np.complex128).reshape(-1)
            if sigma.shape != (cfg.n_pixels,):
                raise ShapeError(f"initial scene has {sigma.size} pixels, expected {cfg.n_pixels}")
        x_prev = np.zeros(cfg.frame_len, dtype=np.complex128)
        estimate: Optional[SparseEstimate] = None
        deltas: List[float] = []
        converged = False
        iteration = 0

        for iteration in range(1, max_iters + 1):
            beliefs = self.sweep(self.echo_points(sigma), iteration)
            x_hat = QPSK_POINTS[np.array([b.decided for b in beliefs]) - 1]
            estimate = self.imager.update(SymbolFrame(x_hat))
            if not np.all(np.isfinite(estimate.sigma)):
                raise NumericalFailureError(iteration, "imager returned a non-finite scene")

            delta = float(np.linalg.norm(x_hat - x_prev) + np.linalg.norm(estimate.sigma - sigma))
            deltas.append(delta)
            logger.debug("Decoder iteration %d: delta=%.4g", iteration, delta)
            x_prev, sigma = x_hat, estimate.sigma
            if delta <= tol:
                converged = True
                break

        return DecoderResult(
            symbols=SymbolFrame(x_prev),
            beliefs=list(self.state.beliefs),
            estimate=estimate,
            iterations=iteration,
            converged=converged,
            delta_trace=deltas,
        )


def run_decoder(cfg: SceneConfig, sched: PhaseSchedule, y: ReceivedFrame,
                imager: Imager) -> Tuple[SymbolFrame, SparseEstimate, int, bool]:
    """Convenience wrapper returning (symbols, scene estimate, iterations, converged)."""
    result = EchoDecoder(cfg, sched, y, imager).decode()
    return result.symbols, result.estimate, result.iterations, result.converged


def detect_ignoring_echo(cfg: SceneConfig, sched: PhaseSchedule, y: ReceivedFrame) -> List[SymbolBelief]:
    """Single forward pass with no echo: per-symbol detection on y_t / c_t."""
    decoder = EchoDecoder(cfg, sched, y)
    return decoder.sweep(np.zeros(cfg.frame_len, dtype=np.complex128))
