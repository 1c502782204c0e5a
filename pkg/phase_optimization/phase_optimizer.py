"""
Phase Optimizer Module

Two-stage RIS phase design:

1. Initialization: fit the sensing matrix to a complex Gaussian target so its
   columns start out incoherent.
2. Refinement: minimize the inverse-gain loss while the hard schedule keeps
   the orthogonality metric at or below the threshold; on the first violation
   revert to the last feasible parameters and stop.

Discrete schedules are optimized through annealed softmax logits and
hard-quantized at exit. Continuous schedules are optimized directly on the
phases. Both use plain full-batch gradient descent.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from scene_model import SceneConfig, PhaseSchedule, ConfigError, InfeasibleStartError, make_rng, TWO_PI

from .losses import init_loss_and_grad, refine_loss_and_grad, sample_target
from .relaxation import SoftWeights, temperature
from .sensing import ortho_metric, sensing_matrix

logger = logging.getLogger(__name__)

GRAD_FLOOR = 1e-300


@dataclass
class OptimizerReport:
    """Trace and exit status of one optimization run."""
    loss_trace: List[float] = field(default_factory=list)
    ortho_trace: List[float] = field(default_factory=list)
    final_ortho_metric: float = 0.0
    iterations: int = 0
    accepted: bool = False
    stage1_iterations: int = 0
    clamped: bool = False
    final_alpha: float = 1.0
    reverted: bool = False


class _Parametrization:
    """Uniform view over logits (discrete) and raw phases (continuous)."""

    def __init__(self, cfg: SceneConfig, rng: np.random.Generator):
        self.cfg = cfg
        if cfg.is_continuous:
            self.soft: Optional[SoftWeights] = None
            self.theta = rng.uniform(0.0, TWO_PI, size=(cfg.total_len, cfg.n_ris))
        else:
            self.soft = SoftWeights.initial(cfg, rng)
            self.theta = None

    def set_alpha(self, alpha: float) -> None:
        if self.soft is not None:
            self.soft.alpha = alpha

    def phases(self) -> np.ndarray:
        return self.soft.soft_phases() if self.soft is not None else self.theta

    def backward(self, grad_theta: np.ndarray) -> np.ndarray:
        return self.soft.backward(grad_theta) if self.soft is not None else grad_theta

    def step(self, grad: np.ndarray, lr: float) -> None:
        if self.soft is not None:
            self.soft.w -= lr * grad
        else:
            self.theta = np.mod(self.theta - lr * grad, TWO_PI)

    def hard(self) -> PhaseSchedule:
        return self.soft.hard_schedule() if self.soft is not None else PhaseSchedule(self.theta)

    def snapshot(self):
        return self.soft.w.copy() if self.soft is not None else self.theta.copy()

    def restore(self, snap) -> None:
        if self.soft is not None:
            self.soft.w = snap.copy()
        else:
            self.theta = snap.copy()


def _plateaued(trace: List[float], patience: int, rel_tol: float) -> bool:
    if len(trace) <= patience:
        return False
    past, now = trace[-1 - patience], trace[-1]
    return (past - now) < rel_tol * abs(past)


class PhaseOptimizer:
    """Runs the two-stage phase design for one configuration and seed."""

    def __init__(self, cfg: SceneConfig, seed: int = 0, progress: bool = False):
        """
        Initialize the optimizer.

        Args:
            cfg: Scene configuration (n_bit selects the discrete or continuous model)
            seed: Seed for the logit/phase initialization and the stage-1 target
            progress: Show tqdm progress bars
        """
        self.cfg = cfg
        self.seed = int(seed)
        self.progress = progress

    def _descend(self, params: _Parametrization, report: OptimizerReport, l0: int, max_iters: int,
                 loss_fn: Callable[[np.ndarray], Tuple[float, np.ndarray, float]],
                 feasible: Optional[Callable[[], Tuple[bool, float]]] = None, desc: str = "") -> int:
        """
        Gradient-descent loop shared by both stages. Returns the next iteration index.

        The step is normalized once per stage so that the first update moves the
        largest parameter by exactly learning_rate; later steps reuse that scale.
        """
        cfg = self.cfg
        scale = None
        stage_trace: List[float] = []
        last_feasible = None
        l = l0
        for _ in tqdm(range(max_iters), desc=desc, disable=not self.progress, leave=False):
            alpha = temperature(l, cfg.temp_rate)
            params.set_alpha(alpha)
            report.final_alpha = alpha

            if feasible is not None:
                ok, metric = feasible()
                if not ok:
                    logger.info("Orthogonality constraint violated at iteration %d (metric %.4g); reverting", l, metric)
                    params.restore(last_feasible)
                    report.reverted = True
                    return l
                last_feasible = params.snapshot()

            loss, grad_theta, metric = loss_fn(params.phases())
            report.loss_trace.append(loss)
            report.ortho_trace.append(metric)
            stage_trace.append(loss)

            grad = params.backward(grad_theta)
            if scale is None:
                scale = 1.0 / max(float(np.max(np.abs(grad))), GRAD_FLOOR)
            params.step(grad, cfg.learning_rate * scale)
            l += 1

            if feasible is None and _plateaued(stage_trace, cfg.stage1_patience, cfg.stage1_rel_tol):
                logger.debug("%s plateaued after %d iterations", desc, len(stage_trace))
                break

        if feasible is not None and last_feasible is not None:
            ok, _ = feasible()
            if not ok:
                params.restore(last_feasible)
                report.reverted = True
        return l

    def run(self) -> Tuple[PhaseSchedule, OptimizerReport]:
        """
        Optimize and return the exit schedule with its report.

        Raises:
            InfeasibleStartError: If stage 1 ends above the orthogonality threshold
        """
        cfg = self.cfg
        params = _Parametrization(cfg, make_rng(self.seed, 0, "phase-init"))
        target = sample_target(cfg, make_rng(self.seed, 0, "phase-target"))
        report = OptimizerReport()

        def stage1_loss(phases):
            loss, grad, g_mat = init_loss_and_grad(cfg, phases, target)
            return loss, grad, ortho_metric(g_mat)

        logger.info("Stage 1: fitting sensing matrix to Gaussian target (%s phases)",
                    "continuous" if cfg.is_continuous else f"{cfg.n_bit}-bit")
        l = self._descend(params, report, 0, cfg.stage1_max_iters, stage1_loss, desc="init")
        report.stage1_iterations = l

        start_metric = ortho_metric(sensing_matrix(cfg, params.hard()))
        if start_metric > cfg.ortho_threshold:
            best = min([start_metric] + report.ortho_trace)
            raise InfeasibleStartError(best, cfg.ortho_threshold)

        hard_metric = [start_metric]

        def stage2_feasible():
            hard_metric[0] = ortho_metric(sensing_matrix(cfg, params.hard()))
            return hard_metric[0] <= cfg.ortho_threshold, hard_metric[0]

        def stage2_loss(phases):
            loss, grad, clamped = refine_loss_and_grad(cfg, phases)
            report.clamped = report.clamped or clamped
            return loss, grad, hard_metric[0]

        logger.info("Stage 2: refining gains under orthogonality threshold %.4g", cfg.ortho_threshold)
        l = self._descend(params, report, l, cfg.stage2_max_iters, stage2_loss,
                          feasible=stage2_feasible, desc="refine")

        sched = params.hard()
        report.iterations = l
        report.final_ortho_metric = ortho_metric(sensing_matrix(cfg, sched))
        report.accepted = report.final_ortho_metric <= cfg.ortho_threshold
        logger.info("Phase design finished after %d iterations (metric %.4g, accepted=%s)",
                    l, report.final_ortho_metric, report.accepted)
        return sched, report


def optimize_discrete(cfg: SceneConfig, seed: int = 0, progress: bool = False) -> Tuple[PhaseSchedule, OptimizerReport]:
    """Annealed-softmax design for a finite n_bit; the exit schedule lies on the phase grid."""
    if cfg.is_continuous:
        raise ConfigError("optimize_discrete needs a finite n_bit")
    return PhaseOptimizer(cfg, seed, progress).run()


def optimize_continuous(cfg: SceneConfig, seed: int = 0, progress: bool = False) -> Tuple[PhaseSchedule, OptimizerReport]:
    """Direct phase-gradient design for n_bit = 'continuous'."""
    if not cfg.is_continuous:
        raise ConfigError("optimize_continuous needs n_bit = 'continuous'")
    return PhaseOptimizer(cfg, seed, progress).run()


def optimize_phases(cfg: SceneConfig, seed: int = 0, progress: bool = False) -> Tuple[PhaseSchedule, OptimizerReport]:
    """Dispatch on the configured phase model."""
    if cfg.is_continuous:
        return optimize_continuous(cfg, seed, progress)
    return optimize_discrete(cfg, seed, progress)
